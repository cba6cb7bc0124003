// psm: batch analysis, simulation and the survey service.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "psm/analysis.hpp"
#include "psm/dataset_io.hpp"
#include "psm/service.hpp"

namespace {

constexpr int kExitFileFailure = 2;

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw psm::Error(psm::Errc::io, "cannot write " + path);
    out << text;
}

int run_analyze(const std::vector<std::string>& inputs, const std::string& checks, std::size_t trials,
                std::uint64_t seed, const std::string& out, const std::string& csv) {
    psm::AnalysisOptions options;
    psm::set_checks(options, checks);
    options.bronars_trials = trials;
    options.seed = seed;
    const auto report = psm::analyze(psm::expand_inputs(inputs), options);
    for (const auto& row : report.rows)
        if (row.error) std::cerr << row.file << ": " << row.error->code << ": " << row.error->message << '\n';
    write_text(out, psm::report_to_json(report).dump(2) + "\n");
    if (!csv.empty()) write_text(csv, psm::report_to_csv(report));
    return report.any_failed() ? kExitFileFailure : 0;
}

int run_simulate(const std::string& cohort_path, std::uint64_t seed, const std::string& out_dir) {
    std::ifstream in(cohort_path);
    if (!in) throw psm::Error(psm::Errc::io, "cannot read " + cohort_path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw psm::Error(psm::Errc::schema, cohort_path + ": " + e.what());
    }
    const auto spec = psm::cohort_from_json(j);
    const auto cohort = psm::simulate_cohort(spec, seed);
    psm::write_cohort(out_dir, spec, seed, cohort);
    std::cerr << "wrote " << cohort.size() << " respondents to " << out_dir << '\n';
    return 0;
}

int run_afriat(const std::string& input, bool grid, const std::string& out) {
    const auto d = psm::load_dataset_file(input);
    write_text(out, psm::afriat_document(d, grid).dump(2) + "\n");
    return 0;
}

int run_serve(const std::string& host, int port, const std::string& store_path) {
    psm::SessionStore store(store_path);
    httplib::Server server;
    psm::register_routes(server, store);
    std::cerr << "listening on " << host << ":" << port << ", event log " << store_path << '\n';
    if (!server.listen(host, port)) throw psm::Error(psm::Errc::io, "cannot listen on " + host + ":" + std::to_string(port));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Priced survey analysis toolkit"};
    app.require_subcommand(1);

    std::vector<std::string> inputs;
    std::string checks = "garp,ccei";
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    std::string out;
    std::string csv;
    auto* analyze = app.add_subcommand("analyze", "Run revealed-preference checks and fits over dataset files");
    analyze->add_option("--input", inputs, "Dataset files or glob patterns")->expected(0, -1);
    analyze->add_option("--checks", checks, "Comma list of garp,ccei,bronars,afriat,fit")->capture_default_str();
    analyze->add_option("--bronars-trials", trials, "Monte Carlo trials per respondent")->capture_default_str();
    analyze->add_option("--seed", seed, "Seed for the Bronars trials")->capture_default_str();
    analyze->add_option("--out", out, "Report path (default stdout)");
    analyze->add_option("--csv", csv, "Also write the per-respondent table as CSV");

    std::string cohort;
    std::string out_dir;
    auto* simulate = app.add_subcommand("simulate", "Simulate a cohort of quadratic-utility respondents");
    simulate->add_option("--cohort", cohort, "Cohort spec (JSON)")->required();
    simulate->add_option("--seed", seed, "Cohort seed")->capture_default_str();
    simulate->add_option("--out-dir", out_dir, "Output directory")->required();

    std::string input;
    bool grid = false;
    auto* afriat = app.add_subcommand("afriat", "Construct the piecewise-linear utility of one dataset");
    afriat->add_option("--input", input, "Dataset file")->required();
    afriat->add_flag("--eval-grid", grid, "Include u(x) at every grid point");
    afriat->add_option("--out", out, "Output path (default stdout)");

    std::string host = "127.0.0.1";
    int port = 8080;
    std::string store = "psm-events.ndjson";
    auto* serve = app.add_subcommand("serve", "Run the survey session service");
    serve->add_option("--host", host)->capture_default_str();
    serve->add_option("--port", port)->capture_default_str();
    serve->add_option("--store", store, "Event log path")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) return run_analyze(inputs, checks, trials, seed, out, csv);
        if (*simulate) return run_simulate(cohort, seed, out_dir);
        if (*afriat) return run_afriat(input, grid, out);
        if (*serve) return run_serve(host, port, store);
    } catch (const psm::Error& e) {
        std::cerr << "psm: " << psm::to_string(e.code()) << ": " << e.what() << '\n';
        return kExitFileFailure;
    } catch (const std::exception& e) {
        std::cerr << "psm: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
