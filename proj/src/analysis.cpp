#include "psm/analysis.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "psm/dataset_io.hpp"
#include "psm/random.hpp"

namespace psm {

using nlohmann::json;

namespace {

json big_to_json(const BigRational& r) { return r.str(); }

json answer_json(const Answer& a) { return a.values; }

FailureInfo failure(const Error& e) { return {std::string(to_string(e.code())), e.what()}; }

json failure_json(const FailureInfo& f) { return {{"code", f.code}, {"message", f.message}}; }

json stats_json(const std::optional<SummaryStats>& s) {
    if (!s) return nullptr;
    return {{"n", s->n},
            {"mean", s->mean},
            {"std", s->std ? json(*s->std) : json(nullptr)},
            {"p5", s->p5},
            {"p25", s->p25},
            {"p50", s->p50},
            {"p75", s->p75},
            {"p95", s->p95}};
}

std::string csv_number(double x) { return json(x).dump(); }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string joined(const Answer& a, char sep) {
    std::string out;
    for (std::size_t s = 0; s < a.size(); ++s) out += (s ? std::string(1, sep) : "") + std::to_string(a[s]);
    return out;
}

} // namespace

void set_checks(AnalysisOptions& options, const std::string& list) {
    options.garp = options.ccei = options.bronars = options.afriat = options.fit = false;
    std::stringstream in(list);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item == "garp") options.garp = true;
        else if (item == "ccei") options.ccei = true;
        else if (item == "bronars") options.bronars = true;
        else if (item == "afriat") options.afriat = true;
        else if (item == "fit") options.fit = true;
        else if (!item.empty()) throw Error(Errc::invalid_argument, "unknown check \"" + item + "\"");
    }
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw Error(Errc::invalid_argument, "quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

std::optional<SummaryStats> summarize(std::vector<double> values) {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    SummaryStats s;
    s.n = values.size();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    if (s.n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    s.p5 = quantile_sorted(values, 0.05);
    s.p25 = quantile_sorted(values, 0.25);
    s.p50 = quantile_sorted(values, 0.50);
    s.p75 = quantile_sorted(values, 0.75);
    s.p95 = quantile_sorted(values, 0.95);
    return s;
}

bool AnalysisReport::any_failed() const {
    return std::any_of(rows.begin(), rows.end(), [](const RespondentRow& r) { return r.error.has_value(); });
}

RespondentRow analyze_dataset(const Dataset& d, std::string id, const AnalysisOptions& options) {
    RespondentRow row;
    row.id = std::move(id);
    row.rounds = d.size();
    row.rounds_excluded = d.excluded_rounds.size();
    if (options.garp) row.garp = check_garp(d);
    if (options.ccei) row.ccei = ccei(d, options.ccei_tolerance);
    if (options.bronars) {
        try {
            std::vector<Round> design;
            for (const auto& obs : d.observations) design.push_back(obs.round);
            row.bronars = bronars_power(design, d.space, options.bronars_trials, options.seed);
        } catch (const Error& e) {
            row.bronars_error = failure(e);
        }
    }
    if (options.afriat) {
        try {
            if (d.size() == 0) throw Error(Errc::degenerate, "no observations");
            AfriatSolution sol = solve_afriat(d);
            row.peak = find_peak(PiecewiseUtility(d, sol));
            row.afriat = std::move(sol);
        } catch (const Error& e) {
            row.afriat_error = failure(e);
        }
    }
    if (options.fit) {
        try {
            row.fit = fit(d, options.fit_options);
        } catch (const Error& e) {
            row.fit_error = failure(e);
        }
    }
    return row;
}

AnalysisReport analyze(const std::vector<std::filesystem::path>& inputs, const AnalysisOptions& options) {
    AnalysisReport report;
    report.options = options;
    report.rows.resize(inputs.size());
    const auto n = static_cast<long long>(inputs.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) {
        const auto& path = inputs[static_cast<std::size_t>(i)];
        RespondentRow row;
        try {
            row = analyze_dataset(load_dataset_file(path), path.stem().string(), options);
        } catch (const Error& e) {
            row = RespondentRow{};
            row.id = path.stem().string();
            row.error = failure(e);
        } catch (const std::exception& e) {
            row = RespondentRow{};
            row.id = path.stem().string();
            row.error = FailureInfo{"io", e.what()};
        }
        row.file = path.string();
        report.rows[static_cast<std::size_t>(i)] = std::move(row);
    }
    return report;
}

json report_to_json(const AnalysisReport& report) {
    const AnalysisOptions& o = report.options;
    std::vector<std::string> checks;
    if (o.garp) checks.push_back("garp");
    if (o.ccei) checks.push_back("ccei");
    if (o.bronars) checks.push_back("bronars");
    if (o.afriat) checks.push_back("afriat");
    if (o.fit) checks.push_back("fit");

    json meta{{"checks", checks},
              {"seed", o.seed},
              {"garp_convention",
               "ordered pairs (k,l), 1-based, with q^k R q^l and q^l P0 q^k; P0 is strict expenditure only"},
              {"ccei", {{"tolerance", rational_to_json(o.ccei_tolerance)}, {"max_iterations", kDefaultCceiIterations}}},
              {"bronars", {{"trials", o.bronars_trials}, {"seed", o.seed}, {"sampling", std::string(kBronarsSampling)}}},
              {"fit",
               {{"start_grid", o.fit_options.grid_points},
                {"theta_range", {o.fit_options.theta_min, o.fit_options.theta_max}},
                {"tolerance", o.fit_options.tolerance},
                {"restarts", o.fit_options.restarts},
                {"normalization", "a1 + a2 = 2, theta = a1 / a2"},
                {"outlier_rule", "theta > 15 or 1/theta > 15 or |b_s| > 15"}}}};

    json rows = json::array();
    std::vector<double> ccei_values, garp_values, bronars_values;
    std::size_t failed = 0;
    for (const RespondentRow& r : report.rows) {
        json row{{"id", r.id}, {"file", r.file}};
        if (r.error) {
            ++failed;
            row["error"] = failure_json(*r.error);
            rows.push_back(std::move(row));
            continue;
        }
        row["rounds"] = r.rounds;
        row["rounds_excluded"] = r.rounds_excluded;
        if (r.garp) {
            json pairs = json::array();
            for (auto [k, l] : r.garp->violations) pairs.push_back({k + 1, l + 1});
            row["garp"] = {{"satisfied", r.garp->satisfied}, {"violations", r.garp->count}, {"pairs", pairs}};
            garp_values.push_back(static_cast<double>(r.garp->count));
        }
        if (r.ccei) {
            row["ccei"] = {{"value", r.ccei->e_star.to_double()},
                           {"exact", rational_to_json(r.ccei->e_star)},
                           {"iterations", r.ccei->iterations},
                           {"threshold", r.ccei->threshold ? rational_to_json(*r.ccei->threshold) : json(nullptr)},
                           {"supremum_only", r.ccei->supremum_only}};
            ccei_values.push_back(r.ccei->e_star.to_double());
        }
        if (r.bronars) {
            row["bronars"] = {{"power", r.bronars->power},
                              {"trials", r.bronars->trials},
                              {"violating", r.bronars->violating},
                              {"seed", r.bronars->seed}};
            bronars_values.push_back(r.bronars->power);
        } else if (r.bronars_error) {
            row["bronars"] = {{"error", failure_json(*r.bronars_error)}};
        }
        if (r.afriat && r.peak) {
            json table = json::array();
            for (std::size_t k = 0; k < r.afriat->u_levels.size(); ++k)
                table.push_back({{"k", k + 1},
                                 {"class", r.afriat->class_rank[k]},
                                 {"U", big_to_json(r.afriat->u_levels[k])},
                                 {"lambda", big_to_json(r.afriat->multipliers[k])}});
            json ties = json::array();
            for (const auto& t : r.peak->ties) ties.push_back(answer_json(t));
            row["afriat"] = {{"peak", answer_json(r.peak->argmax)},
                             {"peak_value", big_to_json(r.peak->value)},
                             {"peak_value_decimal", r.peak->value.convert_to<double>()},
                             {"ties", ties},
                             {"solution", table}};
        } else if (r.afriat_error) {
            row["afriat"] = {{"error", failure_json(*r.afriat_error)}};
        }
        if (r.fit) {
            row["fit"] = {{"theta", r.fit->theta},
                          {"a", r.fit->params.weights},
                          {"b", r.fit->params.ideal},
                          {"rss", r.fit->rss},
                          {"rounds_used", r.fit->rounds_used},
                          {"outlier", r.fit->outlier}};
        } else if (r.fit_error) {
            row["fit"] = {{"error", failure_json(*r.fit_error)}};
        }
        rows.push_back(std::move(row));
    }

    json summary{{"respondents", report.rows.size()},
                 {"failed", failed},
                 {"ccei", stats_json(summarize(ccei_values))},
                 {"garp_violations", stats_json(summarize(garp_values))},
                 {"bronars_power", stats_json(summarize(bronars_values))}};
    return {{"metadata", std::move(meta)}, {"respondents", std::move(rows)}, {"summary", std::move(summary)}};
}

std::string report_to_csv(const AnalysisReport& report) {
    std::ostringstream out;
    out << "id,file,error,rounds,rounds_excluded,garp_violations,ccei,bronars_power,peak,peak_value,theta,a1,a2,b1,b2,"
           "rss,outlier\n";
    for (const RespondentRow& r : report.rows) {
        out << csv_field(r.id) << ',' << csv_field(r.file) << ',' << (r.error ? csv_field(r.error->code) : "");
        if (r.error) {
            out << ",,,,,,,,,,,,,,\n";
            continue;
        }
        out << ',' << r.rounds << ',' << r.rounds_excluded << ',';
        out << (r.garp ? std::to_string(r.garp->count) : "") << ',';
        out << (r.ccei ? csv_number(r.ccei->e_star.to_double()) : "") << ',';
        out << (r.bronars ? csv_number(r.bronars->power) : "") << ',';
        out << (r.peak ? joined(r.peak->argmax, ';') : "") << ',';
        out << (r.peak ? csv_number(r.peak->value.convert_to<double>()) : "") << ',';
        if (r.fit) {
            const auto& f = *r.fit;
            out << csv_number(f.theta) << ',' << csv_number(f.params.weights[0]) << ','
                << csv_number(f.params.weights[1]) << ',' << csv_number(f.params.ideal[0]) << ','
                << csv_number(f.params.ideal[1]) << ',' << csv_number(f.rss) << ',' << (f.outlier ? "true" : "false");
        } else {
            out << ",,,,,,";
        }
        out << '\n';
    }
    return out.str();
}

std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& patterns) {
    std::vector<std::filesystem::path> out;
    for (const auto& pattern : patterns) {
        if (pattern.find_first_of("*?[") == std::string::npos) {
            out.emplace_back(pattern);
            continue;
        }
        glob_t g{};
        const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
        if (rc == 0)
            for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]); // glob sorts
        globfree(&g);
        if (rc != 0 && rc != GLOB_NOMATCH) throw Error(Errc::io, "cannot expand " + pattern);
    }
    return out;
}

// ------------------------------------------------------------- simulation

CohortSpec cohort_from_json(const json& j) {
    if (!j.is_object()) throw Error(Errc::schema, "cohort spec must be an object");
    CohortSpec spec;
    auto range = [](const json& v, const char* name, double& lo, double& hi) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw Error(Errc::schema, std::string("cohort: ") + name + " must be [lo, hi]");
        lo = v[0].get<double>();
        hi = v[1].get<double>();
        if (!(lo <= hi)) throw Error(Errc::schema, std::string("cohort: ") + name + " must have lo <= hi");
    };
    for (const auto& item : j.items()) {
        const auto& key = item.key();
        const auto& v = item.value();
        if (key == "count") {
            if (!v.is_number_unsigned()) throw Error(Errc::schema, "cohort: count must be a non-negative integer");
            spec.count = v.get<std::size_t>();
        } else if (key == "session") {
            spec.session = config_from_json(v);
        } else if (key == "noise_sd") {
            if (!v.is_number() || v.get<double>() < 0.0) throw Error(Errc::schema, "cohort: noise_sd must be >= 0");
            spec.noise_sd = v.get<double>();
        } else if (key == "theta") {
            range(v, "theta", spec.theta_min, spec.theta_max);
            if (!(spec.theta_min > 0.0)) throw Error(Errc::schema, "cohort: theta range must be positive");
        } else if (key == "b") {
            range(v, "b", spec.b_min, spec.b_max);
        } else if (key == "agents") {
            if (!v.is_array()) throw Error(Errc::schema, "cohort: agents must be an array");
            for (const auto& a : v) {
                if (a.contains("theta") && a.contains("b")) {
                    const auto b = a.at("b").get<std::vector<double>>();
                    if (b.size() != 2) throw Error(Errc::schema, "cohort: theta agents take b = [b1, b2]");
                    spec.agents.push_back(QuadraticParams::from_ratio(a.at("theta").get<double>(), b[0], b[1]));
                } else if (a.contains("weights") && a.contains("ideal")) {
                    spec.agents.push_back(
                        {a.at("weights").get<std::vector<double>>(), a.at("ideal").get<std::vector<double>>()});
                } else {
                    throw Error(Errc::schema, "cohort: each agent needs {theta, b} or {weights, ideal}");
                }
            }
        } else {
            throw Error(Errc::schema, "cohort: unknown field \"" + key + "\"");
        }
    }
    if (!spec.agents.empty()) spec.count = spec.agents.size();
    for (const auto& a : spec.agents) validate(a, spec.session.space);
    if (spec.agents.empty() && spec.session.space.dims() != 2)
        throw Error(Errc::invalid_argument, "randomized cohorts need a two-question answer space");
    if (spec.noise_sd > 0.0 && spec.session.space.dims() != 2)
        throw Error(Errc::invalid_argument, "noisy simulation needs a two-question answer space");
    return spec;
}

json cohort_to_json(const CohortSpec& spec) {
    json agents = json::array();
    for (const auto& a : spec.agents) agents.push_back({{"weights", a.weights}, {"ideal", a.ideal}});
    return {{"count", spec.count},
            {"session", config_to_json(spec.session)},
            {"noise_sd", spec.noise_sd},
            {"theta", {spec.theta_min, spec.theta_max}},
            {"b", {spec.b_min, spec.b_max}},
            {"agents", agents}};
}

std::vector<SimulatedRespondent> simulate_cohort(const CohortSpec& spec, std::uint64_t seed) {
    std::vector<SimulatedRespondent> cohort(spec.count);
    for (std::size_t i = 0; i < spec.count; ++i) {
        const std::uint64_t base = derive_seed(seed, i);
        SimulatedRespondent& r = cohort[i];
        char id[32];
        std::snprintf(id, sizeof id, "respondent-%04zu", i + 1);
        r.id = id;
        if (!spec.agents.empty()) {
            r.params = spec.agents[i];
        } else {
            std::mt19937_64 rng(derive_seed(base, 0));
            const double theta = std::exp(uniform(rng, std::log(spec.theta_min), std::log(spec.theta_max)));
            const double b1 = uniform(rng, spec.b_min, spec.b_max);
            const double b2 = uniform(rng, spec.b_min, spec.b_max);
            r.params = QuadraticParams::from_ratio(theta, b1, b2);
        }
        SessionConfig config = spec.session;
        config.shuffle_seed = r.shuffle_seed = derive_seed(base, 1);
        const Answer q0 = ideal_grid_answer(r.params, config.space);
        const auto rounds = generate_rounds(config, q0);
        std::vector<Round> design;
        std::vector<Round> excluded;
        for (const auto& g : rounds) (g.excluded ? excluded : design).push_back(g.round);
        r.dataset = simulate_agent(r.params, config.space, design, spec.noise_sd, derive_seed(base, 2));
        r.dataset.excluded_rounds = std::move(excluded);
        validate(r.dataset);
    }
    return cohort;
}

json cohort_manifest(const CohortSpec& spec, std::uint64_t seed, const std::vector<SimulatedRespondent>& cohort) {
    json rows = json::array();
    for (const auto& r : cohort)
        rows.push_back({{"id", r.id},
                        {"file", r.id + ".json"},
                        {"weights", r.params.weights},
                        {"ideal", r.params.ideal},
                        {"theta", r.params.weights.size() == 2 ? json(r.params.ratio()) : json(nullptr)},
                        {"shuffle_seed", r.shuffle_seed},
                        {"round0", r.dataset.round0.values},
                        {"rounds", r.dataset.size()},
                        {"rounds_excluded", r.dataset.excluded_rounds.size()}});
    return {{"seed", seed}, {"cohort", cohort_to_json(spec)}, {"respondents", std::move(rows)}};
}

void write_cohort(const std::filesystem::path& dir, const CohortSpec& spec, std::uint64_t seed,
                  const std::vector<SimulatedRespondent>& cohort) {
    std::filesystem::create_directories(dir);
    for (const auto& r : cohort) save_dataset_file(r.dataset, dir / (r.id + ".json"));
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw Error(Errc::io, "cannot write " + (dir / "manifest.json").string());
    out << cohort_manifest(spec, seed, cohort).dump(2) << '\n';
}

// ----------------------------------------------------------------- afriat

json afriat_document(const Dataset& d, bool grid) {
    if (d.size() == 0) throw Error(Errc::degenerate, "no observations");
    PiecewiseUtility u(d, solve_afriat(d));
    const AfriatSolution& sol = u.solution();
    json table = json::array();
    for (std::size_t k = 0; k < sol.u_levels.size(); ++k)
        table.push_back({{"k", k + 1},
                         {"class", sol.class_rank[k]},
                         {"U", big_to_json(sol.u_levels[k])},
                         {"lambda", big_to_json(sol.multipliers[k])}});
    const auto values = u.grid_values();
    const Peak peak = peak_of(values, u.space());
    json ties = json::array();
    for (const auto& t : peak.ties) ties.push_back(answer_json(t));
    json doc{{"scales", std::vector<int>(d.space.scales().begin(), d.space.scales().end())},
             {"solution", table},
             {"peak", {{"argmax", answer_json(peak.argmax)},
                       {"value", big_to_json(peak.value)},
                       {"value_decimal", peak.value.convert_to<double>()},
                       {"ties", ties}}}};
    if (grid) {
        json decimals = json::array();
        json exact = json::array();
        for (const auto& v : values) {
            decimals.push_back(v.convert_to<double>());
            exact.push_back(big_to_json(v));
        }
        doc["grid"] = {{"order", "row-major over answers, last question fastest"},
                       {"values", decimals},
                       {"values_exact", exact}};
    }
    return doc;
}

} // namespace psm
