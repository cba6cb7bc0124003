#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "psm/afriat.hpp"
#include "psm/indices.hpp"
#include "psm/quadratic.hpp"
#include "psm/revealed.hpp"
#include "psm/session.hpp"

namespace psm {

struct AnalysisOptions {
    bool garp = true;
    bool ccei = true;
    bool bronars = false;
    bool afriat = false;
    bool fit = false;
    std::size_t bronars_trials = 1000;
    std::uint64_t seed = 0;
    Rational ccei_tolerance = kDefaultCceiTolerance;
    FitOptions fit_options;
};

/// Parses "garp,ccei,..." into the check flags; throws Errc::invalid_argument.
void set_checks(AnalysisOptions& options, const std::string& list);

struct FailureInfo {
    std::string code;
    std::string message;
};

struct RespondentRow {
    std::string id;
    std::string file;
    std::optional<FailureInfo> error; ///< the file could not be read or validated

    std::size_t rounds = 0;
    std::size_t rounds_excluded = 0;
    std::optional<GarpReport> garp;
    std::optional<CceiResult> ccei;
    std::optional<BronarsResult> bronars;
    std::optional<FailureInfo> bronars_error;
    std::optional<AfriatSolution> afriat;
    std::optional<Peak> peak;
    std::optional<FailureInfo> afriat_error;
    std::optional<FitResult> fit;
    std::optional<FailureInfo> fit_error;
};

struct SummaryStats {
    std::size_t n = 0;
    double mean = 0.0;
    std::optional<double> std; ///< sample standard deviation, needs n >= 2
    double p5 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p95 = 0.0;
};

/// Linear-interpolation quantile on sorted data: h = (n - 1) q.
double quantile_sorted(const std::vector<double>& sorted, double q);
/// nullopt for an empty sample.
std::optional<SummaryStats> summarize(std::vector<double> values);

struct AnalysisReport {
    AnalysisOptions options;
    std::vector<RespondentRow> rows;

    bool any_failed() const;
};

RespondentRow analyze_dataset(const Dataset& d, std::string id, const AnalysisOptions& options);

/// Rows come back in input order; respondents are analyzed in parallel.
AnalysisReport analyze(const std::vector<std::filesystem::path>& inputs, const AnalysisOptions& options);

/// Deterministic document: identical inputs and options give identical bytes.
/// Observation indices in violation pairs are 1-based.
nlohmann::json report_to_json(const AnalysisReport& report);
std::string report_to_csv(const AnalysisReport& report);

/// Expands shell-style patterns (*, ?) in the file-name component; plain
/// paths pass through. Matches are sorted; patterns keep their given order.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& patterns);

// ------------------------------------------------------------- simulation

struct CohortSpec {
    std::size_t count = 20;
    SessionConfig session;
    double noise_sd = 0.0;
    double theta_min = 0.2;
    double theta_max = 5.0;
    double b_min = 1.0;
    double b_max = 9.0;
    /// Explicit agents; when non-empty they replace the random draws and `count`.
    std::vector<QuadraticParams> agents;
};

CohortSpec cohort_from_json(const nlohmann::json& j);
nlohmann::json cohort_to_json(const CohortSpec& spec);

struct SimulatedRespondent {
    std::string id;
    QuadraticParams params;
    std::uint64_t shuffle_seed = 0;
    Dataset dataset;
};

/// Respondent i draws its parameters, round order and noise from streams
/// derived from (seed, i), so the cohort is reproducible from the seed alone.
std::vector<SimulatedRespondent> simulate_cohort(const CohortSpec& spec, std::uint64_t seed);

nlohmann::json cohort_manifest(const CohortSpec& spec, std::uint64_t seed,
                               const std::vector<SimulatedRespondent>& cohort);

/// Writes <id>.json per respondent and manifest.json.
void write_cohort(const std::filesystem::path& dir, const CohortSpec& spec, std::uint64_t seed,
                  const std::vector<SimulatedRespondent>& cohort);

// ----------------------------------------------------------------- afriat

/// Solution table and peak; with `grid` also every grid point and u(x).
nlohmann::json afriat_document(const Dataset& d, bool grid);

} // namespace psm
