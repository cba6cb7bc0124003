#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "psm/core.hpp"

namespace psm {

/// u(q) = -sum_s 1/2 a_s (q_s - b_s)^2 with weights a > 0 and ideal point b
/// in absolute coordinates.
struct QuadraticParams {
    std::vector<double> weights;
    std::vector<double> ideal;

    /// Two-question parameters from the identified ratio theta = a_1 / a_2,
    /// normalized so a_1 + a_2 = 2.
    static QuadraticParams from_ratio(double theta, double b1, double b2);

    double utility(std::span<const double> q) const;
    double utility(const Answer& q) const;
    double ratio() const { return weights.at(0) / weights.at(1); }
};

void validate(const QuadraticParams& params, const AnswerSpace& space);

/// A round with real-valued prices, budget and answer (absolute coordinates);
/// the off-grid simulation mode and the fitter work on these.
struct ContinuousObservation {
    Corner corner;
    std::vector<double> prices;
    double budget = 0.0;
    std::vector<double> answer;
};

ContinuousObservation to_continuous(const Observation& obs);

/// Optimal answer of a two-question agent in one round, in corner
/// coordinates. If the box-clamped ideal point is affordable it is returned;
/// otherwise the closed-form budget-line solution
///   q_1 = alpha b_1 + (1 - alpha)(R - p_2 b_2) / p_1,
///   alpha = (a_1/p_1^2) / (a_1/p_1^2 + a_2/p_2^2),
/// clamped to the part of the budget line inside the answer box.
std::vector<double> demand(const QuadraticParams& params, const Corner& corner, std::span<const double> prices,
                           double budget, const AnswerSpace& space);
std::vector<double> demand(const QuadraticParams& params, const Round& round, const AnswerSpace& space);

/// Round-0 answer of a simulated agent: the ideal point clamped to the box
/// and rounded to the nearest grid point.
Answer ideal_grid_answer(const QuadraticParams& params, const AnswerSpace& space);

/// Simulated respondent on a grid. Without noise each answer is the cheapest
/// utility-maximizing affordable grid point; with noise the demand is
/// perturbed by N(0, noise_sd^2) per question and the nearest affordable grid
/// point is chosen. Throws Errc::invariant if the round-0 answer is affordable
/// in some design round.
Dataset simulate_agent(const QuadraticParams& params, const AnswerSpace& space, std::span<const Round> design,
                       double noise_sd, std::uint64_t seed);

/// Off-grid mode: answers are the exact demand plus optional noise, no rounding.
std::vector<ContinuousObservation> simulate_agent_continuous(const QuadraticParams& params, const AnswerSpace& space,
                                                             std::span<const Round> design, double noise_sd,
                                                             std::uint64_t seed);

struct FitOptions {
    int grid_points = 5;         ///< per-parameter multi-start grid size
    double theta_min = 0.1;
    double theta_max = 10.0;
    double tolerance = 1e-8;     ///< simplex size at convergence
    int max_iterations = 4000;
    int restarts = 2;            ///< simplex re-initializations at the optimum
};

struct FitResult {
    QuadraticParams params;      ///< normalized so a_1 + a_2 = 2
    double theta = 1.0;
    double rss = 0.0;
    std::size_t rounds_used = 0;
    bool outlier = false;
    std::size_t best_start = 0;
};

/// Outlier rule on the pre-normalization scale: either weight above 15 when
/// the other weight is pinned at 1, or any |b_s| above 15.
bool is_outlier(double theta, std::span<const double> ideal);

/// sum_k || q^k - demand(theta, b, k) ||^2 over usable rounds.
double residual_sum(std::span<const ContinuousObservation> data, const AnswerSpace& space, double theta, double b1,
                    double b2);

/// NLLS estimate of (theta, b_1, b_2) by multi-start Nelder-Mead; starts run
/// in parallel and the best is chosen with ties going to the lower start index.
FitResult fit(std::span<const ContinuousObservation> data, const AnswerSpace& space, const FitOptions& options = {});
FitResult fit(const Dataset& d, const FitOptions& options = {});

namespace serial {
FitResult fit(std::span<const ContinuousObservation> data, const AnswerSpace& space, const FitOptions& options = {});
} // namespace serial

} // namespace psm
