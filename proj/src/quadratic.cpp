#include "psm/quadratic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <random>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "psm/error.hpp"
#include "psm/random.hpp"

namespace psm {

QuadraticParams QuadraticParams::from_ratio(double theta, double b1, double b2) {
    return QuadraticParams{{2.0 * theta / (1.0 + theta), 2.0 / (1.0 + theta)}, {b1, b2}};
}

double QuadraticParams::utility(std::span<const double> q) const {
    double u = 0.0;
    for (std::size_t s = 0; s < q.size(); ++s) u -= 0.5 * weights[s] * (q[s] - ideal[s]) * (q[s] - ideal[s]);
    return u;
}

double QuadraticParams::utility(const Answer& q) const {
    std::vector<double> x(q.values.begin(), q.values.end());
    return utility(x);
}

void validate(const QuadraticParams& params, const AnswerSpace& space) {
    if (params.weights.size() != space.dims() || params.ideal.size() != space.dims())
        throw Error(Errc::dimension_mismatch, "quadratic parameters must have one entry per question");
    for (double a : params.weights)
        if (!(a > 0.0) || !std::isfinite(a)) throw Error(Errc::invalid_argument, "question weights must be positive");
    for (double b : params.ideal)
        if (!std::isfinite(b)) throw Error(Errc::invalid_argument, "ideal point must be finite");
}

ContinuousObservation to_continuous(const Observation& obs) {
    ContinuousObservation c;
    c.corner = obs.round.corner;
    for (const auto& p : obs.round.prices) c.prices.push_back(p.to_double());
    c.budget = obs.round.budget.to_double();
    c.answer.assign(obs.answer.values.begin(), obs.answer.values.end());
    return c;
}

std::vector<double> demand(const QuadraticParams& params, const Corner& corner, std::span<const double> prices,
                           double budget, const AnswerSpace& space) {
    if (space.dims() != 2) throw Error(Errc::invalid_argument, "closed-form demand is defined for two questions");
    if (prices.size() != 2 || corner.size() != 2) throw Error(Errc::dimension_mismatch, "round must have two questions");
    validate(params, space);
    for (double p : prices)
        if (!(p > 0.0)) throw Error(Errc::invalid_argument, "prices must be positive");
    if (budget < 0.0) throw Error(Errc::invalid_argument, "budget must be non-negative");

    const double n1 = space.scale(0);
    const double n2 = space.scale(1);
    const auto b = to_corner_coords(params.ideal, corner);
    const double p1 = prices[0];
    const double p2 = prices[1];

    const double c1 = std::clamp(b[0], 0.0, n1);
    const double c2 = std::clamp(b[1], 0.0, n2);
    if (p1 * c1 + p2 * c2 <= budget) return {c1, c2};

    const double w1 = params.weights[0] / (p1 * p1);
    const double w2 = params.weights[1] / (p2 * p2);
    const double alpha = w1 / (w1 + w2);
    const double line_opt = alpha * b[0] + (1.0 - alpha) * (budget - p2 * b[1]) / p1;
    const double lo = std::max(0.0, (budget - p2 * n2) / p1);
    const double hi = std::min(n1, budget / p1);
    const double q1 = std::clamp(line_opt, lo, std::max(lo, hi));
    const double q2 = std::clamp((budget - p1 * q1) / p2, 0.0, n2);
    return {q1, q2};
}

std::vector<double> demand(const QuadraticParams& params, const Round& round, const AnswerSpace& space) {
    std::vector<double> prices;
    for (const auto& p : round.prices) prices.push_back(p.to_double());
    return demand(params, round.corner, prices, round.budget.to_double(), space);
}

Answer ideal_grid_answer(const QuadraticParams& params, const AnswerSpace& space) {
    validate(params, space);
    Answer q{std::vector<int>(space.dims())};
    for (std::size_t s = 0; s < space.dims(); ++s)
        q.values[s] = static_cast<int>(std::lround(std::clamp(params.ideal[s], 0.0, static_cast<double>(space.scale(s)))));
    return q;
}

namespace {

/// Highest-scoring affordable grid point. Scores within a relative 1e-9 of the
/// best count as ties and go to the cheaper point, then the lexicographically
/// first. Without the cost rule a maximizer could be strictly revealed
/// preferred to an equally good, cheaper bundle.
Answer best_affordable(const AnswerSpace& space, const Round& round, auto&& score) {
    std::vector<std::size_t> affordable;
    std::vector<double> scores;
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < space.num_points(); ++i) {
        const Answer q = space.point(i);
        if (!budget_contains(q, round)) continue;
        affordable.push_back(i);
        scores.push_back(score(q));
        top = std::max(top, scores.back());
    }
    const double eps = 1e-9 * (1.0 + std::abs(top));
    std::optional<std::size_t> best;
    Rational best_cost;
    for (std::size_t j = 0; j < affordable.size(); ++j) {
        if (scores[j] < top - eps) continue;
        const Rational c = cost(space.point(affordable[j]), round);
        if (!best || c < best_cost) {
            best = affordable[j];
            best_cost = c;
        }
    }
    return space.point(*best); // the corner default is always affordable
}

} // namespace

Dataset simulate_agent(const QuadraticParams& params, const AnswerSpace& space, std::span<const Round> design,
                       double noise_sd, std::uint64_t seed) {
    validate(params, space);
    if (noise_sd < 0.0) throw Error(Errc::invalid_argument, "noise_sd must be non-negative");
    Dataset d;
    d.space = space;
    d.round0 = ideal_grid_answer(params, space);
    for (std::size_t k = 0; k < design.size(); ++k) {
        const Round& round = design[k];
        validate(round, space);
        Answer answer;
        if (noise_sd == 0.0) {
            answer = best_affordable(space, round, [&](const Answer& q) { return params.utility(q); });
        } else {
            std::mt19937_64 rng(derive_seed(seed, k));
            auto target = from_corner_coords(demand(params, round, space), round.corner);
            for (double& t : target) t += noise_sd * standard_normal(rng);
            answer = best_affordable(space, round, [&](const Answer& q) {
                double dist = 0.0;
                for (std::size_t s = 0; s < q.size(); ++s) dist += (q[s] - target[s]) * (q[s] - target[s]);
                return -dist;
            });
        }
        d.observations.push_back({round, std::move(answer)});
    }
    try {
        validate(d);
    } catch (const Error& e) {
        throw Error(Errc::invariant, std::string("infeasible design: ") + e.what());
    }
    return d;
}

std::vector<ContinuousObservation> simulate_agent_continuous(const QuadraticParams& params, const AnswerSpace& space,
                                                             std::span<const Round> design, double noise_sd,
                                                             std::uint64_t seed) {
    validate(params, space);
    if (noise_sd < 0.0) throw Error(Errc::invalid_argument, "noise_sd must be non-negative");
    std::vector<ContinuousObservation> out;
    for (std::size_t k = 0; k < design.size(); ++k) {
        const Round& round = design[k];
        validate(round, space);
        ContinuousObservation obs = to_continuous(Observation{round, space.zero_corner().as_answer()});
        obs.answer = from_corner_coords(demand(params, round, space), round.corner);
        if (noise_sd > 0.0) {
            std::mt19937_64 rng(derive_seed(seed, k));
            for (double& x : obs.answer) x += noise_sd * standard_normal(rng);
        }
        out.push_back(std::move(obs));
    }
    return out;
}

bool is_outlier(double theta, std::span<const double> ideal) {
    constexpr double limit = 15.0;
    if (!(theta > 0.0) || theta > limit || 1.0 / theta > limit) return true;
    for (double b : ideal)
        if (std::abs(b) > limit) return true;
    return false;
}

double residual_sum(std::span<const ContinuousObservation> data, const AnswerSpace& space, double theta, double b1,
                    double b2) {
    const QuadraticParams params{{theta, 1.0}, {b1, b2}};
    double rss = 0.0;
    for (const auto& obs : data) {
        if (!(obs.budget > 0.0)) continue;
        const auto predicted = demand(params, obs.corner, obs.prices, obs.budget, space);
        const auto observed = to_corner_coords(obs.answer, obs.corner);
        for (std::size_t s = 0; s < predicted.size(); ++s)
            rss += (observed[s] - predicted[s]) * (observed[s] - predicted[s]);
    }
    return rss;
}

namespace {

struct Problem {
    std::span<const ContinuousObservation> data;
    const AnswerSpace* space;
};

double objective(const gsl_vector* x, void* raw) {
    const auto* problem = static_cast<const Problem*>(raw);
    const double log_theta = gsl_vector_get(x, 0);
    if (std::abs(log_theta) > 30.0) return std::numeric_limits<double>::max();
    return residual_sum(problem->data, *problem->space, std::exp(log_theta), gsl_vector_get(x, 1),
                        gsl_vector_get(x, 2));
}

struct LocalFit {
    double log_theta = 0.0;
    double b1 = 0.0;
    double b2 = 0.0;
    double rss = std::numeric_limits<double>::infinity();
};

struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};
struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};

LocalFit nelder_mead(const Problem& problem, LocalFit start, const FitOptions& options) {
    // Status codes are checked below; the default GSL handler would abort.
    static const bool handler_off = (gsl_set_error_handler_off(), true);
    (void)handler_off;
    gsl_multimin_function fn{&objective, 3, const_cast<Problem*>(&problem)};
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> minimizer(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3));
    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(3));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(3));

    LocalFit best = start;
    for (int pass = 0; pass <= options.restarts; ++pass) {
        gsl_vector_set(x.get(), 0, best.log_theta);
        gsl_vector_set(x.get(), 1, best.b1);
        gsl_vector_set(x.get(), 2, best.b2);
        const double scale = pass == 0 ? 1.0 : 0.05;
        gsl_vector_set(step.get(), 0, 0.5 * scale);
        gsl_vector_set(step.get(), 1, 1.0 * scale);
        gsl_vector_set(step.get(), 2, 1.0 * scale);
        gsl_multimin_fminimizer_set(minimizer.get(), &fn, x.get(), step.get());
        for (int it = 0; it < options.max_iterations; ++it) {
            if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) break;
            const double size = gsl_multimin_fminimizer_size(minimizer.get());
            if (gsl_multimin_test_size(size, options.tolerance) == GSL_SUCCESS) break;
        }
        const gsl_vector* at = gsl_multimin_fminimizer_x(minimizer.get());
        const double value = gsl_multimin_fminimizer_minimum(minimizer.get());
        if (value <= best.rss)
            best = {gsl_vector_get(at, 0), gsl_vector_get(at, 1), gsl_vector_get(at, 2), value};
    }
    return best;
}

std::vector<LocalFit> start_grid(const AnswerSpace& space, const FitOptions& options) {
    std::vector<LocalFit> starts;
    const int g = std::max(options.grid_points, 1);
    auto lin = [g](double lo, double hi, int i) { return g == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (g - 1); };
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
            for (int k = 0; k < g; ++k)
                starts.push_back({lin(std::log(options.theta_min), std::log(options.theta_max), i),
                                  lin(0.0, space.scale(0), j), lin(0.0, space.scale(1), k),
                                  std::numeric_limits<double>::infinity()});
    return starts;
}

std::vector<ContinuousObservation> usable(std::span<const ContinuousObservation> data, const AnswerSpace& space) {
    if (space.dims() != 2) throw Error(Errc::invalid_argument, "fit supports two-question surveys only");
    std::vector<ContinuousObservation> out;
    for (const auto& obs : data)
        if (obs.budget > 0.0) out.push_back(obs);
    if (out.size() < 3)
        throw Error(Errc::degenerate, "fit needs at least 3 usable observations, got " + std::to_string(out.size()));
    return out;
}

FitResult finish(const std::vector<LocalFit>& fits, std::size_t rounds_used) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < fits.size(); ++i)
        if (fits[i].rss < fits[best].rss) best = i;
    const LocalFit& f = fits[best];
    FitResult result;
    result.theta = std::exp(f.log_theta);
    result.params = QuadraticParams::from_ratio(result.theta, f.b1, f.b2);
    result.rss = f.rss;
    result.rounds_used = rounds_used;
    result.outlier = is_outlier(result.theta, result.params.ideal);
    result.best_start = best;
    return result;
}

} // namespace

FitResult fit(std::span<const ContinuousObservation> data, const AnswerSpace& space, const FitOptions& options) {
    const auto rounds = usable(data, space);
    const Problem problem{rounds, &space};
    auto fits = start_grid(space, options);
    const auto n = static_cast<long long>(fits.size());
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < n; ++i) fits[static_cast<std::size_t>(i)] = nelder_mead(problem, fits[static_cast<std::size_t>(i)], options);
    return finish(fits, rounds.size());
}

FitResult fit(const Dataset& d, const FitOptions& options) {
    bool all_corners = d.size() > 0;
    for (const auto& obs : d.observations) all_corners = all_corners && d.space.is_corner(obs.answer);
    if (all_corners) throw Error(Errc::degenerate, "every answer is a corner of the answer space; not fitted");
    std::vector<ContinuousObservation> data;
    for (const auto& obs : d.observations) data.push_back(to_continuous(obs));
    return fit(data, d.space, options);
}

namespace serial {

FitResult fit(std::span<const ContinuousObservation> data, const AnswerSpace& space, const FitOptions& options) {
    const auto rounds = usable(data, space);
    const Problem problem{rounds, &space};
    auto fits = start_grid(space, options);
    for (auto& f : fits) f = nelder_mead(problem, f, options);
    return finish(fits, rounds.size());
}

} // namespace serial

} // namespace psm
