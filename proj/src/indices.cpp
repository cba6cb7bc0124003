#include "psm/indices.hpp"

#include <algorithm>
#include <random>

#include "psm/error.hpp"
#include "psm/random.hpp"

namespace psm {

bool check_garp_e(const Dataset& d, const Rational& e, StrictRelation strict) {
    if (e < Rational(0) || e > Rational(1)) throw Error(Errc::invalid_argument, "efficiency level must lie in [0, 1]");
    return check_garp(ExpenditureTable(d), e, strict).satisfied;
}

namespace {

bool holds(const ExpenditureTable& table, const Rational& e, StrictRelation strict) {
    return check_garp(table, e, strict).satisfied;
}

// Relations only change where e * spend(k,k) crosses spend(k,l), so the
// failure set {e : GARP_e fails} is [t, 1] or (t, 1] for one of these ratios.
std::vector<Rational> critical_ratios(const ExpenditureTable& table) {
    std::vector<Rational> out;
    for (std::size_t k = 0; k < table.size(); ++k) {
        const Rational& own = table.spend(k, k);
        if (!own.is_positive()) continue;
        for (std::size_t l = 0; l < table.size(); ++l) {
            const Rational ratio = table.spend(k, l) / own;
            if (ratio <= Rational(1)) out.push_back(ratio);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

CceiResult ccei(const Dataset& d, const Rational& tolerance, int max_iterations, StrictRelation strict) {
    if (!tolerance.is_positive()) throw Error(Errc::invalid_argument, "ccei tolerance must be positive");
    const ExpenditureTable table(d);
    CceiResult result;
    result.tolerance = tolerance;
    if (holds(table, Rational(1), strict)) {
        result.e_star = Rational(1);
        return result;
    }

    Rational lo(0);
    Rational hi(1);
    if (!holds(table, lo, strict)) {
        // Only reachable under the literal equal-bundle convention.
        result.e_star = lo;
        result.threshold = lo;
        result.supremum_only = true;
        return result;
    }
    while (hi - lo > tolerance && result.iterations < max_iterations) {
        const Rational mid = (lo + hi) / Rational(2);
        if (holds(table, mid, strict))
            lo = mid;
        else
            hi = mid;
        ++result.iterations;
    }
    result.e_star = lo;

    const auto ratios = critical_ratios(table);
    for (std::size_t i = 0; i < ratios.size(); ++i) {
        const Rational& c = ratios[i];
        if (c < lo || c > hi) continue;
        if (!holds(table, c, strict)) {
            result.threshold = c;
            result.supremum_only = true;
            break;
        }
        const Rational above = i + 1 < ratios.size() ? (c + std::min(ratios[i + 1], hi)) / Rational(2)
                                                     : (c + hi) / Rational(2);
        if (above > c && !holds(table, above, strict)) {
            result.threshold = c;
            break;
        }
    }
    return result;
}

std::vector<std::vector<Answer>> near_frontier_sets(std::span<const Round> design, const AnswerSpace& space) {
    std::vector<std::vector<Answer>> sets(design.size());
    for (std::size_t k = 0; k < design.size(); ++k) {
        const Round& round = design[k];
        validate(round, space);
        const Rational step = *std::min_element(round.prices.begin(), round.prices.end());
        const Rational floor = round.budget - step;
        for (std::size_t i = 0; i < space.num_points(); ++i) {
            Answer q = space.point(i);
            const Rational c = cost(q, round);
            if (c > floor && c <= round.budget) sets[k].push_back(std::move(q));
        }
        if (sets[k].empty())
            throw Error(Errc::degenerate, "round " + std::to_string(k + 1) + " has an empty near-frontier set");
    }
    return sets;
}

namespace {

bool trial_violates(std::span<const Round> design, const std::vector<std::vector<Answer>>& sets, std::uint64_t seed,
                    std::size_t trial) {
    std::mt19937_64 rng(derive_seed(seed, trial));
    std::vector<Answer> answers;
    answers.reserve(design.size());
    for (const auto& set : sets) answers.push_back(set[uniform_index(rng, set.size())]);
    return !check_garp(ExpenditureTable(design, answers)).satisfied;
}

void check_trials(std::size_t trials) {
    if (trials == 0) throw Error(Errc::invalid_argument, "bronars power needs at least one trial");
}

} // namespace

BronarsResult bronars_power(std::span<const Round> design, const AnswerSpace& space, std::size_t trials,
                            std::uint64_t seed) {
    check_trials(trials);
    const auto sets = near_frontier_sets(design, space);
    const auto n = static_cast<long long>(trials);
    std::size_t violating = 0;
#pragma omp parallel for reduction(+ : violating) schedule(static)
    for (long long t = 0; t < n; ++t)
        if (trial_violates(design, sets, seed, static_cast<std::size_t>(t))) ++violating;
    return {static_cast<double>(violating) / static_cast<double>(trials), trials, violating, seed};
}

namespace serial {

BronarsResult bronars_power(std::span<const Round> design, const AnswerSpace& space, std::size_t trials,
                            std::uint64_t seed) {
    check_trials(trials);
    const auto sets = near_frontier_sets(design, space);
    std::size_t violating = 0;
    for (std::size_t t = 0; t < trials; ++t)
        if (trial_violates(design, sets, seed, t)) ++violating;
    return {static_cast<double>(violating) / static_cast<double>(trials), trials, violating, seed};
}

} // namespace serial

} // namespace psm
