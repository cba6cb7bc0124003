#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "psm/core.hpp"
#include "psm/revealed.hpp"

namespace psm {

/// GARP at efficiency level e: expenditures on the chosen side of every
/// comparison are deflated by e. Monotone: holding at e implies holding below.
bool check_garp_e(const Dataset& d, const Rational& e, StrictRelation strict = StrictRelation::expenditure_only);

struct CceiResult {
    Rational e_star;               ///< largest tested level where GARP_e held
    int iterations = 0;            ///< bisection steps taken
    Rational tolerance;            ///< requested bracket width
    std::optional<Rational> threshold; ///< exact critical level inf{e : GARP_e fails}, if GARP fails
    bool supremum_only = false;    ///< GARP_e fails at the threshold itself (max not attained)
};

inline const Rational kDefaultCceiTolerance{1, 1000000};
constexpr int kDefaultCceiIterations = 50;

/// Afriat's critical cost efficiency index by bisection on [0, 1].
/// Returns exactly 1 when the data satisfy GARP.
CceiResult ccei(const Dataset& d, const Rational& tolerance = kDefaultCceiTolerance,
                int max_iterations = kDefaultCceiIterations,
                StrictRelation strict = StrictRelation::expenditure_only);

struct BronarsResult {
    double power = 0.0;
    std::size_t trials = 0;
    std::size_t violating = 0;
    std::uint64_t seed = 0;
};

/// Name of the synthetic-choice scheme, serialized alongside every result.
constexpr std::string_view kBronarsSampling = "near_frontier_uniform";

/// Grid answers with R - min_s p_s < cost(q) <= R for each round: the budget
/// line thickened by one cheapest step. Throws Errc::degenerate if any set is empty.
std::vector<std::vector<Answer>> near_frontier_sets(std::span<const Round> design, const AnswerSpace& space);

/// Fraction of uniformly random near-frontier choice profiles violating GARP.
/// Trial t draws from its own stream derive_seed(seed, t), so the OpenMP
/// result is identical to the serial one.
BronarsResult bronars_power(std::span<const Round> design, const AnswerSpace& space, std::size_t trials,
                            std::uint64_t seed);

namespace serial {
BronarsResult bronars_power(std::span<const Round> design, const AnswerSpace& space, std::size_t trials,
                            std::uint64_t seed);
} // namespace serial

} // namespace psm
