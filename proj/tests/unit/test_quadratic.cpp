#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "psm/indices.hpp"
#include "psm/quadratic.hpp"
#include "psm/random.hpp"
#include "psm/revealed.hpp"
#include "psm/session.hpp"

using namespace psm;

namespace {

const AnswerSpace kSpace({10, 10});

/// Best point on the feasible part of the budget line by dense search, in
/// corner coordinates; only valid when the clamped ideal point is unaffordable.
std::vector<double> line_search(const QuadraticParams& params, const Corner& c, double p1, double p2, double budget) {
    const auto b = to_corner_coords(params.ideal, c);
    const double lo = std::max(0.0, (budget - p2 * 10.0) / p1);
    const double hi = std::min(10.0, budget / p1);
    double best_u = -INFINITY;
    std::vector<double> best;
    const int steps = 200000;
    for (int i = 0; i <= steps; ++i) {
        const double q1 = lo + (hi - lo) * i / steps;
        const double q2 = (budget - p1 * q1) / p2;
        const double u =
            -0.5 * params.weights[0] * (q1 - b[0]) * (q1 - b[0]) - 0.5 * params.weights[1] * (q2 - b[1]) * (q2 - b[1]);
        if (u > best_u) {
            best_u = u;
            best = {q1, q2};
        }
    }
    return best;
}

std::vector<Round> session_design(const QuadraticParams& params, std::uint64_t seed) {
    SessionConfig config;
    config.shuffle_seed = seed;
    std::vector<Round> design;
    for (const auto& g : generate_rounds(config, ideal_grid_answer(params, kSpace)))
        if (!g.excluded) design.push_back(g.round);
    return design;
}

} // namespace

TEST(Demand, WorkedExample) {
    // a = (1,1), p = (1,2), R = 13, b = (5,5): q = (4.6, 4.2) with multiplier 0.4.
    const QuadraticParams params{{1.0, 1.0}, {5.0, 5.0}};
    const std::vector<double> p{1.0, 2.0};
    const auto q = demand(params, Corner{{0, 0}}, p, 13.0, kSpace);
    EXPECT_NEAR(q[0], 4.6, 1e-12);
    EXPECT_NEAR(q[1], 4.2, 1e-12);
    EXPECT_NEAR(p[0] * q[0] + p[1] * q[1], 13.0, 1e-12);
    // First-order conditions a_s (b_s - q_s) = lambda p_s.
    EXPECT_NEAR(params.weights[0] * (5.0 - q[0]) / p[0], 0.4, 1e-12);
    EXPECT_NEAR(params.weights[1] * (5.0 - q[1]) / p[1], 0.4, 1e-12);
}

TEST(Demand, AffordableIdealIsChosen) {
    const QuadraticParams params{{1.0, 3.0}, {2.0, 3.0}};
    const std::vector<double> p{1.0, 1.0};
    const auto q = demand(params, Corner{{0, 0}}, p, 6.0, kSpace);
    EXPECT_DOUBLE_EQ(q[0], 2.0);
    EXPECT_DOUBLE_EQ(q[1], 3.0);
}

TEST(Demand, IdealOutsideTheBoxIsClamped) {
    const QuadraticParams params{{1.0, 1.0}, {12.0, -3.0}};
    const std::vector<double> p{1.0, 1.0};
    const auto q = demand(params, Corner{{0, 0}}, p, 30.0, kSpace);
    EXPECT_DOUBLE_EQ(q[0], 10.0);
    EXPECT_DOUBLE_EQ(q[1], 0.0);
}

TEST(Demand, MatchesDenseLineSearchInEveryCorner) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 200; ++i) {
        const QuadraticParams params{{uniform(rng, 0.2, 3.0), uniform(rng, 0.2, 3.0)},
                                     {uniform(rng, 0.5, 9.5), uniform(rng, 0.5, 9.5)}};
        const Corner c = kSpace.corner(uniform_index(rng, 4));
        const double p1 = uniform(rng, 0.5, 3.0), p2 = uniform(rng, 0.5, 3.0);
        const auto b = to_corner_coords(params.ideal, c);
        const double ideal_cost = p1 * b[0] + p2 * b[1];
        const double budget = ideal_cost * uniform(rng, 0.05, 0.95);
        const std::vector<double> p{p1, p2};
        const auto q = demand(params, c, p, budget, kSpace);
        const auto ref = line_search(params, c, p1, p2, budget);
        EXPECT_NEAR(q[0], ref[0], 1e-3) << i;
        EXPECT_NEAR(q[1], ref[1], 1e-3) << i;
        EXPECT_NEAR(p1 * q[0] + p2 * q[1], budget, 1e-9);
    }
}

TEST(Demand, RejectsBadInput) {
    const QuadraticParams params{{1.0, 1.0}, {5.0, 5.0}};
    const std::vector<double> p{1.0, 0.0};
    EXPECT_THROW(demand(params, Corner{{0, 0}}, p, 3.0, kSpace), Error);
    const QuadraticParams bad{{-1.0, 1.0}, {5.0, 5.0}};
    const std::vector<double> ok{1.0, 1.0};
    EXPECT_THROW(demand(bad, Corner{{0, 0}}, ok, 3.0, kSpace), Error);
    EXPECT_THROW(demand(params, Corner{{0, 0}}, ok, 3.0, AnswerSpace({10, 10, 10})), Error);
}

TEST(Simulate, NoiselessAgentsSatisfyGarp) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        const auto params = QuadraticParams::from_ratio(std::exp(uniform(rng, std::log(0.2), std::log(5.0))),
                                                        uniform(rng, 1.0, 9.0), uniform(rng, 1.0, 9.0));
        const Dataset d = simulate_agent(params, kSpace, session_design(params, i), 0.0, i);
        EXPECT_TRUE(check_garp(d).satisfied);
        EXPECT_EQ(ccei(d).e_star, Rational(1));
    }
}

TEST(Simulate, TiesGoToTheCheaperBundle) {
    // Integer ideal point on the grid, all budgets binding: with equal weights
    // (3,4) and (4,3) can tie from (5,5); the cheaper one must be chosen.
    const QuadraticParams params{{1.0, 1.0}, {5.0, 5.0}};
    const std::vector<Round> design{Round{Corner{{0, 0}}, {1, 2}, 11}};
    const Dataset d = simulate_agent(params, kSpace, design, 0.0, 1);
    const Answer& a = d.observations[0].answer;
    for (std::size_t i = 0; i < kSpace.num_points(); ++i) {
        const Answer q = kSpace.point(i);
        if (!budget_contains(q, design[0])) continue;
        EXPECT_LE(params.utility(q), params.utility(a) + 1e-12);
        if (std::abs(params.utility(q) - params.utility(a)) < 1e-12) EXPECT_GE(cost(q, design[0]), cost(a, design[0]));
    }
}

TEST(Simulate, DeterministicGivenSeed) {
    const auto params = QuadraticParams::from_ratio(2.0, 4.0, 6.0);
    const auto design = session_design(params, 1);
    EXPECT_EQ(simulate_agent(params, kSpace, design, 1.5, 77), simulate_agent(params, kSpace, design, 1.5, 77));
    EXPECT_NE(simulate_agent(params, kSpace, design, 1.5, 77), simulate_agent(params, kSpace, design, 1.5, 78));
}

TEST(Simulate, AffordableRound0IsInfeasible) {
    const auto params = QuadraticParams::from_ratio(1.0, 5.0, 5.0);
    const std::vector<Round> design{Round{Corner{{0, 0}}, {1, 1}, 12}};
    try {
        simulate_agent(params, kSpace, design, 0.0, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invariant);
    }
}

TEST(Outlier, Rule) {
    const std::vector<double> moderate{7.8, 6.4};
    EXPECT_FALSE(is_outlier(1.0, moderate));
    const std::vector<double> interior{5.0, 5.0};
    EXPECT_FALSE(is_outlier(15.0, interior));
    EXPECT_TRUE(is_outlier(15.5, interior));
    EXPECT_TRUE(is_outlier(1.0 / 15.5, interior));
    const std::vector<double> far{-15.5, 2.0};
    EXPECT_TRUE(is_outlier(1.0, far));
}

TEST(Fit, RecoversOffGridParameters) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 5; ++i) {
        const double theta = std::exp(uniform(rng, std::log(0.2), std::log(5.0)));
        const auto truth = QuadraticParams::from_ratio(theta, uniform(rng, 2.0, 8.0), uniform(rng, 2.0, 8.0));
        const auto data = simulate_agent_continuous(truth, kSpace, session_design(truth, i), 0.0, 0);
        const FitResult r = fit(data, kSpace);
        EXPECT_NEAR(r.theta / theta, 1.0, 1e-3);
        EXPECT_NEAR(r.params.ideal[0], truth.ideal[0], 1e-3);
        EXPECT_NEAR(r.params.ideal[1], truth.ideal[1], 1e-3);
        EXPECT_NEAR(r.params.weights[0] + r.params.weights[1], 2.0, 1e-12);
        EXPECT_LT(r.rss, 1e-8);
        EXPECT_FALSE(r.outlier);
    }
}

TEST(Fit, SerialAndParallelAgree) {
    const auto truth = QuadraticParams::from_ratio(0.7, 3.3, 6.1);
    const auto data = simulate_agent_continuous(truth, kSpace, session_design(truth, 4), 0.3, 12);
    const FitResult a = fit(data, kSpace);
    const FitResult b = serial::fit(data, kSpace);
    EXPECT_EQ(a.best_start, b.best_start);
    EXPECT_DOUBLE_EQ(a.rss, b.rss);
    EXPECT_DOUBLE_EQ(a.theta, b.theta);
}

TEST(Fit, ResidualSumIsZeroAtTheTruth) {
    const auto truth = QuadraticParams::from_ratio(2.5, 3.0, 7.0);
    const auto data = simulate_agent_continuous(truth, kSpace, session_design(truth, 2), 0.0, 0);
    EXPECT_NEAR(residual_sum(data, kSpace, 2.5, 3.0, 7.0), 0.0, 1e-20);
    EXPECT_GT(residual_sum(data, kSpace, 1.0, 3.0, 7.0), 1e-6);
}

TEST(Fit, DegenerateInputs) {
    const auto truth = QuadraticParams::from_ratio(1.0, 5.0, 5.0);
    auto data = simulate_agent_continuous(truth, kSpace, session_design(truth, 0), 0.0, 0);
    data.resize(2);
    try {
        fit(data, kSpace);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::degenerate);
    }

    Dataset corners;
    corners.space = kSpace;
    corners.round0 = Answer{{5, 5}};
    for (int i = 0; i < 4; ++i) corners.observations.push_back({Round{Corner{{0, 0}}, {1, 1}, 9}, Answer{{0, 0}}});
    try {
        fit(corners);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::degenerate);
    }
}
