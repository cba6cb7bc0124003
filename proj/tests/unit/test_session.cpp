#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "psm/dataset_io.hpp"
#include "psm/random.hpp"
#include "psm/session.hpp"

using namespace psm;

namespace {

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return Errc::io;
}

/// Answers every remaining round with its corner default.
void answer_defaults(SessionState& s) {
    while (auto idx = s.current_round()) s.submit(*idx, s.rounds()[*idx - 1].round.corner.as_answer());
}

} // namespace

TEST(SessionConfig, DefaultsAndJsonRoundTrip) {
    const SessionConfig config;
    EXPECT_EQ(config.total_rounds(), 8u);
    EXPECT_EQ(config_from_json(config_to_json(config)), config);
    EXPECT_EQ(config_from_json(nlohmann::json::object()), config);
    EXPECT_EQ(config_from_json(nullptr), config);
}

TEST(SessionConfig, OverridesAndValidation) {
    const auto c = config_from_json(nlohmann::json::parse(
        R"({"scales":[4,6,3],"rounds_per_corner":1,"price_vectors":[[1,[1,2],3]],"budget_slack":[1,2]})"));
    EXPECT_EQ(c.space, AnswerSpace({4, 6, 3}));
    EXPECT_EQ(c.total_rounds(), 8u);
    EXPECT_EQ(c.price_vectors[0][1], Rational(1, 2));
    EXPECT_EQ(c.budget_slack, Rational(1, 2));

    EXPECT_EQ(code_of([] { config_from_json(nlohmann::json::parse(R"({"budget_slack":0})")); }),
              Errc::invalid_argument);
    EXPECT_EQ(code_of([] { config_from_json(nlohmann::json::parse(R"({"price_vectors":[[1]]})")); }),
              Errc::invalid_argument);
    EXPECT_EQ(code_of([] { config_from_json(nlohmann::json::parse(R"({"rounds_per_corner":0})")); }),
              Errc::invalid_argument);
    EXPECT_EQ(code_of([] { config_from_json(nlohmann::json::parse(R"({"colour":"red"})")); }),
              Errc::invalid_argument);
}

TEST(GenerateRounds, BudgetsSitTwoTokensBelowRound0) {
    SessionConfig config;
    const Answer q0{{7, 3}};
    const auto rounds = generate_rounds(config, q0);
    ASSERT_EQ(rounds.size(), 8u);
    std::map<Corner, int> per_corner;
    for (const auto& g : rounds) {
        ++per_corner[g.round.corner];
        EXPECT_FALSE(g.excluded);
        EXPECT_EQ(cost(q0, g.round), g.round.budget + Rational(2));
    }
    EXPECT_EQ(per_corner.size(), 4u);
    for (const auto& [c, n] : per_corner) EXPECT_EQ(n, 2);
}

TEST(GenerateRounds, PriceVectorsCyclePerCorner) {
    SessionConfig config;
    config.rounds_per_corner = 3;
    const auto rounds = generate_rounds(config, Answer{{5, 5}});
    std::map<Corner, std::vector<std::vector<Rational>>> seen;
    for (const auto& g : rounds) seen[g.round.corner].push_back(g.round.prices);
    for (auto& [c, prices] : seen) {
        std::sort(prices.begin(), prices.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });
        EXPECT_EQ(prices[0], (std::vector<Rational>{1, 2}));
        EXPECT_EQ(prices[1], (std::vector<Rational>{1, 2}));
        EXPECT_EQ(prices[2], (std::vector<Rational>{2, 1}));
    }
}

TEST(GenerateRounds, ShuffleIsSeeded) {
    SessionConfig a, b;
    a.shuffle_seed = b.shuffle_seed = 17;
    EXPECT_EQ(generate_rounds(a, Answer{{4, 6}}), generate_rounds(b, Answer{{4, 6}}));
    bool differs = false;
    for (std::uint64_t seed = 18; seed < 30 && !differs; ++seed) {
        b.shuffle_seed = seed;
        differs = generate_rounds(a, Answer{{4, 6}}) != generate_rounds(b, Answer{{4, 6}});
    }
    EXPECT_TRUE(differs);
}

TEST(GenerateRounds, NearCornerRound0ExcludesRounds) {
    SessionConfig config;
    // From corner (0,0): price (1,2) gives 1 + 0 = 1 <= 2, price (2,1) gives 2 <= 2.
    const auto rounds = generate_rounds(config, Answer{{1, 0}});
    int excluded = 0;
    for (const auto& g : rounds) {
        const Rational c = cost(Answer{{1, 0}}, g.round);
        EXPECT_EQ(g.excluded, c <= Rational(2));
        if (g.excluded) {
            ++excluded;
            EXPECT_EQ(g.round.budget, Rational(0));
            EXPECT_EQ(g.round.corner, (Corner{{0, 0}}));
        }
    }
    EXPECT_EQ(excluded, 2);
}

TEST(GenerateRounds, ExclusionIffCostAtMostSlackOnRandomRound0) {
    std::mt19937_64 rng(1000);
    SessionConfig config;
    for (int i = 0; i < 1000; ++i) {
        const Answer q0{{static_cast<int>(uniform_index(rng, 11)), static_cast<int>(uniform_index(rng, 11))}};
        config.shuffle_seed = rng();
        for (const auto& g : generate_rounds(config, q0)) {
            // Recompute the undiscounted cost independently of the round's budget.
            int c = 0;
            for (std::size_t s = 0; s < 2; ++s)
                c += static_cast<int>(g.round.prices[s].num()) * std::abs(q0[s] - g.round.corner[s]);
            EXPECT_EQ(g.excluded, c <= 2);
            if (!g.excluded) EXPECT_EQ(cost(q0, g.round), g.round.budget + Rational(2));
        }
    }
}

TEST(SessionState, WalkthroughProducesDataset) {
    SessionConfig config;
    config.shuffle_seed = 3;
    SessionState s(config);
    EXPECT_EQ(s.status(), SessionStatus::awaiting_round0);
    EXPECT_EQ(s.current_round(), 0u);
    EXPECT_EQ(code_of([&] { s.to_dataset(); }), Errc::incomplete);

    s.submit(0, Answer{{6, 4}});
    EXPECT_EQ(s.status(), SessionStatus::in_progress);
    EXPECT_EQ(s.current_round(), 1u);
    answer_defaults(s);
    EXPECT_EQ(s.status(), SessionStatus::complete);
    EXPECT_FALSE(s.current_round().has_value());

    const Dataset d = s.to_dataset();
    EXPECT_EQ(d.size(), 8u);
    EXPECT_EQ(d.round0, (Answer{{6, 4}}));
    EXPECT_NO_THROW(validate(d));
    EXPECT_EQ(code_of([&] { s.submit(9, Answer{{0, 0}}); }), Errc::session_complete);
}

TEST(SessionState, RejectsOutOfOrderAndOffGrid) {
    SessionState s(SessionConfig{});
    EXPECT_EQ(code_of([&] { s.submit(1, Answer{{0, 0}}); }), Errc::wrong_round);
    EXPECT_EQ(code_of([&] { s.submit(0, Answer{{11, 0}}); }), Errc::out_of_range);
    EXPECT_EQ(code_of([&] { s.submit(0, Answer{{1}}); }), Errc::out_of_range);
    s.submit(0, Answer{{5, 5}});
    EXPECT_EQ(code_of([&] { s.submit(0, Answer{{5, 5}}); }), Errc::wrong_round);
    EXPECT_EQ(code_of([&] { s.submit(2, Answer{{5, 5}}); }), Errc::wrong_round);
}

TEST(SessionState, OverBudgetReportsShortfall) {
    SessionState s(SessionConfig{});
    s.submit(0, Answer{{5, 5}});
    const Round& r = s.rounds()[0].round;
    // The round-0 answer itself is always two tokens over.
    try {
        s.submit(1, Answer{{5, 5}});
        FAIL();
    } catch (const OverBudget& e) {
        EXPECT_EQ(e.code(), Errc::over_budget);
        EXPECT_EQ(e.shortfall(), Rational(2));
    }
    EXPECT_EQ(s.current_round(), 1u); // rejected answers do not advance
    s.submit(1, r.corner.as_answer());
    EXPECT_EQ(s.current_round(), 2u);
}

TEST(SessionState, ExcludedRoundsAreSkippedAndExported) {
    SessionConfig config;
    config.shuffle_seed = 9;
    SessionState s(config);
    s.submit(0, Answer{{0, 1}});
    std::size_t excluded = 0;
    for (const auto& g : s.rounds()) excluded += g.excluded ? 1 : 0;
    ASSERT_GT(excluded, 0u);
    std::size_t visited = 0;
    while (auto idx = s.current_round()) {
        EXPECT_FALSE(s.rounds()[*idx - 1].excluded);
        s.submit(*idx, s.rounds()[*idx - 1].round.corner.as_answer());
        ++visited;
    }
    EXPECT_EQ(visited, 8 - excluded);
    const Dataset d = s.to_dataset();
    EXPECT_EQ(d.size(), 8 - excluded);
    EXPECT_EQ(d.excluded_rounds.size(), excluded);
    std::istringstream in(save_dataset(d));
    EXPECT_EQ(load_dataset(in), d);
}

TEST(SessionState, ValueSemantics) {
    SessionState a(SessionConfig{});
    a.submit(0, Answer{{3, 3}});
    SessionState b = a;
    EXPECT_EQ(a, b);
    answer_defaults(b);
    EXPECT_NE(a, b);
    EXPECT_EQ(a.status(), SessionStatus::in_progress);
}
