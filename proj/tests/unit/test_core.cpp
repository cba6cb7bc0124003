#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "psm/core.hpp"
#include "psm/error.hpp"

using namespace psm;

namespace {

Dataset small_dataset() {
    Dataset d;
    d.space = AnswerSpace({4, 4});
    d.round0 = Answer{{3, 2}};
    d.observations.push_back({Round{Corner{{0, 0}}, {1, 1}, 2}, Answer{{1, 1}}});
    d.observations.push_back({Round{Corner{{4, 0}}, {1, 1}, 2}, Answer{{3, 1}}});
    return d;
}

} // namespace

TEST(AnswerSpace, FlatIndexIsLexicographic) {
    AnswerSpace space({2, 3});
    EXPECT_EQ(space.num_points(), 12u);
    EXPECT_EQ(space.num_corners(), 4u);
    for (std::size_t i = 0; i + 1 < space.num_points(); ++i) EXPECT_LT(space.point(i), space.point(i + 1));
    for (std::size_t i = 0; i < space.num_points(); ++i) EXPECT_EQ(space.index_of(space.point(i)), i);
    EXPECT_EQ(space.point(5), (Answer{{1, 1}}));
}

TEST(AnswerSpace, Corners) {
    AnswerSpace space({4, 7});
    EXPECT_EQ(space.corner(0), (Corner{{0, 0}}));
    EXPECT_EQ(space.corner(1), (Corner{{4, 0}}));
    EXPECT_EQ(space.corner(2), (Corner{{0, 7}}));
    EXPECT_EQ(space.corner(3), (Corner{{4, 7}}));
    EXPECT_EQ(space.opposite(Corner{{4, 0}}), (Corner{{0, 7}}));
    EXPECT_TRUE(space.is_corner(Answer{{4, 7}}));
    EXPECT_FALSE(space.is_corner(Answer{{4, 6}}));
    const auto all = space.corners();
    EXPECT_EQ(std::set<Corner>(all.begin(), all.end()).size(), 4u);
}

TEST(AnswerSpace, RejectsBadScales) {
    EXPECT_THROW(AnswerSpace({0, 3}), Error);
    EXPECT_THROW(AnswerSpace({-1}), Error);
}

TEST(CornerCoords, DistanceFromCorner) {
    AnswerSpace space({10, 10});
    EXPECT_EQ(to_corner_coords(Answer{{2, 7}}, Corner{{0, 10}}, space), (std::vector<int>{2, 3}));
    EXPECT_EQ(to_corner_coords(Answer{{2, 7}}, Corner{{10, 10}}, space), (std::vector<int>{8, 3}));
    EXPECT_THROW(to_corner_coords(Answer{{2, 7}}, Corner{{5, 10}}, space), Error);
    EXPECT_THROW(to_corner_coords(Answer{{2, 11}}, Corner{{0, 0}}, space), Error);
}

TEST(CornerCoords, ContinuousRoundTrip) {
    const std::vector<double> x{2.5, 7.25};
    const Corner c{{10, 0}};
    const auto xc = to_corner_coords(x, c);
    EXPECT_DOUBLE_EQ(xc[0], 7.5);
    EXPECT_DOUBLE_EQ(xc[1], 7.25);
    const auto back = from_corner_coords(xc, c);
    EXPECT_DOUBLE_EQ(back[0], 2.5);
    EXPECT_DOUBLE_EQ(back[1], 7.25);
}

TEST(Cost, MeasuredInTheRoundCorner) {
    Round r{Corner{{0, 10}}, {Rational(1), Rational(2)}, Rational(20)};
    EXPECT_EQ(cost(Answer{{4, 3}}, r), Rational(4 + 2 * 7));
    EXPECT_TRUE(budget_contains(Answer{{4, 3}}, r));
    EXPECT_FALSE(budget_contains(Answer{{5, 2}}, r));
    EXPECT_EQ(cost(Answer{{0, 10}}, r), Rational(0));
}

TEST(Cost, MatchesOracleOnRandomRounds) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
        const AnswerSpace space = oracle::random_space(rng);
        const Answer q0 = oracle::random_point(rng, space);
        if (space.is_corner(q0)) continue;
        const Round r = oracle::random_round(rng, space, q0);
        const Answer q = oracle::random_point(rng, space);
        EXPECT_EQ(to_big(cost(q, r)), oracle::spend(r, q));
    }
}

TEST(Validate, AcceptsWellFormedDataset) { EXPECT_NO_THROW(validate(small_dataset())); }

TEST(Validate, ReportsObservationAndInvariant) {
    Dataset d = small_dataset();
    d.observations[1].answer = Answer{{0, 2}}; // costs 4 + 2 from corner (4,0)
    try {
        validate(d);
        FAIL() << "expected invariant error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invariant);
        EXPECT_NE(std::string(e.what()).find("observation 2"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("budget"), std::string::npos) << e.what();
    }
}

TEST(Validate, Round0MustBeUnaffordable) {
    Dataset d = small_dataset();
    d.round0 = Answer{{1, 0}};
    try {
        validate(d);
        FAIL() << "expected invariant error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::invariant);
        EXPECT_NE(std::string(e.what()).find("observation 1"), std::string::npos) << e.what();
    }
}

TEST(Validate, RejectsStructuralErrors) {
    Dataset d = small_dataset();
    d.observations[0].round.corner = Corner{{1, 0}};
    EXPECT_THROW(validate(d), Error);

    d = small_dataset();
    d.observations[0].round.prices = {Rational(1)};
    EXPECT_THROW(validate(d), Error);

    d = small_dataset();
    d.observations[0].round.prices[0] = Rational(0);
    EXPECT_THROW(validate(d), Error);

    d = small_dataset();
    d.observations[0].answer = Answer{{1, 5}};
    EXPECT_THROW(validate(d), Error);
}

TEST(Validate, RandomDatasetsFromTheOracleGeneratorAreValid) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 100; ++i) {
        const AnswerSpace space = oracle::random_space(rng);
        EXPECT_NO_THROW(validate(oracle::random_dataset(rng, space, 5)));
    }
}
