#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "psm/dataset_io.hpp"
#include "psm/error.hpp"

using namespace psm;
using nlohmann::json;

namespace {

json four_corners_doc() {
    return json::parse(R"({
      "scales": [4, 4], "round0": [3, 2],
      "observations": [
        {"corner": [0, 0], "prices": [[1, 1], [1, 1]], "budget": [2, 1], "answer": [1, 1]},
        {"corner": [4, 0], "prices": [[1, 1], [1, 1]], "budget": [2, 1], "answer": [3, 1]}
      ]})");
}

Errc code_of(const json& doc) {
    try {
        dataset_from_json(doc);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "document accepted: " << doc.dump();
    return Errc::io;
}

} // namespace

TEST(DatasetIo, ParsesDocument) {
    const Dataset d = dataset_from_json(four_corners_doc());
    EXPECT_EQ(d.space, AnswerSpace({4, 4}));
    EXPECT_EQ(d.round0, (Answer{{3, 2}}));
    ASSERT_EQ(d.size(), 2u);
    EXPECT_EQ(d.observations[1].round.corner, (Corner{{4, 0}}));
    EXPECT_EQ(d.observations[1].round.budget, Rational(2));
}

TEST(DatasetIo, FieldOrderIsIrrelevant) {
    json doc = four_corners_doc();
    json reordered = json::object();
    for (auto it = doc.rbegin(); it != doc.rend(); ++it) reordered[it.key()] = it.value();
    EXPECT_EQ(dataset_from_json(doc), dataset_from_json(reordered));
}

TEST(DatasetIo, RejectsUnknownFields) {
    json doc = four_corners_doc();
    doc["comment"] = "x";
    EXPECT_EQ(code_of(doc), Errc::schema);
    doc = four_corners_doc();
    doc["observations"][0]["note"] = 1;
    EXPECT_EQ(code_of(doc), Errc::schema);
}

TEST(DatasetIo, RejectsBadRationals) {
    json doc = four_corners_doc();
    doc["observations"][0]["budget"] = json::array({2, 0});
    EXPECT_EQ(code_of(doc), Errc::schema);
    doc["observations"][0]["budget"] = json::array({2, -1});
    EXPECT_EQ(code_of(doc), Errc::schema);
    doc["observations"][0]["budget"] = 2.5;
    EXPECT_EQ(code_of(doc), Errc::schema);
}

TEST(DatasetIo, RejectsMissingFields) {
    json doc = four_corners_doc();
    doc.erase("round0");
    EXPECT_EQ(code_of(doc), Errc::schema);
}

TEST(DatasetIo, InvariantViolationsSurfaceAfterParsing) {
    json doc = four_corners_doc();
    doc["observations"][0]["answer"] = json::array({2, 1});
    EXPECT_EQ(code_of(doc), Errc::invariant);
}

TEST(DatasetIo, ExcludedRoundsRoundTrip) {
    Dataset d = dataset_from_json(four_corners_doc());
    d.excluded_rounds.push_back(Round{Corner{{4, 4}}, {1, 2}, 0});
    std::istringstream in(save_dataset(d));
    EXPECT_EQ(load_dataset(in), d);
    EXPECT_FALSE(dataset_to_json(dataset_from_json(four_corners_doc())).contains("excluded_rounds"));
}

TEST(DatasetIo, RandomDatasetsRoundTripExactly) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
        const AnswerSpace space = oracle::random_space(rng);
        const Dataset d = oracle::random_dataset(rng, space, 1 + i % 6);
        std::istringstream in(save_dataset(d));
        EXPECT_EQ(load_dataset(in), d);
    }
}

TEST(DatasetIo, LoadsGoldenFiles) {
    EXPECT_EQ(load_dataset_file(std::string(PSM_TEST_DATA) + "/four_corners.json").size(), 4u);
    EXPECT_EQ(load_dataset_file(std::string(PSM_TEST_DATA) + "/two_round_cycle.json").size(), 2u);
    EXPECT_THROW(load_dataset_file(std::string(PSM_TEST_DATA) + "/missing.json"), Error);
}
