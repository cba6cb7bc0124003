#include "psm/session.hpp"

#include <random>

#include "psm/dataset_io.hpp"
#include "psm/random.hpp"

namespace psm {

using nlohmann::json;

void validate(const SessionConfig& config) {
    if (config.space.dims() == 0) throw Error(Errc::invalid_argument, "answer space is empty");
    if (config.rounds_per_corner < 1) throw Error(Errc::invalid_argument, "rounds_per_corner must be >= 1");
    if (config.price_vectors.empty()) throw Error(Errc::invalid_argument, "at least one price vector is required");
    for (const auto& prices : config.price_vectors) {
        if (prices.size() != config.space.dims())
            throw Error(Errc::invalid_argument, "price vector length must equal the number of questions");
        for (const auto& p : prices)
            if (!p.is_positive()) throw Error(Errc::invalid_argument, "prices must be strictly positive");
    }
    // A zero slack would leave round0 affordable, contradicting the design.
    if (!config.budget_slack.is_positive()) throw Error(Errc::invalid_argument, "budget_slack must be positive");
}

json config_to_json(const SessionConfig& config) {
    json prices = json::array();
    for (const auto& vec : config.price_vectors) {
        json row = json::array();
        for (const auto& p : vec) row.push_back(rational_to_json(p));
        prices.push_back(std::move(row));
    }
    return json{{"scales", std::vector<int>(config.space.scales().begin(), config.space.scales().end())},
                {"rounds_per_corner", config.rounds_per_corner},
                {"price_vectors", std::move(prices)},
                {"budget_slack", rational_to_json(config.budget_slack)},
                {"shuffle_seed", config.shuffle_seed}};
}

SessionConfig config_from_json(const json& overrides) {
    SessionConfig config;
    if (overrides.is_null()) return config;
    if (!overrides.is_object()) throw Error(Errc::invalid_argument, "config overrides must be an object");
    auto fail = [](const std::string& what) { throw Error(Errc::invalid_argument, "config: " + what); };
    for (const auto& item : overrides.items()) {
        const auto& key = item.key();
        const auto& v = item.value();
        if (key == "scales") {
            if (!v.is_array()) fail("scales must be an array of integers");
            std::vector<int> scales;
            for (const auto& n : v) {
                if (!n.is_number_integer()) fail("scales must be an array of integers");
                scales.push_back(n.get<int>());
            }
            config.space = AnswerSpace(std::move(scales));
        } else if (key == "rounds_per_corner") {
            if (!v.is_number_integer()) fail("rounds_per_corner must be an integer");
            config.rounds_per_corner = v.get<int>();
        } else if (key == "price_vectors") {
            if (!v.is_array()) fail("price_vectors must be an array");
            config.price_vectors.clear();
            for (const auto& row : v) {
                if (!row.is_array()) fail("each price vector must be an array");
                std::vector<Rational> prices;
                for (const auto& p : row)
                    prices.push_back(p.is_number_integer() ? Rational(p.get<std::int64_t>())
                                                           : rational_from_json(p, "price_vectors"));
                config.price_vectors.push_back(std::move(prices));
            }
        } else if (key == "budget_slack") {
            config.budget_slack =
                v.is_number_integer() ? Rational(v.get<std::int64_t>()) : rational_from_json(v, "budget_slack");
        } else if (key == "shuffle_seed") {
            if (!v.is_number_unsigned() && !v.is_number_integer()) fail("shuffle_seed must be an integer");
            config.shuffle_seed = v.get<std::uint64_t>();
        } else {
            fail("unknown field \"" + key + "\"");
        }
    }
    try {
        validate(config);
    } catch (const Error& e) {
        throw Error(Errc::invalid_argument, std::string("config: ") + e.what());
    }
    return config;
}

std::vector<GeneratedRound> generate_rounds(const SessionConfig& config, const Answer& q0) {
    validate(config);
    if (!config.space.contains(q0)) throw Error(Errc::out_of_range, "round0 answer outside the answer space");
    std::vector<GeneratedRound> rounds;
    for (const Corner& corner : config.space.corners())
        for (int r = 0; r < config.rounds_per_corner; ++r) {
            Round round{corner, config.price_vectors[static_cast<std::size_t>(r) % config.price_vectors.size()], {}};
            const Rational spend = cost(q0, round);
            GeneratedRound g;
            g.excluded = spend <= config.budget_slack;
            round.budget = g.excluded ? Rational(0) : spend - config.budget_slack;
            g.round = std::move(round);
            rounds.push_back(std::move(g));
        }
    std::mt19937_64 rng(config.shuffle_seed);
    shuffle(rounds, rng);
    return rounds;
}

std::string_view to_string(SessionStatus status) {
    switch (status) {
    case SessionStatus::awaiting_round0: return "awaiting_round0";
    case SessionStatus::in_progress: return "in_progress";
    case SessionStatus::complete: return "complete";
    }
    return "unknown";
}

SessionState::SessionState(SessionConfig config) : config_(std::move(config)) { validate(config_); }

std::optional<std::size_t> SessionState::current_round() const {
    if (status_ == SessionStatus::complete) return std::nullopt;
    return next_;
}

void SessionState::advance() {
    while (next_ <= rounds_.size() && next_ >= 1 && rounds_[next_ - 1].excluded) ++next_;
    if (next_ > rounds_.size()) status_ = SessionStatus::complete;
}

void SessionState::submit(std::size_t round_index, const Answer& answer) {
    if (status_ == SessionStatus::complete) throw Error(Errc::session_complete, "session already complete");
    if (round_index != next_)
        throw Error(Errc::wrong_round,
                    "round " + std::to_string(round_index) + " submitted; expected round " + std::to_string(next_));
    if (!config_.space.contains(answer))
        throw Error(Errc::out_of_range, "answer " + to_string(answer) + " outside the answer space");

    if (round_index == 0) {
        auto rounds = generate_rounds(config_, answer);
        round0_ = answer;
        rounds_ = std::move(rounds);
        submissions_.assign(rounds_.size(), std::nullopt);
        status_ = SessionStatus::in_progress;
    } else {
        const Round& round = rounds_[round_index - 1].round;
        const Rational spend = cost(answer, round);
        if (spend > round.budget)
            throw OverBudget(spend - round.budget, "answer costs " + spend.to_string() + " tokens, budget is " +
                                                       round.budget.to_string());
        submissions_[round_index - 1] = answer;
    }
    ++next_;
    advance();
}

Dataset SessionState::to_dataset() const {
    if (status_ != SessionStatus::complete) throw Error(Errc::incomplete, "session is not complete");
    Dataset d;
    d.space = config_.space;
    d.round0 = *round0_;
    for (std::size_t i = 0; i < rounds_.size(); ++i) {
        if (rounds_[i].excluded)
            d.excluded_rounds.push_back(rounds_[i].round);
        else
            d.observations.push_back({rounds_[i].round, *submissions_[i]});
    }
    validate(d);
    return d;
}

} // namespace psm
