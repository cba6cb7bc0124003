#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "psm/core.hpp"
#include "psm/error.hpp"

namespace psm {

struct SessionConfig {
    AnswerSpace space{{10, 10}};
    int rounds_per_corner = 2;
    /// Round r of each corner uses price_vectors[r % size].
    std::vector<std::vector<Rational>> price_vectors{{Rational(1), Rational(2)}, {Rational(2), Rational(1)}};
    Rational budget_slack{2};
    std::uint64_t shuffle_seed = 0;

    std::size_t total_rounds() const {
        return static_cast<std::size_t>(rounds_per_corner) * space.num_corners();
    }

    friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

void validate(const SessionConfig& config);

nlohmann::json config_to_json(const SessionConfig& config);
/// Fields absent from `overrides` keep the defaults above.
SessionConfig config_from_json(const nlohmann::json& overrides);

struct GeneratedRound {
    Round round;
    bool excluded = false;

    friend bool operator==(const GeneratedRound&, const GeneratedRound&) = default;
};

/// Budgets R = p . q0_{o} - slack for every (corner, price vector) pair,
/// shuffled by the config seed. Rounds where p . q0_{o} <= slack are flagged
/// excluded and carry a zero budget.
std::vector<GeneratedRound> generate_rounds(const SessionConfig& config, const Answer& q0);

enum class SessionStatus { awaiting_round0, in_progress, complete };
std::string_view to_string(SessionStatus status);

/// Rejected submission: the answer costs `shortfall` tokens more than the budget.
class OverBudget : public Error {
public:
    OverBudget(const Rational& shortfall, const std::string& message)
        : Error(Errc::over_budget, message), shortfall_(shortfall) {}
    const Rational& shortfall() const noexcept { return shortfall_; }

private:
    Rational shortfall_;
};

/// One respondent's progress. Round index 0 is the unconstrained round;
/// index i >= 1 refers to rounds()[i - 1]. Rounds are answered strictly in
/// presented order and excluded rounds are skipped.
class SessionState {
public:
    explicit SessionState(SessionConfig config);

    const SessionConfig& config() const noexcept { return config_; }
    SessionStatus status() const noexcept { return status_; }
    const std::optional<Answer>& round0_answer() const noexcept { return round0_; }
    const std::vector<GeneratedRound>& rounds() const noexcept { return rounds_; }
    const std::vector<std::optional<Answer>>& submissions() const noexcept { return submissions_; }

    /// Next round to answer, or nullopt once complete.
    std::optional<std::size_t> current_round() const;

    /// Throws Errc::wrong_round, Errc::session_complete, Errc::out_of_range or OverBudget.
    void submit(std::size_t round_index, const Answer& answer);

    /// Throws Errc::incomplete before the last round is answered.
    Dataset to_dataset() const;

    friend bool operator==(const SessionState&, const SessionState&) = default;

private:
    void advance();

    SessionConfig config_;
    SessionStatus status_ = SessionStatus::awaiting_round0;
    std::optional<Answer> round0_;
    std::vector<GeneratedRound> rounds_;
    std::vector<std::optional<Answer>> submissions_;
    std::size_t next_ = 0;
};

} // namespace psm
