#include "psm/core.hpp"

#include <cstdlib>
#include <sstream>

#include "psm/error.hpp"

namespace psm {

std::string_view to_string(Errc code) {
    switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::dimension_mismatch: return "dimension_mismatch";
    case Errc::out_of_range: return "out_of_range";
    case Errc::schema: return "schema";
    case Errc::invariant: return "invariant";
    case Errc::overflow: return "overflow";
    case Errc::garp_violation: return "garp_violation";
    case Errc::degenerate: return "degenerate";
    case Errc::over_budget: return "over_budget";
    case Errc::wrong_round: return "wrong_round";
    case Errc::incomplete: return "incomplete";
    case Errc::not_found: return "not_found";
    case Errc::session_complete: return "session_complete";
    case Errc::io: return "io";
    }
    return "unknown";
}

AnswerSpace::AnswerSpace(std::vector<int> scales) : scales_(std::move(scales)) {
    if (scales_.empty()) throw Error(Errc::invalid_argument, "answer space needs at least one question");
    if (scales_.size() > 16) throw Error(Errc::invalid_argument, "answer space limited to 16 questions");
    num_points_ = 1;
    for (int n : scales_) {
        if (n < 1) throw Error(Errc::invalid_argument, "every scale maximum N(s) must be >= 1");
        num_points_ *= static_cast<std::size_t>(n) + 1;
    }
}

Corner AnswerSpace::corner(std::size_t mask) const {
    Corner c{std::vector<int>(dims(), 0)};
    for (std::size_t s = 0; s < dims(); ++s)
        if (mask & (std::size_t{1} << s)) c.coords[s] = scales_[s];
    return c;
}

std::vector<Corner> AnswerSpace::corners() const {
    std::vector<Corner> out;
    out.reserve(num_corners());
    for (std::size_t m = 0; m < num_corners(); ++m) out.push_back(corner(m));
    return out;
}

Corner AnswerSpace::opposite(const Corner& c) const {
    if (!is_corner(c)) throw Error(Errc::invalid_argument, "not a corner of the answer space");
    Corner n = c;
    for (std::size_t s = 0; s < dims(); ++s) n.coords[s] = scales_[s] - c.coords[s];
    return n;
}

bool AnswerSpace::is_corner(const Corner& c) const {
    if (c.size() != dims()) return false;
    for (std::size_t s = 0; s < dims(); ++s)
        if (c[s] != 0 && c[s] != scales_[s]) return false;
    return true;
}

bool AnswerSpace::is_corner(const Answer& q) const { return is_corner(Corner{q.values}); }

bool AnswerSpace::contains(const Answer& q) const {
    if (q.size() != dims()) return false;
    for (std::size_t s = 0; s < dims(); ++s)
        if (q[s] < 0 || q[s] > scales_[s]) return false;
    return true;
}

Answer AnswerSpace::point(std::size_t flat_index) const {
    Answer q{std::vector<int>(dims(), 0)};
    for (std::size_t s = dims(); s-- > 0;) {
        const auto width = static_cast<std::size_t>(scales_[s]) + 1;
        q.values[s] = static_cast<int>(flat_index % width);
        flat_index /= width;
    }
    return q;
}

std::size_t AnswerSpace::index_of(const Answer& q) const {
    if (!contains(q)) throw Error(Errc::out_of_range, "answer " + to_string(q) + " outside the answer space");
    std::size_t idx = 0;
    for (std::size_t s = 0; s < dims(); ++s)
        idx = idx * (static_cast<std::size_t>(scales_[s]) + 1) + static_cast<std::size_t>(q[s]);
    return idx;
}

std::vector<int> to_corner_coords(const Answer& q, const Corner& c, const AnswerSpace& space) {
    if (q.size() != space.dims() || c.size() != space.dims())
        throw Error(Errc::dimension_mismatch, "answer/corner dimension does not match the answer space");
    if (!space.contains(q)) throw Error(Errc::out_of_range, "answer " + to_string(q) + " outside the answer space");
    if (!space.is_corner(c)) throw Error(Errc::invalid_argument, "not a corner of the answer space");
    std::vector<int> out(q.size());
    for (std::size_t s = 0; s < q.size(); ++s) out[s] = c[s] == 0 ? q[s] : space.scale(s) - q[s];
    return out;
}

std::vector<double> to_corner_coords(std::span<const double> x, const Corner& c) {
    if (x.size() != c.size()) throw Error(Errc::dimension_mismatch, "point/corner dimension mismatch");
    std::vector<double> out(x.size());
    for (std::size_t s = 0; s < x.size(); ++s) out[s] = c[s] == 0 ? x[s] : c[s] - x[s];
    return out;
}

std::vector<double> from_corner_coords(std::span<const double> xc, const Corner& c) {
    // The reflection is an involution.
    return to_corner_coords(xc, c);
}

Rational cost(const Answer& q, const Round& round) {
    if (q.size() != round.corner.size() || q.size() != round.prices.size())
        throw Error(Errc::dimension_mismatch, "answer/round dimension mismatch");
    Rational total;
    for (std::size_t s = 0; s < q.size(); ++s) {
        const int step = std::abs(q[s] - round.corner[s]);
        if (step != 0) total += round.prices[s] * Rational(step);
    }
    return total;
}

Rational cost(const Answer& q, const Observation& obs) { return cost(q, obs.round); }

bool budget_contains(const Answer& q, const Round& round) { return cost(q, round) <= round.budget; }

void validate(const Round& round, const AnswerSpace& space) {
    if (!space.is_corner(round.corner)) throw Error(Errc::invariant, "round corner is not a corner of the answer space");
    if (round.prices.size() != space.dims()) throw Error(Errc::invariant, "price vector length differs from question count");
    for (const auto& p : round.prices)
        if (!p.is_positive()) throw Error(Errc::invariant, "prices must be strictly positive");
    if (round.budget.is_negative()) throw Error(Errc::invariant, "budget must be non-negative");
}

void validate(const Dataset& d) {
    if (!d.space.contains(d.round0)) throw Error(Errc::invariant, "round0 answer outside the answer space");
    auto fail = [](std::size_t k, const std::string& what) {
        throw Error(Errc::invariant, "observation " + std::to_string(k + 1) + ": " + what);
    };
    for (std::size_t k = 0; k < d.observations.size(); ++k) {
        const auto& obs = d.observations[k];
        try {
            validate(obs.round, d.space);
        } catch (const Error& e) {
            fail(k, e.what());
        }
        if (!d.space.contains(obs.answer)) fail(k, "answer " + to_string(obs.answer) + " outside the answer space");
        if (!budget_contains(obs.answer, obs.round))
            fail(k, "answer costs " + cost(obs.answer, obs.round).to_string() + " tokens, over budget " +
                        obs.round.budget.to_string());
        if (budget_contains(d.round0, obs.round))
            fail(k, "round0 answer is affordable (cost " + cost(d.round0, obs.round).to_string() + " <= budget " +
                        obs.round.budget.to_string() + ")");
    }
    for (std::size_t k = 0; k < d.excluded_rounds.size(); ++k) {
        try {
            validate(d.excluded_rounds[k], d.space);
        } catch (const Error& e) {
            throw Error(Errc::invariant, "excluded round " + std::to_string(k + 1) + ": " + e.what());
        }
    }
}

std::string to_string(const Answer& q) {
    std::ostringstream os;
    os << '(';
    for (std::size_t s = 0; s < q.size(); ++s) os << (s ? "," : "") << q[s];
    os << ')';
    return os.str();
}

} // namespace psm
