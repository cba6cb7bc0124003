#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "psm/rational.hpp"

namespace psm {

/// A grid point in absolute coordinates (origin at the zero corner).
struct Answer {
    std::vector<int> values;

    std::size_t size() const noexcept { return values.size(); }
    int operator[](std::size_t s) const { return values[s]; }

    friend bool operator==(const Answer&, const Answer&) = default;
    friend auto operator<=>(const Answer&, const Answer&) = default;
};

/// An extreme point of the grid: each coordinate is 0 or N(s).
struct Corner {
    std::vector<int> coords;

    std::size_t size() const noexcept { return coords.size(); }
    int operator[](std::size_t s) const { return coords[s]; }
    Answer as_answer() const { return Answer{coords}; }

    friend bool operator==(const Corner&, const Corner&) = default;
    friend auto operator<=>(const Corner&, const Corner&) = default;
};

/// The integer grid X = prod_s {0..N(s)}.
///
/// Grid points are flattened row-major with the last question varying
/// fastest, so flat index order coincides with lexicographic answer order.
class AnswerSpace {
public:
    AnswerSpace() = default;
    explicit AnswerSpace(std::vector<int> scales);

    std::size_t dims() const noexcept { return scales_.size(); }
    int scale(std::size_t s) const { return scales_[s]; }
    std::span<const int> scales() const noexcept { return scales_; }

    std::size_t num_points() const noexcept { return num_points_; }
    std::size_t num_corners() const noexcept { return std::size_t{1} << scales_.size(); }

    /// Corner whose coordinate s sits at N(s) iff bit s of `mask` is set.
    Corner corner(std::size_t mask) const;
    std::vector<Corner> corners() const;
    Corner zero_corner() const { return corner(0); }
    Corner opposite(const Corner& c) const;
    bool is_corner(const Corner& c) const;
    bool is_corner(const Answer& q) const;

    bool contains(const Answer& q) const;
    Answer point(std::size_t flat_index) const;
    std::size_t index_of(const Answer& q) const;

    friend bool operator==(const AnswerSpace& a, const AnswerSpace& b) { return a.scales_ == b.scales_; }

private:
    std::vector<int> scales_;
    std::size_t num_points_ = 0;
};

/// One round's budget set: default corner, per-step prices and token budget.
struct Round {
    Corner corner;
    std::vector<Rational> prices;
    Rational budget;

    friend bool operator==(const Round&, const Round&) = default;
};

struct Observation {
    Round round;
    Answer answer;

    friend bool operator==(const Observation&, const Observation&) = default;
};

/// Round-0 answer plus the constrained observations of one respondent.
/// `excluded_rounds` records rounds dropped by the session exclusion rule;
/// they never enter any analysis.
struct Dataset {
    AnswerSpace space;
    Answer round0;
    std::vector<Observation> observations;
    std::vector<Round> excluded_rounds;

    std::size_t size() const noexcept { return observations.size(); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Coordinates of q measured from corner c: |q_s - c_s| per question.
std::vector<int> to_corner_coords(const Answer& q, const Corner& c, const AnswerSpace& space);

/// Same transform for continuous points (used by the quadratic model).
std::vector<double> to_corner_coords(std::span<const double> x, const Corner& c);
std::vector<double> from_corner_coords(std::span<const double> xc, const Corner& c);

/// Token cost p . q_c of answer q in the round's corner system.
Rational cost(const Answer& q, const Round& round);
Rational cost(const Answer& q, const Observation& obs);

bool budget_contains(const Answer& q, const Round& round);

/// Throws Error(Errc::invariant) naming the offending observation.
void validate(const Dataset& d);
void validate(const Round& round, const AnswerSpace& space);

std::string to_string(const Answer& q);

} // namespace psm
