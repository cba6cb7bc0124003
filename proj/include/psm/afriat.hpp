#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "psm/core.hpp"
#include "psm/rational.hpp"

namespace psm {

/// Utility levels U^k and multipliers lambda^k satisfying, for all k, l,
///   U^k <= U^l + lambda^l * p^l . (q^k - q^l)   (measured in corner o^l).
struct AfriatSolution {
    std::vector<BigRational> u_levels;
    std::vector<BigRational> multipliers;
    /// Preference class of each observation; 0 is the top class.
    std::vector<std::size_t> class_rank;
};

/// Constructive solution: condense the revealed-preference graph into
/// strongly connected components, layer them by longest path from the
/// unbeaten components (each layer is an antichain, hence one indifference
/// class), then assign levels top-down. The returned numbers are checked
/// against every inequality before returning.
///
/// Throws Errc::garp_violation if the data fail GARP.
AfriatSolution solve_afriat(const Dataset& d);

/// Ordered pairs (k, l) whose inequality fails; empty for a valid solution.
std::vector<std::pair<std::size_t, std::size_t>> afriat_violations(const Dataset& d, const AfriatSolution& sol);

/// u(x) = min_k U^k + lambda^k p^k . (x_{o^k} - q^k_{o^k}).
class PiecewiseUtility {
public:
    PiecewiseUtility(const Dataset& d, AfriatSolution solution);

    const AnswerSpace& space() const noexcept { return space_; }
    const AfriatSolution& solution() const noexcept { return solution_; }
    std::size_t pieces() const noexcept { return pieces_.size(); }

    BigRational evaluate_exact(const Answer& x) const;
    double evaluate(const Answer& x) const;
    /// The single linear piece u^k(x).
    BigRational piece(std::size_t k, const Answer& x) const;

    /// Exact values at every grid point in flat-index order (OpenMP).
    std::vector<BigRational> grid_values() const;

private:
    struct Piece {
        Corner corner;
        std::vector<BigRational> slope; // lambda^k * p^k_s, per corner-coordinate unit
        BigRational offset;             // U^k - lambda^k * p^k . q^k_{o^k}
    };

    AnswerSpace space_;
    AfriatSolution solution_;
    std::vector<Piece> pieces_;
};

struct Peak {
    Answer argmax;              ///< lexicographically smallest maximizer
    BigRational value;
    std::vector<Answer> ties;   ///< every maximizer, lexicographic order
};

/// Exhaustive search over the grid.
Peak find_peak(const PiecewiseUtility& u);

namespace serial {
std::vector<BigRational> grid_values(const PiecewiseUtility& u);
Peak find_peak(const PiecewiseUtility& u);
} // namespace serial

/// Maximizers of exact grid values given in flat-index order.
Peak peak_of(const std::vector<BigRational>& values, const AnswerSpace& space);

} // namespace psm
