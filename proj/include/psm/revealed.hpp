#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "psm/core.hpp"

namespace psm {

/// Dense square boolean matrix; K is at most a few dozen here.
class BoolMatrix {
public:
    BoolMatrix() = default;
    explicit BoolMatrix(std::size_t n) : n_(n), cells_(n * n, 0) {}

    std::size_t size() const noexcept { return n_; }
    bool operator()(std::size_t i, std::size_t j) const { return cells_[i * n_ + j] != 0; }
    void set(std::size_t i, std::size_t j, bool v = true) { cells_[i * n_ + j] = v ? 1 : 0; }

    friend bool operator==(const BoolMatrix&, const BoolMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> cells_;
};

/// spend(k, l) = p^k . q^l measured in observation k's corner system.
class ExpenditureTable {
public:
    ExpenditureTable(std::span<const Round> rounds, std::span<const Answer> answers);
    explicit ExpenditureTable(const Dataset& d);

    std::size_t size() const noexcept { return n_; }
    const Rational& spend(std::size_t k, std::size_t l) const { return spend_[k * n_ + l]; }
    bool same_bundle(std::size_t k, std::size_t l) const { return same_[k * n_ + l] != 0; }

private:
    std::size_t n_ = 0;
    std::vector<Rational> spend_;
    std::vector<std::uint8_t> same_;
};

/// How the direct strict relation treats identical bundles. Copying the
/// "or the bundles are equal" clause of the weak relation into the strict one
/// makes any answer repeated across two rounds a GARP violation. The default
/// uses the strict expenditure inequality only.
enum class StrictRelation { expenditure_only, literal_equal_bundle };

struct RelationMatrices {
    BoolMatrix r0; ///< direct weak relation
    BoolMatrix p0; ///< direct strict relation
    BoolMatrix r;  ///< reflexive-transitive closure of r0 (empty until closed)
};

struct GarpReport {
    bool satisfied = true;
    /// Ordered pairs (k, l), 0-based, with q^k R q^l and q^l P0 q^k; k != l.
    std::vector<std::pair<std::size_t, std::size_t>> violations;
    std::size_t count = 0;
};

/// Direct relations at efficiency level e (e = 1 is the undeflated case):
/// k R0 l iff e * spend(k,k) >= spend(k,l) or q^k == q^l.
RelationMatrices direct_relations(const ExpenditureTable& table, const Rational& efficiency = Rational(1),
                                  StrictRelation strict = StrictRelation::expenditure_only);
RelationMatrices direct_relations(const Dataset& d, StrictRelation strict = StrictRelation::expenditure_only);

/// Fills `r` by Warshall's algorithm on r0.
RelationMatrices transitive_closure(RelationMatrices m);

/// Violations from closed relation matrices.
GarpReport garp_report(const RelationMatrices& closed);

GarpReport check_garp(const Dataset& d, StrictRelation strict = StrictRelation::expenditure_only);
GarpReport check_garp(const ExpenditureTable& table, const Rational& efficiency = Rational(1),
                      StrictRelation strict = StrictRelation::expenditure_only);

/// e * a >= b, exact even when the product overflows 64-bit rationals.
bool scaled_geq(const Rational& e, const Rational& a, const Rational& b);
bool scaled_gt(const Rational& e, const Rational& a, const Rational& b);

} // namespace psm
