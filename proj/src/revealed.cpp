#include "psm/revealed.hpp"

#include "psm/error.hpp"

namespace psm {

namespace {

int compare_scaled(const Rational& e, const Rational& a, const Rational& b) {
    if (e == Rational(1)) return a < b ? -1 : (a == b ? 0 : 1);
    try {
        const Rational lhs = e * a;
        return lhs < b ? -1 : (lhs == b ? 0 : 1);
    } catch (const Error&) {
        const BigRational lhs = to_big(e) * to_big(a);
        const BigRational rhs = to_big(b);
        return lhs < rhs ? -1 : (lhs == rhs ? 0 : 1);
    }
}

} // namespace

bool scaled_geq(const Rational& e, const Rational& a, const Rational& b) { return compare_scaled(e, a, b) >= 0; }
bool scaled_gt(const Rational& e, const Rational& a, const Rational& b) { return compare_scaled(e, a, b) > 0; }

ExpenditureTable::ExpenditureTable(std::span<const Round> rounds, std::span<const Answer> answers)
    : n_(rounds.size()), spend_(n_ * n_), same_(n_ * n_, 0) {
    if (answers.size() != rounds.size()) throw Error(Errc::dimension_mismatch, "one answer per round required");
    for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t l = 0; l < n_; ++l) {
            spend_[k * n_ + l] = cost(answers[l], rounds[k]);
            same_[k * n_ + l] = answers[k] == answers[l] ? 1 : 0;
        }
}

namespace {

std::vector<Round> rounds_of(const Dataset& d) {
    std::vector<Round> out;
    out.reserve(d.size());
    for (const auto& o : d.observations) out.push_back(o.round);
    return out;
}

std::vector<Answer> answers_of(const Dataset& d) {
    std::vector<Answer> out;
    out.reserve(d.size());
    for (const auto& o : d.observations) out.push_back(o.answer);
    return out;
}

} // namespace

ExpenditureTable::ExpenditureTable(const Dataset& d) : ExpenditureTable(rounds_of(d), answers_of(d)) {}

RelationMatrices direct_relations(const ExpenditureTable& table, const Rational& efficiency, StrictRelation strict) {
    if (efficiency < Rational(0) || efficiency > Rational(1))
        throw Error(Errc::invalid_argument, "efficiency level must lie in [0, 1]");
    const std::size_t n = table.size();
    RelationMatrices m{BoolMatrix(n), BoolMatrix(n), BoolMatrix()};
    for (std::size_t k = 0; k < n; ++k) {
        const Rational& own = table.spend(k, k);
        for (std::size_t l = 0; l < n; ++l) {
            const bool same = table.same_bundle(k, l);
            const Rational& other = table.spend(k, l);
            m.r0.set(k, l, same || scaled_geq(efficiency, own, other));
            const bool strict_spend = scaled_gt(efficiency, own, other);
            m.p0.set(k, l, strict_spend || (same && strict == StrictRelation::literal_equal_bundle));
        }
    }
    return m;
}

RelationMatrices direct_relations(const Dataset& d, StrictRelation strict) {
    return direct_relations(ExpenditureTable(d), Rational(1), strict);
}

RelationMatrices transitive_closure(RelationMatrices m) {
    const std::size_t n = m.r0.size();
    BoolMatrix r = m.r0;
    for (std::size_t i = 0; i < n; ++i) r.set(i, i);
    for (std::size_t via = 0; via < n; ++via)
        for (std::size_t i = 0; i < n; ++i) {
            if (!r(i, via)) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (r(via, j)) r.set(i, j);
        }
    m.r = std::move(r);
    return m;
}

GarpReport garp_report(const RelationMatrices& closed) {
    GarpReport report;
    const std::size_t n = closed.r.size();
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
            if (k != l && closed.r(k, l) && closed.p0(l, k)) report.violations.emplace_back(k, l);
    report.count = report.violations.size();
    report.satisfied = report.count == 0;
    return report;
}

GarpReport check_garp(const ExpenditureTable& table, const Rational& efficiency, StrictRelation strict) {
    return garp_report(transitive_closure(direct_relations(table, efficiency, strict)));
}

GarpReport check_garp(const Dataset& d, StrictRelation strict) {
    return check_garp(ExpenditureTable(d), Rational(1), strict);
}

} // namespace psm
