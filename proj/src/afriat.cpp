#include "psm/afriat.hpp"

#include <algorithm>
#include <functional>

#include "psm/error.hpp"
#include "psm/revealed.hpp"

namespace psm {

namespace {

// spend(k, l) = p^k . q^l_{o^k}, exact.
std::vector<std::vector<BigRational>> exact_spend(const Dataset& d) {
    const std::size_t n = d.size();
    std::vector<std::vector<BigRational>> spend(n, std::vector<BigRational>(n));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) spend[k][l] = to_big(cost(d.observations[l].answer, d.observations[k].round));
    return spend;
}

// Tarjan's algorithm; component ids in reverse topological order of discovery.
std::vector<std::size_t> strongly_connected_components(const BoolMatrix& edges, std::size_t& count) {
    const std::size_t n = edges.size();
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, unvisited), low(n, 0), comp(n, unvisited);
    std::vector<std::size_t> stack;
    std::vector<bool> on_stack(n, false);
    std::size_t next = 0;
    count = 0;

    std::function<void(std::size_t)> visit = [&](std::size_t v) {
        index[v] = low[v] = next++;
        stack.push_back(v);
        on_stack[v] = true;
        for (std::size_t w = 0; w < n; ++w) {
            if (w == v || !edges(v, w)) continue;
            if (index[w] == unvisited) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp[w] = count;
            } while (w != v);
            ++count;
        }
    };
    for (std::size_t v = 0; v < n; ++v)
        if (index[v] == unvisited) visit(v);
    return comp;
}

// Longest-path layer of each component in the condensation; layer 0 holds
// the components no other component is revealed preferred to.
std::vector<std::size_t> layer_components(const BoolMatrix& edges, const std::vector<std::size_t>& comp,
                                          std::size_t count) {
    const std::size_t n = edges.size();
    std::vector<std::vector<bool>> dag(count, std::vector<bool>(count, false));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
            if (edges(k, l) && comp[k] != comp[l]) dag[comp[k]][comp[l]] = true;

    std::vector<std::size_t> indegree(count, 0);
    for (std::size_t a = 0; a < count; ++a)
        for (std::size_t b = 0; b < count; ++b)
            if (dag[a][b]) ++indegree[b];

    std::vector<std::size_t> layer(count, 0);
    std::vector<std::size_t> ready;
    for (std::size_t a = 0; a < count; ++a)
        if (indegree[a] == 0) ready.push_back(a);
    while (!ready.empty()) {
        const std::size_t a = ready.back();
        ready.pop_back();
        for (std::size_t b = 0; b < count; ++b) {
            if (!dag[a][b]) continue;
            layer[b] = std::max(layer[b], layer[a] + 1);
            if (--indegree[b] == 0) ready.push_back(b);
        }
    }
    return layer;
}

} // namespace

AfriatSolution solve_afriat(const Dataset& d) {
    const std::size_t n = d.size();
    const ExpenditureTable table(d);
    const RelationMatrices closed = transitive_closure(direct_relations(table));
    if (!garp_report(closed).satisfied)
        throw Error(Errc::garp_violation, "data violate GARP; no Afriat solution exists");

    std::size_t count = 0;
    const auto comp = strongly_connected_components(closed.r0, count);
    const auto comp_layer = layer_components(closed.r0, comp, count);

    AfriatSolution sol;
    sol.u_levels.assign(n, BigRational(0));
    sol.multipliers.assign(n, BigRational(0));
    sol.class_rank.resize(n);
    std::size_t layers = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sol.class_rank[k] = comp_layer[comp[k]];
        layers = std::max(layers, sol.class_rank[k] + 1);
    }
    if (n == 0) return sol;

    const auto spend = exact_spend(d);
    std::vector<std::size_t> assigned;
    for (std::size_t j = 0; j < layers; ++j) {
        std::vector<std::size_t> members;
        for (std::size_t k = 0; k < n; ++k)
            if (sol.class_rank[k] == j) members.push_back(k);

        if (j == 0) {
            for (std::size_t l : members) sol.u_levels[l] = sol.multipliers[l] = BigRational(1);
        } else {
            // Strictly below every higher level and every higher piece at q^l.
            BigRational bound = sol.u_levels[assigned.front()];
            for (std::size_t k : assigned) {
                bound = std::min(bound, sol.u_levels[k]);
                for (std::size_t l : members)
                    bound = std::min(bound, BigRational(sol.u_levels[k] + sol.multipliers[k] * (spend[k][l] - spend[k][k])));
            }
            const BigRational level = bound - 1;
            for (std::size_t l : members) sol.u_levels[l] = level;
            for (std::size_t l : members) {
                BigRational lambda(1);
                for (std::size_t k : assigned) {
                    const BigRational denom = spend[l][k] - spend[l][l];
                    if (denom <= 0)
                        throw Error(Errc::invariant, "non-positive multiplier denominator between observations " +
                                                         std::to_string(l + 1) + " and " + std::to_string(k + 1));
                    lambda = std::max(lambda, BigRational((sol.u_levels[k] - sol.u_levels[l]) / denom));
                }
                sol.multipliers[l] = lambda;
            }
        }
        assigned.insert(assigned.end(), members.begin(), members.end());
    }

    // The inequalities are invariant to a common shift; keep every level >= 1.
    const BigRational lowest = *std::min_element(sol.u_levels.begin(), sol.u_levels.end());
    if (lowest < 1)
        for (auto& u : sol.u_levels) u += 1 - lowest;

    if (!afriat_violations(d, sol).empty())
        throw Error(Errc::invariant, "constructed Afriat numbers fail an inequality");
    return sol;
}

std::vector<std::pair<std::size_t, std::size_t>> afriat_violations(const Dataset& d, const AfriatSolution& sol) {
    const std::size_t n = d.size();
    if (sol.u_levels.size() != n || sol.multipliers.size() != n)
        throw Error(Errc::dimension_mismatch, "solution size differs from observation count");
    const auto spend = exact_spend(d);
    std::vector<std::pair<std::size_t, std::size_t>> bad;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
            if (sol.u_levels[k] > sol.u_levels[l] + sol.multipliers[l] * (spend[l][k] - spend[l][l]))
                bad.emplace_back(k, l);
    for (std::size_t k = 0; k < n; ++k)
        if (sol.u_levels[k] <= 0 || sol.multipliers[k] <= 0) bad.emplace_back(k, k);
    return bad;
}

PiecewiseUtility::PiecewiseUtility(const Dataset& d, AfriatSolution solution)
    : space_(d.space), solution_(std::move(solution)) {
    if (solution_.u_levels.size() != d.size() || solution_.multipliers.size() != d.size())
        throw Error(Errc::dimension_mismatch, "solution size differs from observation count");
    if (d.size() == 0) throw Error(Errc::invalid_argument, "utility needs at least one observation");
    pieces_.reserve(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
        const auto& obs = d.observations[k];
        Piece piece;
        piece.corner = obs.round.corner;
        for (const auto& p : obs.round.prices) piece.slope.push_back(solution_.multipliers[k] * to_big(p));
        piece.offset = solution_.u_levels[k] - solution_.multipliers[k] * to_big(cost(obs.answer, obs.round));
        pieces_.push_back(std::move(piece));
    }
}

BigRational PiecewiseUtility::piece(std::size_t k, const Answer& x) const {
    const Piece& p = pieces_.at(k);
    BigRational v = p.offset;
    for (std::size_t s = 0; s < x.size(); ++s) {
        const int step = x[s] > p.corner[s] ? x[s] - p.corner[s] : p.corner[s] - x[s];
        if (step != 0) v += p.slope[s] * step;
    }
    return v;
}

BigRational PiecewiseUtility::evaluate_exact(const Answer& x) const {
    if (!space_.contains(x)) throw Error(Errc::out_of_range, "answer " + to_string(x) + " outside the answer space");
    BigRational best = piece(0, x);
    for (std::size_t k = 1; k < pieces_.size(); ++k) best = std::min(best, piece(k, x));
    return best;
}

double PiecewiseUtility::evaluate(const Answer& x) const { return evaluate_exact(x).convert_to<double>(); }

std::vector<BigRational> PiecewiseUtility::grid_values() const {
    std::vector<BigRational> values(space_.num_points());
    const auto n = static_cast<long long>(values.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = evaluate_exact(space_.point(static_cast<std::size_t>(i)));
    return values;
}

Peak peak_of(const std::vector<BigRational>& values, const AnswerSpace& space) {
    if (values.size() != space.num_points()) throw Error(Errc::dimension_mismatch, "grid value count mismatch");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    Peak peak{space.point(best), values[best], {}};
    for (std::size_t i = best; i < values.size(); ++i)
        if (values[i] == values[best]) peak.ties.push_back(space.point(i));
    return peak;
}

Peak find_peak(const PiecewiseUtility& u) { return peak_of(u.grid_values(), u.space()); }

namespace serial {

std::vector<BigRational> grid_values(const PiecewiseUtility& u) {
    std::vector<BigRational> values;
    values.reserve(u.space().num_points());
    for (std::size_t i = 0; i < u.space().num_points(); ++i) values.push_back(u.evaluate_exact(u.space().point(i)));
    return values;
}

Peak find_peak(const PiecewiseUtility& u) { return peak_of(grid_values(u), u.space()); }

} // namespace serial

} // namespace psm
