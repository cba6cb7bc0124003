#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "psm/core.hpp"
#include "psm/error.hpp"

namespace psm {

struct SinglePeakedReport {
    struct Counterexample {
        Corner corner;
        Answer x; ///< x_c <= y_c <= y*_c, yet f(x) > f(y)
        Answer y;
    };

    bool single_peaked = false;
    Answer peak;                                 ///< the y* that passed, else the first maximizer
    std::optional<Counterexample> counterexample; ///< first failure for the first maximizer
};

namespace detail {

/// Flat index of the first unit step (x -> x + 1 toward y* along question s)
/// inside the box [c, y*] where f decreases, encoded as i * S + s, or
/// npos if f is monotone on the box.
template <class T>
std::size_t first_decrease(const std::vector<T>& f, const AnswerSpace& space, const Corner& c, const Answer& top) {
    constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    const std::size_t dims = space.dims();
    const auto n = static_cast<long long>(space.num_points());
    std::size_t first = npos;
#pragma omp parallel for reduction(min : first) schedule(static)
    for (long long i = 0; i < n; ++i) {
        const Answer x = space.point(static_cast<std::size_t>(i));
        bool inside = true;
        for (std::size_t s = 0; s < dims && inside; ++s)
            inside = c[s] == 0 ? x[s] <= top[s] : x[s] >= top[s];
        if (!inside) continue;
        for (std::size_t s = 0; s < dims; ++s) {
            if (x[s] == top[s]) continue;
            Answer y = x;
            y.values[s] += c[s] == 0 ? 1 : -1;
            if (f[static_cast<std::size_t>(i)] > f[space.index_of(y)]) {
                first = std::min(first, static_cast<std::size_t>(i) * dims + s);
                break;
            }
        }
    }
    return first;
}

} // namespace detail

/// Checks that f has a global maximizer y* such that, for every corner c and
/// all grid points with x_c <= y_c <= y*_c componentwise, f(x) <= f(y).
/// Monotonicity on a box follows from monotonicity along unit steps, so only
/// adjacent pairs are tested. Every maximizer is tried as y*.
template <class T>
SinglePeakedReport verify_single_peaked(const std::vector<T>& f, const AnswerSpace& space) {
    if (f.size() != space.num_points()) throw Error(Errc::dimension_mismatch, "grid function size mismatch");
    std::size_t best = 0;
    for (std::size_t i = 1; i < f.size(); ++i)
        if (f[i] > f[best]) best = i;

    SinglePeakedReport report;
    report.peak = space.point(best);
    bool first_maximizer = true;
    for (std::size_t i = best; i < f.size(); ++i) {
        if (!(f[i] == f[best])) continue;
        const Answer top = space.point(i);
        std::optional<SinglePeakedReport::Counterexample> failure;
        for (const Corner& c : space.corners()) {
            const std::size_t code = detail::first_decrease(f, space, c, top);
            if (code == std::numeric_limits<std::size_t>::max()) continue;
            const std::size_t s = code % space.dims();
            Answer x = space.point(code / space.dims());
            Answer y = x;
            y.values[s] += c[s] == 0 ? 1 : -1;
            failure = SinglePeakedReport::Counterexample{c, std::move(x), std::move(y)};
            break;
        }
        if (!failure) {
            report.single_peaked = true;
            report.peak = top;
            report.counterexample.reset();
            return report;
        }
        if (first_maximizer) report.counterexample = std::move(failure);
        first_maximizer = false;
    }
    return report;
}

} // namespace psm
