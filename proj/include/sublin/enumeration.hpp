#pragma once

#include "sublin/errors.hpp"
#include "sublin/product.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace sublin {

/// Default budget for exact enumerations, in work units.
inline constexpr double kDefaultGuard = 1e6;

/// Finite distribution of a real quantity: (value, probability) sorted by value.
using ValueDistribution = std::vector<std::pair<double, double>>;

namespace detail {

inline bool same_value(double a, double b) { return std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(a)); }

/// Sorts by value and merges entries whose values agree up to rounding.
inline void compact(ValueDistribution& d) {
    std::sort(d.begin(), d.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t w = 0;
    for (std::size_t r = 0; r < d.size(); ++r) {
        if (w > 0 && same_value(d[w - 1].first, d[r].first))
            d[w - 1].second += d[r].second;
        else
            d[w++] = d[r];
    }
    d.resize(w);
}

}  // namespace detail

/// Distribution of `base + inc[a]` with a drawn from `probs`, convolved with `base`.
inline ValueDistribution convolve(const ValueDistribution& base, std::span<const double> inc,
                                  std::span<const double> probs) {
    ValueDistribution out;
    out.reserve(base.size() * inc.size());
    for (const auto& [v, p] : base)
        for (std::size_t a = 0; a < inc.size(); ++a)
            if (probs[a] > 0.0) out.emplace_back(v + inc[a], p * probs[a]);
    detail::compact(out);
    return out;
}

/**
 * Calls `visit(tuple)` for every generator tuple over coordinates
 * [first, last) in mixed-radix order (first coordinate most significant).
 */
inline void for_each_tuple(const ProductModel& model, std::size_t first, std::size_t last,
                           const std::function<void(std::span<const std::size_t>)>& visit) {
    const std::size_t len = last - first;
    std::vector<std::size_t> t(len, 0);
    while (true) {
        visit(t);
        std::size_t i = len;
        while (i > 0) {
            --i;
            if (++t[i] < model.generators_at(first + i)) break;
            t[i] = 0;
            if (i == 0) return;
        }
        if (len == 0) return;
    }
}

/// All atom paths over coordinates [first, last), mixed radix, first coordinate most significant.
inline std::vector<std::vector<std::size_t>> enumerate_paths(const ProductModel& model, std::size_t first,
                                                             std::size_t last) {
    const auto count = static_cast<std::size_t>(model.atom_count(first, last));
    std::vector<std::vector<std::size_t>> paths(count, std::vector<std::size_t>(last - first));
    for (std::size_t p = 0; p < count; ++p) {
        std::size_t rest = p;
        for (std::size_t i = last - first; i-- > 0;) {
            paths[p][i] = rest % model.atoms_at(first + i);
            rest /= model.atoms_at(first + i);
        }
    }
    return paths;
}

/// Probability of every path (same order as enumerate_paths) under one generator tuple.
inline std::vector<double> path_probabilities(const ProductModel& model, std::size_t first,
                                              std::span<const std::size_t> tuple) {
    std::vector<double> probs{1.0};
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        const auto& g = model.marginal(first + i).credal().generator(tuple[i]);
        std::vector<double> next;
        next.reserve(probs.size() * g.size());
        for (double p : probs)
            for (double q : g) next.push_back(p * q);
        probs = std::move(next);
    }
    return probs;
}

struct EventCapacities {
    std::vector<double> upper;  // max over generator tuples
    std::vector<double> lower;  // min over generator tuples
};

/**
 * Upper and lower capacities of up to 64 path events at once. Bit e of
 * `masks[path]` says whether the path lies in event e. Work is
 * (#tuples) x (#paths).
 */
inline EventCapacities path_event_capacities(const ProductModel& model, std::size_t first, std::size_t last,
                                             std::span<const std::uint64_t> masks, std::size_t events,
                                             double guard = kDefaultGuard) {
    if (events > 64) throw ModelError("path_event_capacities: at most 64 events");
    double work = model.generator_count(first, last) * model.atom_count(first, last);
    if (work > guard) throw GuardExceeded("exact path enumeration", work, guard);
    EventCapacities out{std::vector<double>(events, 0.0), std::vector<double>(events, 1.0)};
    std::vector<double> mass(events);
    for_each_tuple(model, first, last, [&](std::span<const std::size_t> t) {
        auto probs = path_probabilities(model, first, t);
        std::fill(mass.begin(), mass.end(), 0.0);
        for (std::size_t p = 0; p < probs.size(); ++p) {
            if (probs[p] == 0.0) continue;
            auto m = masks[p];
            while (m) {
                auto e = static_cast<std::size_t>(__builtin_ctzll(m));
                mass[e] += probs[p];
                m &= m - 1;
            }
        }
        for (std::size_t e = 0; e < events; ++e) {
            out.upper[e] = std::max(out.upper[e], mass[e]);
            out.lower[e] = std::min(out.lower[e], mass[e]);
        }
    });
    return out;
}

}  // namespace sublin
