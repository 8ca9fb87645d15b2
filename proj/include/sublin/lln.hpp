#pragma once

#include "sublin/centering.hpp"
#include "sublin/enumeration.hpp"
#include "sublin/independence.hpp"
#include "sublin/product.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sublin {

/**
 * Event {|sum_{i=first}^{last} w_i (x_i - lambda_i)| > epsilon} on a product
 * model. Indices are 1-based and inclusive; `last == 0` means the horizon.
 * `lambdas` and `weights` are indexed by coordinate (0-based) over the whole
 * model; empty means all zeros / all ones.
 */
struct DeviationQuery {
    ProductModel model;
    double epsilon;
    std::size_t first = 1;
    std::size_t last = 0;
    std::vector<double> lambdas = {};
    std::vector<double> weights = {};

    std::size_t begin() const { return first - 1; }
    std::size_t end() const { return last == 0 ? model.horizon() : last; }

    void validate() const {
        if (!(epsilon > 0.0)) throw ModelError("deviation query: epsilon must be positive");
        if (first < 1 || first > end() || end() > model.horizon())
            throw ModelError("deviation query: coordinate range out of bounds");
        if (!lambdas.empty() && lambdas.size() < end()) throw ModelError("deviation query: too few lambdas");
        if (!weights.empty() && weights.size() < end()) throw ModelError("deviation query: too few weights");
        for (double w : weights)
            if (!std::isfinite(w)) throw ModelError("deviation query: weights must be finite");
    }

    double lambda(std::size_t i) const { return lambdas.empty() ? 0.0 : lambdas[i]; }
    double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }

    /// w_i (x_i(a) - lambda_i) for every atom a of coordinate i.
    std::vector<double> increments(std::size_t i) const {
        const auto& x = model.variable(i);
        std::vector<double> inc(x.size());
        for (std::size_t a = 0; a < inc.size(); ++a) inc[a] = weight(i) * (x[a] - lambda(i));
        return inc;
    }

    bool exceeds(double sum) const { return std::abs(sum) > epsilon; }
};

struct DeviationResult {
    double capacity;
    std::vector<std::size_t> tuple;  // attaining generator tuple over the query range
};

namespace detail {

inline double tail_mass(const ValueDistribution& d, const DeviationQuery& q) {
    double s = 0.0;
    for (const auto& [v, p] : d)
        if (q.exceeds(v)) s += p;
    return s;
}

}  // namespace detail

/**
 * Exact upper capacity of a deviation event: for every generator tuple the
 * law of the weighted sum is built by convolution over coordinates, and
 * the largest exceedance mass wins. Tuples are walked depth-first so
 * prefixes share their partial convolutions. Work units = number of tuples.
 */
inline DeviationResult deviation_capacity_exact(const DeviationQuery& q, double guard = kDefaultGuard) {
    q.validate();
    const std::size_t b = q.begin(), e = q.end();
    double work = q.model.generator_count(b, e);
    if (work > guard) throw GuardExceeded("deviation_capacity_exact (generator tuples)", work, guard);

    std::vector<std::vector<double>> inc;
    for (std::size_t i = b; i < e; ++i) inc.push_back(q.increments(i));

    DeviationResult best{-1.0, {}};
    std::vector<std::size_t> tuple(e - b);
    std::vector<ValueDistribution> level(e - b + 1);
    level[0] = {{0.0, 1.0}};

    std::function<void(std::size_t)> dfs = [&](std::size_t d) {
        if (d == e - b) {
            double m = detail::tail_mass(level[d], q);
            if (m > best.capacity) best = {m, tuple};
            return;
        }
        const auto& marg = q.model.marginal(b + d);
        for (std::size_t g = 0; g < marg.generator_count(); ++g) {
            tuple[d] = g;
            level[d + 1] = convolve(level[d], inc[d], marg.credal().generator(g));
            dfs(d + 1);
        }
    };
    dfs(0);
    best.capacity = std::clamp(best.capacity, 0.0, 1.0);
    return best;
}

/**
 * Upper bound on the deviation capacity from a dynamic program that lets
 * the marginal generator of each coordinate depend on the running sum.
 * It dominates the exact value (which fixes one generator per coordinate)
 * and is only ever reported as a bound.
 */
inline double deviation_capacity_dp_bound(const DeviationQuery& q, double state_guard = kDefaultGuard) {
    q.validate();
    const std::size_t b = q.begin(), e = q.end(), len = e - b;
    std::vector<std::vector<double>> inc;
    for (std::size_t i = b; i < e; ++i) inc.push_back(q.increments(i));

    // reachable values per level
    std::vector<std::vector<double>> states(len + 1);
    states[0] = {0.0};
    for (std::size_t d = 0; d < len; ++d) {
        ValueDistribution tmp;
        for (double v : states[d])
            for (double s : inc[d]) tmp.emplace_back(v + s, 0.0);
        detail::compact(tmp);
        if (static_cast<double>(tmp.size()) > state_guard)
            throw GuardExceeded("deviation_capacity_dp_bound (states)", static_cast<double>(tmp.size()), state_guard);
        for (const auto& [v, p] : tmp) states[d + 1].push_back(v);
    }
    auto lookup = [](const std::vector<double>& vals, double v) {
        auto it = std::lower_bound(vals.begin(), vals.end(), v - 1e-12 * std::max(1.0, std::abs(v)));
        return static_cast<std::size_t>(it - vals.begin());
    };
    std::vector<double> value(states[len].size());
    for (std::size_t k = 0; k < value.size(); ++k) value[k] = q.exceeds(states[len][k]) ? 1.0 : 0.0;
    for (std::size_t d = len; d-- > 0;) {
        const auto& marg = q.model.marginal(b + d);
        std::vector<double> prev(states[d].size(), 0.0);
        for (std::size_t k = 0; k < states[d].size(); ++k) {
            for (std::size_t g = 0; g < marg.generator_count(); ++g) {
                const auto& row = marg.credal().generator(g);
                double acc = 0.0;
                for (std::size_t a = 0; a < row.size(); ++a)
                    if (row[a] > 0.0) acc += row[a] * value[lookup(states[d + 1], states[d][k] + inc[d][a])];
                prev[k] = std::max(prev[k], acc);
            }
        }
        value = std::move(prev);
    }
    return std::clamp(value[0], 0.0, 1.0);
}

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::vector<std::size_t> tuple;
    std::size_t candidates = 0;
    bool exhaustive = false;  // every generator tuple was screened
};

namespace detail {

/// Seeded inverse-CDF path sampler for one fixed generator tuple.
class PathSampler {
public:
    PathSampler(const DeviationQuery& q, std::span<const std::size_t> tuple) : q_(q) {
        for (std::size_t d = 0; d < tuple.size(); ++d) {
            const auto& row = q.model.marginal(q.begin() + d).credal().generator(tuple[d]);
            std::vector<double> cdf(row.size());
            double s = 0.0;
            for (std::size_t a = 0; a < row.size(); ++a) cdf[a] = (s += row[a]);
            cdf.back() = std::numeric_limits<double>::infinity();
            cdfs_.push_back(std::move(cdf));
            inc_.push_back(q.increments(q.begin() + d));
        }
    }

    /// Fraction of `samples` paths that land in the event.
    double frequency(std::size_t samples, std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::size_t hits = 0;
        for (std::size_t k = 0; k < samples; ++k) {
            double s = 0.0;
            for (std::size_t d = 0; d < cdfs_.size(); ++d) {
                double x = u(rng);
                auto a = static_cast<std::size_t>(std::upper_bound(cdfs_[d].begin(), cdfs_[d].end(), x) -
                                                  cdfs_[d].begin());
                s += inc_[d][a];
            }
            if (q_.exceeds(s)) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(samples);
    }

private:
    const DeviationQuery& q_;
    std::vector<std::vector<double>> cdfs_;
    std::vector<std::vector<double>> inc_;
};

}  // namespace detail

/**
 * Monte-Carlo estimate of a deviation capacity.
 *
 * Candidate generator tuples are screened with a tenth of the budget
 * (all tuples when there are at most `enumeration_limit`, otherwise random
 * tuples refined by a coordinate-swap hill climb); the winner is then
 * re-estimated with `samples` fresh paths. The outer maximization may be
 * incomplete, so the estimate is a lower-bound estimate of the capacity.
 */
inline McEstimate deviation_capacity_mc(const DeviationQuery& q, std::size_t samples, std::uint64_t seed,
                                        std::size_t enumeration_limit = 4096) {
    q.validate();
    if (samples == 0) throw ModelError("deviation_capacity_mc: samples must be at least 1");
    const std::size_t b = q.begin(), e = q.end(), len = e - b;
    std::mt19937_64 rng(seed);
    const std::size_t screen = std::max<std::size_t>(samples / 10, 100);

    McEstimate out;
    double max_abs = 0.0;
    for (std::size_t i = b; i < e; ++i) max_abs += std::abs(q.weight(i)) * (q.model.variable(i) - q.lambda(i)).sup_norm();
    if (max_abs <= q.epsilon) {
        out.tuple.assign(len, 0);
        out.exhaustive = true;
        return out;
    }

    std::vector<std::size_t> best;
    double best_freq = -1.0;
    auto score = [&](const std::vector<std::size_t>& t) {
        ++out.candidates;
        double f = detail::PathSampler(q, t).frequency(screen, rng);
        if (f > best_freq) {
            best_freq = f;
            best = t;
        }
        return f;
    };

    if (q.model.generator_count(b, e) <= static_cast<double>(enumeration_limit)) {
        out.exhaustive = true;
        for_each_tuple(q.model, b, e, [&](std::span<const std::size_t> t) { score({t.begin(), t.end()}); });
    } else {
        const std::size_t starts = std::max<std::size_t>(enumeration_limit / 64, 8);
        for (std::size_t k = 0; k < starts; ++k) {
            std::vector<std::size_t> t(len);
            for (std::size_t d = 0; d < len; ++d)
                t[d] = std::uniform_int_distribution<std::size_t>(0, q.model.generators_at(b + d) - 1)(rng);
            score(t);
        }
        for (int round = 0; round < 3; ++round) {
            bool improved = false;
            for (std::size_t d = 0; d < len; ++d) {
                for (std::size_t g = 0; g < q.model.generators_at(b + d); ++g) {
                    if (g == best[d]) continue;
                    auto t = best;
                    t[d] = g;
                    double before = best_freq;
                    score(t);
                    improved = improved || best_freq > before;
                }
            }
            if (!improved) break;
        }
    }

    out.tuple = best;
    out.estimate = detail::PathSampler(q, best).frequency(samples, rng);
    out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(samples));
    return out;
}

/// Provenance of a reported number.
enum class Provenance { exact, mc, dp_bound };

inline const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::exact: return "exact";
        case Provenance::mc: return "mc";
        case Provenance::dp_bound: return "dp-bound";
    }
    return "unknown";
}

/// E[(x - E x)^2] + (E x + E(-x))^2 for coordinate i.
inline double spread_constant(const ProductModel& product, std::size_t i) {
    const auto& m = product.marginal(i);
    const auto& x = product.variable(i);
    double ex = upper_expectation(m, x);
    double width = ex + upper_expectation(m, -x);
    return upper_expectation(m, (x - ex) * (x - ex)) + width * width;
}

/// Upper expectation of (sum_i w_i (x_i - lambda_i))^2 by enumeration of generator tuples.
inline double upper_second_moment(const DeviationQuery& q, double guard = kDefaultGuard) {
    q.validate();
    const std::size_t b = q.begin(), e = q.end();
    double work = q.model.generator_count(b, e);
    if (work > guard) throw GuardExceeded("upper_second_moment (generator tuples)", work, guard);
    std::vector<std::vector<double>> mean(e - b), var(e - b);
    for (std::size_t i = b; i < e; ++i) {
        auto inc = q.increments(i);
        const auto& marg = q.model.marginal(i);
        for (std::size_t g = 0; g < marg.generator_count(); ++g) {
            const auto& row = marg.credal().generator(g);
            double m1 = 0.0, m2 = 0.0;
            for (std::size_t a = 0; a < row.size(); ++a) {
                m1 += row[a] * inc[a];
                m2 += row[a] * inc[a] * inc[a];
            }
            mean[i - b].push_back(m1);
            var[i - b].push_back(m2 - m1 * m1);
        }
    }
    double best = 0.0;
    for_each_tuple(q.model, b, e, [&](std::span<const std::size_t> t) {
        double m = 0.0, v = 0.0;
        for (std::size_t d = 0; d < t.size(); ++d) {
            m += mean[d][t[d]];
            v += var[d][t[d]];
        }
        best = std::max(best, v + m * m);
    });
    return best;
}

struct RunOptions {
    double guard = kDefaultGuard;
    std::size_t mc_samples = 0;  // 0 disables the Monte-Carlo fallback
    std::uint64_t seed = 0;
};

struct WeakLLNRow {
    std::size_t n;
    double capacity;
    double std_error;  // 0 for exact rows
    double bound;      // sup_constant / (n eps^2)
    double markov_direct;  // E[(mean deviation)^2] / eps^2, NaN when not enumerable
    bool holds;
    Provenance provenance;
};

struct WeakLLNReport {
    double epsilon;
    double sup_constant;
    CenteringSequence centering;
    std::vector<WeakLLNRow> rows;
    bool all_hold = true;
    bool monotone = true;  // exact capacities nonincreasing in n
};

namespace detail {

/// Throws with a witness when two coordinates of the first n fail to be uncorrelated.
inline void require_pairwise_uncorrelated(const ProductModel& product, std::size_t n) {
    std::vector<std::size_t> uncertain;
    for (std::size_t i = 0; i < n; ++i)
        if (!product.mean_certain(i)) uncertain.push_back(i);
    auto check = [&](std::size_t i, std::size_t j) {
        auto cert = coordinate_certificate(product, i, j);
        if (!cert.holds)
            throw HypothesisViolation("coordinates " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                      " are not uncorrelated (witness mixture covariance " +
                                      std::to_string(cert.witness ? cert.witness->covariance : 0.0) + ")");
    };
    if (n <= 64) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) check(i, j);
    } else if (uncertain.size() >= 2) {
        // Product vertices have zero covariance; only pairs of mean-uncertain coordinates can fail.
        check(uncertain[0], uncertain[1]);
    }
}

}  // namespace detail

/**
 * Weak law of large numbers experiment: centers the coordinates, then
 * compares C(|(1/n) sum (x_i - lambda_i)| > eps) with sup_constant/(n eps^2)
 * for each n in `n_list`.
 */
inline WeakLLNReport weak_lln_run(const ProductModel& product, const std::vector<std::size_t>& n_list, double epsilon,
                                  const RunOptions& opt = {}) {
    if (n_list.empty()) throw ModelError("weak_lln_run: empty n list");
    if (!(epsilon > 0.0)) throw ModelError("weak_lln_run: epsilon must be positive");
    const std::size_t max_n = *std::max_element(n_list.begin(), n_list.end());
    if (max_n == 0 || max_n > product.horizon()) throw ModelError("weak_lln_run: n outside the model horizon");

    detail::require_pairwise_uncorrelated(product, max_n);

    WeakLLNReport rep;
    rep.epsilon = epsilon;
    rep.centering = sequential_centering(product, max_n);
    rep.sup_constant = 0.0;
    for (std::size_t i = 0; i < max_n; ++i) rep.sup_constant = std::max(rep.sup_constant, spread_constant(product, i));

    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : n_list) {
        if (n == 0) throw ModelError("weak_lln_run: n must be positive");
        DeviationQuery q{product, epsilon, 1, n, rep.centering.lambdas,
                         std::vector<double>(max_n, 1.0 / static_cast<double>(n))};
        WeakLLNRow row{n, 0.0, 0.0, rep.sup_constant / (static_cast<double>(n) * epsilon * epsilon),
                       std::numeric_limits<double>::quiet_NaN(), true, Provenance::exact};
        try {
            row.capacity = deviation_capacity_exact(q, opt.guard).capacity;
            row.markov_direct = upper_second_moment(q, opt.guard) / (epsilon * epsilon);
            row.holds = row.capacity <= row.bound + kResidualTolerance;
            if (row.capacity > prev + kTolerance) rep.monotone = false;
            prev = row.capacity;
        } catch (const GuardExceeded&) {
            if (opt.mc_samples == 0) throw;
            auto mc = deviation_capacity_mc(q, opt.mc_samples, opt.seed + n);
            row.capacity = mc.estimate;
            row.std_error = mc.std_error;
            row.provenance = Provenance::mc;
            row.holds = row.capacity - 3.0 * row.std_error <= row.bound;
        }
        rep.all_hold = rep.all_hold && row.holds;
        rep.rows.push_back(row);
    }
    return rep;
}

struct OttavianiReport {
    std::size_t n;
    double s;
    double t;
    double r;                           // min_k c(|S_n - S_k| <= s), k = 0..n-1
    std::vector<double> b_lower;        // c(|S_n - S_k| <= s) per k
    double lhs;                         // C(max_k |S_k| > s + t)
    double final_capacity;              // C(|S_n| > t)
    std::vector<double> a_capacities;   // C(A_k), k = 1..n
    double rhs;
    bool hypothesis_vacuous;            // r <= 0
    bool partition_verified;            // A_k disjoint with union {max |S_k| > s+t}
    bool holds;
};

/**
 * Exact check of the maximal inequality
 *   C(max_k |S_k| > s+t) <= C(|S_n| > t) + (1 - r) sum_k C(A_k)
 * on the first n coordinates, with S_k = sum_{i<=k} (x_i - lambda_i).
 */
inline OttavianiReport ottaviani_check(const ProductModel& product, std::size_t n, double s, double t,
                                       const std::optional<std::vector<double>>& lambdas = std::nullopt,
                                       double guard = kDefaultGuard) {
    if (n == 0 || n > product.horizon()) throw ModelError("ottaviani_check: n outside the model horizon");
    if (n > 31) throw ModelError("ottaviani_check: n too large for event bookkeeping");
    if (!(s > 0.0) || !(t > 0.0)) throw ModelError("ottaviani_check: s and t must be positive");
    if (lambdas && lambdas->size() < n) throw ModelError("ottaviani_check: too few lambdas");
    double work = product.generator_count(0, n) * product.atom_count(0, n);
    if (work > guard) throw GuardExceeded("ottaviani_check", work, guard);

    // bit 0: max |S_k| > s+t; bit 1: |S_n| > t; bits 2..n+1: A_k; bits n+2..2n+1: B_k (k = 0..n-1)
    const std::size_t events = 2 + 2 * n;
    auto paths = enumerate_paths(product, 0, n);
    std::vector<std::uint64_t> masks(paths.size(), 0);
    bool partition_ok = true;
    std::vector<double> partial(n + 1);
    for (std::size_t p = 0; p < paths.size(); ++p) {
        partial[0] = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            partial[i + 1] = partial[i] + product.variable(i)[paths[p][i]] - (lambdas ? (*lambdas)[i] : 0.0);
        std::uint64_t m = 0;
        double running = 0.0;
        int hits = 0;
        for (std::size_t k = 1; k <= n; ++k) {
            bool crosses = std::abs(partial[k]) > s + t;
            if (crosses && running <= s + t) {
                m |= std::uint64_t{1} << (1 + k);
                ++hits;
            }
            running = std::max(running, std::abs(partial[k]));
        }
        bool lhs = running > s + t;
        if (lhs) m |= 1;
        if (std::abs(partial[n]) > t) m |= 2;
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(partial[n] - partial[k]) <= s) m |= std::uint64_t{1} << (n + 2 + k);
        if (hits != (lhs ? 1 : 0)) partition_ok = false;
        masks[p] = m;
    }

    auto caps = path_event_capacities(product, 0, n, masks, events, guard);
    OttavianiReport rep;
    rep.n = n;
    rep.s = s;
    rep.t = t;
    rep.lhs = caps.upper[0];
    rep.final_capacity = caps.upper[1];
    rep.a_capacities.assign(caps.upper.begin() + 2, caps.upper.begin() + 2 + static_cast<long>(n));
    rep.b_lower.assign(caps.lower.begin() + 2 + static_cast<long>(n), caps.lower.end());
    rep.r = *std::min_element(rep.b_lower.begin(), rep.b_lower.end());
    double sum_a = 0.0;
    for (double c : rep.a_capacities) sum_a += c;
    rep.rhs = rep.final_capacity + (1.0 - rep.r) * sum_a;
    rep.hypothesis_vacuous = rep.r <= 0.0;
    rep.partition_verified = partition_ok;
    rep.holds = rep.lhs <= rep.rhs + kResidualTolerance;
    return rep;
}

}  // namespace sublin
