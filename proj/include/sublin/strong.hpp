#pragma once

#include "sublin/centering.hpp"
#include "sublin/enumeration.hpp"
#include "sublin/lln.hpp"
#include "sublin/product.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace sublin {

struct KroneckerResult {
    std::vector<double> weighted_partial_sums;  // sum_{i<=n} x_i / i^p
    std::vector<double> trajectory;             // (1/n^p) sum_{i<=n} x_i
    double oscillation;                         // max - min of weighted sums over the trailing window
    bool converges;                             // oscillation <= tolerance
};

/**
 * Weighted partial sums of x_i / i^p and the normalized trajectory
 * (1/n^p) sum x_i. Convergence of the weighted series is judged by a
 * Cauchy test over the trailing `window` fraction of the horizon.
 */
inline KroneckerResult kronecker_transform(std::span<const double> x, double p, double tolerance = 1e-3,
                                           double window = 0.5) {
    if (!(p > 1.0)) throw ModelError("kronecker_transform: p must exceed 1");
    if (x.empty()) throw ModelError("kronecker_transform: empty series");
    KroneckerResult out;
    out.weighted_partial_sums.reserve(x.size());
    out.trajectory.reserve(x.size());
    double w = 0.0, plain = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double np = std::pow(static_cast<double>(i + 1), p);
        w += x[i] / np;
        plain += x[i];
        out.weighted_partial_sums.push_back(w);
        out.trajectory.push_back(plain / np);
    }
    auto start = static_cast<std::size_t>(std::floor((1.0 - window) * static_cast<double>(x.size())));
    start = std::min(start, x.size() - 1);
    auto [lo, hi] = std::minmax_element(out.weighted_partial_sums.begin() + static_cast<long>(start),
                                        out.weighted_partial_sums.end());
    out.oscillation = *hi - *lo;
    out.converges = out.oscillation <= tolerance;
    return out;
}

/// w_i = 1 / i^p for i = 1..n.
inline std::vector<double> power_weights(std::size_t n, double p) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), p);
    return w;
}

struct CauchyRow {
    std::size_t m;
    std::size_t n;
    double capacity;       // C(|sum_{i=m}^n w_i (x_i - lambda_i)| > eps)
    double std_error;
    double variance_term;  // (1/eps^2) sum_{i=m}^n w_i^2 E(x_i - lambda_i)^2
    double cross_term;     // (2/eps^2) (sum_{j=m+1}^n M w_j)(sum_{i=1}^{m-1} M w_i)
    double bound;
    bool holds;
    Provenance provenance;
    // auxiliary constant for the pair (sum_{j=m+1}^n w_j x_j, -sum_{i<m} w_i (x_i - lambda_i))
    bool auxiliary_available;
    double lambda_nm;
    CenteringInterval lambda_interval;   // [-E(-X), E(X)]
    CenteringInterval subadditive_range;  // [sum -E(-w_j x_j), sum E(w_j x_j)]
    bool lambda_contained;
};

struct TrajectorySummary {
    std::size_t generator;  // every coordinate uses this marginal generator (mod its count)
    double final_value;     // (1/N^p) sum (x_i - lambda_i)
    double weighted_limit;  // last weighted partial sum
    double oscillation;
    bool converges;
};

struct StrongLLNReport {
    double p;
    double epsilon;
    std::size_t horizon;
    std::vector<double> scaled_lambdas;  // constants for x_i / i^p
    std::vector<double> lambdas;         // i^p times the scaled constants
    bool lambdas_in_interval = true;
    double bound_m;                      // sup_i [E(x_i) + E(-x_i)]
    double hypothesis_sum;               // sum_i i^{-2p} E(x_i - E x_i)^2 up to the horizon
    double hypothesis_decay;             // log-log slope of the summands over the last half of the horizon
    bool hypothesis_converging;          // slope below -1
    bool vacuous;                        // uniformly bounded coordinates: n^-p normalization is deterministic
    double deterministic_bound;          // 2 sup|x_i| N^{1-p}
    std::vector<CauchyRow> rows;
    std::vector<TrajectorySummary> trajectories;
    bool all_hold = true;
};

struct StrongRunOptions {
    double guard = kDefaultGuard;
    std::size_t mc_samples = 0;
    std::uint64_t seed = 0;
    double kronecker_tolerance = 1e-3;
};

/**
 * Strong-law diagnostics at a finite horizon (the model's horizon):
 * centering of the scaled coordinates x_i / i^p, the Cauchy-in-capacity
 * table against the bound chain for the given (m, n) pairs, the auxiliary
 * constants lambda_{n,m}, and Kronecker trajectories sampled under the
 * extreme generator tuples.
 */
inline StrongLLNReport strong_lln_run(const ProductModel& product, double p, double epsilon,
                                      const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                      const StrongRunOptions& opt = {}) {
    if (!(p > 1.0)) throw ModelError("strong_lln_run: p must exceed 1");
    if (!(epsilon > 0.0)) throw ModelError("strong_lln_run: epsilon must be positive");
    const std::size_t N = product.horizon();
    for (auto [m, n] : pairs)
        if (m < 1 || m >= n || n > N) throw ModelError("strong_lln_run: need 1 <= m < n <= horizon");

    StrongLLNReport rep;
    rep.p = p;
    rep.epsilon = epsilon;
    rep.horizon = N;
    const auto w = power_weights(N, p);
    auto scaled = product.scaled(w);
    auto seq = sequential_centering(scaled);
    rep.scaled_lambdas = seq.lambdas;
    rep.lambdas.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        rep.lambdas[i] = seq.lambdas[i] / w[i];
        auto [lo, hi] = product.mean_range(i);
        if (!CenteringInterval{lo, hi}.contains(rep.lambdas[i], 1e-9 * std::max(1.0, std::abs(hi))))
            rep.lambdas_in_interval = false;
    }

    // Per-coordinate constants.
    rep.bound_m = 0.0;
    rep.hypothesis_sum = 0.0;
    double sup_first = 0.0, sup_second = 0.0;
    std::vector<double> terms(N);
    std::vector<double> sq_dev(N);  // E(x_i - lambda_i)^2
    for (std::size_t i = 0; i < N; ++i) {
        const auto& marg = product.marginal(i);
        const auto& x = product.variable(i);
        double ex = upper_expectation(marg, x);
        rep.bound_m = std::max(rep.bound_m, ex + upper_expectation(marg, -x));
        double term = w[i] * w[i] * upper_expectation(marg, (x - ex) * (x - ex));
        rep.hypothesis_sum += term;
        terms[i] = term;
        sq_dev[i] = upper_expectation(marg, (x - rep.lambdas[i]) * (x - rep.lambdas[i]));
        (2 * i < N ? sup_first : sup_second) = std::max(2 * i < N ? sup_first : sup_second, x.sup_norm());
    }
    const std::size_t half = std::max<std::size_t>(N / 2, 1);
    if (terms[N - 1] <= 0.0 || N < 2)
        rep.hypothesis_decay = -std::numeric_limits<double>::infinity();
    else if (terms[half - 1] <= 0.0)
        rep.hypothesis_decay = std::numeric_limits<double>::infinity();
    else
        rep.hypothesis_decay = std::log(terms[N - 1] / terms[half - 1]) /
                               std::log(static_cast<double>(N) / static_cast<double>(half));
    rep.hypothesis_converging = rep.hypothesis_decay < -1.0 - 1e-9;
    rep.vacuous = sup_second <= sup_first * (1.0 + kTolerance);
    rep.deterministic_bound = 2.0 * std::max(sup_first, sup_second) * std::pow(static_cast<double>(N), 1.0 - p);

    const double eps2 = epsilon * epsilon;
    for (auto [m, n] : pairs) {
        CauchyRow row{};
        row.m = m;
        row.n = n;
        for (std::size_t i = m - 1; i < n; ++i) row.variance_term += w[i] * w[i] * sq_dev[i];
        row.variance_term /= eps2;
        double tail_w = 0.0, head_w = 0.0;
        for (std::size_t j = m; j < n; ++j) tail_w += rep.bound_m * w[j];
        for (std::size_t i = 0; i + 1 < m; ++i) head_w += rep.bound_m * w[i];
        row.cross_term = 2.0 / eps2 * tail_w * head_w;
        row.bound = row.variance_term + row.cross_term;

        DeviationQuery q{product, epsilon, m, n, rep.lambdas, w};
        row.provenance = Provenance::exact;
        try {
            row.capacity = deviation_capacity_exact(q, opt.guard).capacity;
            row.holds = row.capacity <= row.bound + kResidualTolerance;
        } catch (const GuardExceeded&) {
            if (opt.mc_samples == 0) throw;
            auto mc = deviation_capacity_mc(q, opt.mc_samples, opt.seed + 1000 * m + n);
            row.capacity = mc.estimate;
            row.std_error = mc.std_error;
            row.provenance = Provenance::mc;
            row.holds = row.capacity - 3.0 * row.std_error <= row.bound;
        }

        // X = sum_{j=m+1}^n w_j x_j and Y = -sum_{i<m} w_i (x_i - lambda_i) live on disjoint
        // coordinates, so under a product generator E[(X - l) Y] = (E X - l)(E Y).
        double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0, sub_lo = 0.0, sub_hi = 0.0;
        for (std::size_t j = m; j < n; ++j) {
            auto [lo, hi] = scaled.mean_range(j);
            x_lo += lo;
            x_hi += hi;
            sub_lo += lower_expectation(scaled.marginal(j), scaled.variable(j));
            sub_hi += upper_expectation(scaled.marginal(j), scaled.variable(j));
        }
        for (std::size_t i = 0; i + 1 < m; ++i) {
            auto [lo, hi] = scaled.mean_range(i);
            y_lo -= hi - seq.lambdas[i];
            y_hi -= lo - seq.lambdas[i];
        }
        row.lambda_interval = {x_lo, x_hi};
        row.subadditive_range = {sub_lo, sub_hi};
        row.auxiliary_available = (x_hi - x_lo) * (y_hi - y_lo) <= kTolerance;
        row.lambda_nm = std::numeric_limits<double>::quiet_NaN();
        if (row.auxiliary_available) {
            std::vector<EnvelopeLine> lines;
            for (double xm : {x_lo, x_hi})
                for (double ym : {y_lo, y_hi}) lines.push_back({xm * ym, -ym});
            try {
                row.lambda_nm = detail::select_from_lines(lines, row.lambda_interval).lambda_hat;
            } catch (const HypothesisViolation&) {
                row.auxiliary_available = false;
            }
        }
        row.lambda_contained = row.auxiliary_available && row.lambda_interval.contains(row.lambda_nm) &&
                               row.subadditive_range.contains(row.lambda_interval.lo) &&
                               row.subadditive_range.contains(row.lambda_interval.hi);
        rep.all_hold = rep.all_hold && row.holds && row.lambda_contained;
        rep.rows.push_back(row);
    }

    // Kronecker trajectories under the extreme tuples (all coordinates on generator j).
    std::size_t max_gens = 0;
    for (std::size_t i = 0; i < N; ++i) max_gens = std::max(max_gens, product.generators_at(i));
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t j = 0; j < max_gens; ++j) {
        std::vector<double> path(N);
        for (std::size_t i = 0; i < N; ++i) {
            const auto& row = product.marginal(i).credal().generator(j % product.generators_at(i));
            double r = u(rng), acc = 0.0;
            std::size_t a = 0;
            for (; a + 1 < row.size(); ++a) {
                acc += row[a];
                if (r < acc) break;
            }
            path[i] = product.variable(i)[a] - rep.lambdas[i];
        }
        auto k = kronecker_transform(path, p, opt.kronecker_tolerance);
        rep.trajectories.push_back(
            {j, k.trajectory.back(), k.weighted_partial_sums.back(), k.oscillation, k.converges});
    }
    return rep;
}

/**
 * Exact C(max_{base < i <= j <= N} |sum_{k=i}^j w_k (x_k - lambda_k)| > eps).
 * With prefix sums T (T_base = 0) the inner maximum is max T - min T over
 * T_base..T_N, so only coordinates base+1..N are enumerated.
 */
inline double tail_sup_capacity(const ProductModel& product, const std::vector<double>& lambdas,
                                const std::vector<double>& weights, std::size_t horizon, std::size_t base,
                                double epsilon, double guard = kDefaultGuard) {
    if (!(epsilon > 0.0)) throw ModelError("tail_sup_capacity: epsilon must be positive");
    if (horizon == 0 || horizon > product.horizon()) throw ModelError("tail_sup_capacity: horizon out of range");
    if ((!lambdas.empty() && lambdas.size() < horizon) || (!weights.empty() && weights.size() < horizon))
        throw ModelError("tail_sup_capacity: need lambdas and weights up to the horizon");
    if (base + 1 >= horizon) return 0.0;  // at most one term: a single-index window
    auto paths = enumerate_paths(product, base, horizon);
    std::vector<std::uint64_t> masks(paths.size(), 0);
    for (std::size_t p = 0; p < paths.size(); ++p) {
        double t = 0.0, lo = 0.0, hi = 0.0;
        for (std::size_t d = 0; d < paths[p].size(); ++d) {
            std::size_t i = base + d;
            double wi = weights.empty() ? 1.0 : weights[i];
            double li = lambdas.empty() ? 0.0 : lambdas[i];
            t += wi * (product.variable(i)[paths[p][d]] - li);
            lo = std::min(lo, t);
            hi = std::max(hi, t);
        }
        if (hi - lo > epsilon) masks[p] = 1;
    }
    return path_event_capacities(product, base, horizon, masks, 1, guard).upper[0];
}

struct CauchyChain {
    std::vector<std::size_t> indices;     // n_1 < n_2 < ...
    std::vector<double> link_capacities;  // C(|x_{n_{k+1}} - x_{n_k}| > 2^-k)
    bool stalled = false;
};

/// C(|x_b - x_a| > threshold) for indices a < b.
using DifferenceOracle = std::function<double(std::size_t a, std::size_t b, double threshold)>;

/**
 * Greedy subsequence with C(|x_{n_{k+1}} - x_{n_k}| > 2^-k) < 2^-k: starting
 * from n_1 = 1, each next index is the smallest one satisfying the rule.
 * Stops after `target_links` links (0 = run to the horizon) and flags a
 * stall when no index up to the horizon qualifies.
 */
inline CauchyChain cauchy_subsequence(const DifferenceOracle& oracle, std::size_t horizon,
                                      std::size_t target_links = 0) {
    CauchyChain chain;
    chain.indices.push_back(1);
    for (std::size_t k = 1;; ++k) {
        if (target_links != 0 && chain.link_capacities.size() >= target_links) break;
        std::size_t cur = chain.indices.back();
        if (cur >= horizon) break;
        double thr = std::ldexp(1.0, -static_cast<int>(k));
        bool found = false;
        for (std::size_t next = cur + 1; next <= horizon; ++next) {
            double c = oracle(cur, next, thr);
            if (c < thr) {
                chain.indices.push_back(next);
                chain.link_capacities.push_back(c);
                found = true;
                break;
            }
        }
        if (!found) {
            chain.stalled = true;
            break;
        }
    }
    return chain;
}

/// Oracle over partial sums S_k = sum_{i<=k} w_i (x_i - lambda_i) of a product model, by exact enumeration.
inline DifferenceOracle partial_sum_oracle(const ProductModel& product, std::vector<double> lambdas,
                                          std::vector<double> weights, double guard = kDefaultGuard) {
    return [product, lambdas = std::move(lambdas), weights = std::move(weights), guard](
               std::size_t a, std::size_t b, double threshold) {
        DeviationQuery q{product, threshold, a + 1, b, lambdas, weights};
        return deviation_capacity_exact(q, guard).capacity;
    };
}

}  // namespace sublin
