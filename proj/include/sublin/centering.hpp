#pragma once

#include "sublin/credal.hpp"
#include "sublin/dependence.hpp"
#include "sublin/product.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace sublin {

/// [-E(-x), E(x)]: the set of expectations of x over the dominated set.
struct CenteringInterval {
    double lo;
    double hi;
    bool contains(double v, double tol = kTolerance) const { return v >= lo - tol && v <= hi + tol; }
    double width() const { return hi - lo; }
};

inline CenteringInterval centering_interval(const SublinearModel& model, const RandomVariable& x) {
    return {lower_expectation(model, x), upper_expectation(model, x)};
}

/// lambda -> intercept + slope * lambda
struct EnvelopeLine {
    double intercept;
    double slope;
    double at(double lambda) const { return intercept + slope * lambda; }
};

inline double envelope_value(std::span<const EnvelopeLine> lines, double lambda) {
    double best = lines.front().at(lambda);
    for (const auto& l : lines.subspan(1)) best = std::max(best, l.at(lambda));
    return best;
}

/// Lines of f(lambda) = E[(x - lambda) y], one per generator.
inline std::vector<EnvelopeLine> objective_lines(const SublinearModel& model, const RandomVariable& x,
                                                 const RandomVariable& y) {
    auto mom = generator_moments(model, x, y);
    std::vector<EnvelopeLine> lines;
    lines.reserve(mom.size());
    for (const auto& m : mom) lines.push_back({m.mean_xy, -m.mean_y});
    return lines;
}

/// f(lambda) = E[(x - lambda) y], evaluated as the upper envelope of generator lines.
inline double objective_f(const SublinearModel& model, const RandomVariable& x, const RandomVariable& y,
                          double lambda) {
    require_same_space(x.space(), y.space());
    auto lines = objective_lines(model, x, y);
    return envelope_value(lines, lambda);
}

/**
 * Lipschitz constants of f. The operator bound max_g |E_g[y]| is always
 * valid; |E(y)| is valid only when it dominates it.
 */
struct LipschitzConstants {
    double operator_bound;
    double upper_mean_bound;
    bool upper_mean_valid;
};

inline LipschitzConstants lipschitz_constants(const SublinearModel& model, const RandomVariable& x,
                                              const RandomVariable& y) {
    require_same_space(x.space(), y.space());
    double op = 0.0;
    for (const auto& l : objective_lines(model, x, y)) op = std::max(op, std::abs(l.slope));
    double up = std::abs(upper_expectation(model, y));
    return {op, up, op <= up + kTolerance};
}

struct EnvelopeMinimum {
    double argmin;
    double value;
};

/**
 * Exact minimum of a convex piecewise-linear envelope over [lo, hi].
 *
 * The minimum is attained at an endpoint or at a crossing of two lines;
 * all such candidates are evaluated. When the minimizers form an interval
 * the largest one is returned.
 */
inline EnvelopeMinimum minimize_envelope(std::span<const EnvelopeLine> lines, double lo, double hi) {
    if (lines.empty()) throw ModelError("minimize_envelope: no lines");
    if (hi < lo) throw ModelError("minimize_envelope: empty interval");
    std::vector<double> cand{lo, hi};
    for (std::size_t a = 0; a < lines.size(); ++a)
        for (std::size_t b = a + 1; b < lines.size(); ++b) {
            double ds = lines[a].slope - lines[b].slope;
            if (ds == 0.0) continue;
            double x = (lines[b].intercept - lines[a].intercept) / ds;
            if (x > lo && x < hi) cand.push_back(x);
        }
    double best = envelope_value(lines, cand[0]);
    for (double c : cand) best = std::min(best, envelope_value(lines, c));
    EnvelopeMinimum out{lo, best};
    for (double c : cand)
        if (envelope_value(lines, c) <= best + kTolerance && c > out.argmin) out.argmin = c;
    out.argmin = std::clamp(out.argmin, lo, hi);
    return out;
}

struct LambdaSelection {
    double lambda_hat;
    double min_value;
    CenteringInterval interval;
};

namespace detail {

inline LambdaSelection select_from_lines(std::span<const EnvelopeLine> lines, CenteringInterval d) {
    auto m = minimize_envelope(lines, d.lo, d.hi);
    if (m.value > kResidualTolerance || m.value < -kResidualTolerance)
        throw HypothesisViolation("select_lambda: minimum of E[(x - lambda) y] over D is " + std::to_string(m.value) +
                                  ", expected 0");
    return {m.argmin, m.value, d};
}

}  // namespace detail

/**
 * Finds lambda in D = [-E(-x), E(x)] with E[(x - lambda) y] = 0.
 *
 * Requires x and y uncorrelated over the whole dominated set; this is
 * re-verified and a HypothesisViolation is thrown otherwise.
 */
inline LambdaSelection select_lambda(const SublinearModel& model, const RandomVariable& x, const RandomVariable& y) {
    auto cert = uncorrelated_certificate(model, x, y);
    if (!cert.holds)
        throw HypothesisViolation("select_lambda: variables are not uncorrelated (witness covariance " +
                                  std::to_string(cert.witness ? cert.witness->covariance : 0.0) + ")");
    auto lines = objective_lines(model, x, y);
    return detail::select_from_lines(lines, centering_interval(model, x));
}

/// Centering constants lambda_1..lambda_n with their intervals and orthogonality residuals.
struct CenteringSequence {
    std::vector<double> lambdas;
    std::vector<CenteringInterval> intervals;
    std::vector<double> residuals;
};

namespace detail {

inline HypothesisViolation at_index(std::size_t i, const std::exception& e) {
    return HypothesisViolation("sequential_centering at index " + std::to_string(i) + ": " + e.what());
}

}  // namespace detail

/**
 * lambda_1 = E(x_1); for i >= 2, lambda_i = select_lambda(x_i, S_{i-1}) with
 * S_{i-1} = sum_{j<i} (x_j - lambda_j). Works on any explicit model.
 */
inline CenteringSequence sequential_centering(const SublinearModel& model, std::span<const RandomVariable> xs) {
    if (xs.empty()) throw ModelError("sequential_centering: empty sequence");
    CenteringSequence seq;
    auto partial = RandomVariable::constant(model.space(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        auto d = centering_interval(model, xs[i]);
        double lambda = d.hi;
        double residual = 0.0;
        if (i > 0) {
            try {
                lambda = select_lambda(model, xs[i], partial).lambda_hat;
            } catch (const HypothesisViolation& e) {
                throw detail::at_index(i + 1, e);
            }
            residual = std::abs(upper_expectation(model, (xs[i] - lambda) * partial));
        }
        seq.lambdas.push_back(lambda);
        seq.intervals.push_back(d);
        seq.residuals.push_back(residual);
        partial = partial + (xs[i] - lambda);
    }
    return seq;
}

/**
 * Sequential centering on a product model without materializing it.
 *
 * Under a product generator x_i and S_{i-1} are independent, so
 * E_g[(x_i - lambda) S_{i-1}] = (m_i - lambda) * s where m_i is the mean of
 * x_i under g_i and s the mean of S_{i-1}. The envelope over all tuples is
 * therefore spanned by the extreme values of m_i and s, which are sums of
 * per-coordinate extremes.
 */
inline CenteringSequence sequential_centering(const ProductModel& product, std::size_t n = 0) {
    if (n == 0) n = product.horizon();
    if (n > product.horizon()) throw ModelError("sequential_centering: n exceeds product horizon");
    CenteringSequence seq;
    double s_lo = 0.0, s_hi = 0.0;  // range of generator means of S_{i-1}
    for (std::size_t i = 0; i < n; ++i) {
        auto [lo, hi] = product.mean_range(i);
        CenteringInterval d{lo, hi};
        double lambda = hi;
        double residual = 0.0;
        if (i > 0) {
            if (d.width() * (s_hi - s_lo) > kTolerance)
                throw HypothesisViolation("sequential_centering at index " + std::to_string(i + 1) +
                                          ": coordinate and partial sum are not uncorrelated (mixture covariance " +
                                          std::to_string(0.25 * d.width() * (s_hi - s_lo)) + ")");
            std::vector<EnvelopeLine> lines;
            for (double m : {lo, hi})
                for (double s : {s_lo, s_hi}) lines.push_back({m * s, -s});
            try {
                auto sel = detail::select_from_lines(lines, d);
                lambda = sel.lambda_hat;
                residual = std::abs(envelope_value(lines, lambda));
            } catch (const HypothesisViolation& e) {
                throw detail::at_index(i + 1, e);
            }
        }
        seq.lambdas.push_back(lambda);
        seq.intervals.push_back(d);
        seq.residuals.push_back(residual);
        s_lo += lo - lambda;
        s_hi += hi - lambda;
    }
    return seq;
}

}  // namespace sublin
