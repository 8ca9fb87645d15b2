#pragma once

#include "sublin/credal.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace sublin {

/**
 * Coarsest partition of the space on which every variable in `rvs` is
 * constant. Cells are ordered by their smallest atom.
 */
inline std::vector<Event> sigma_atoms(std::span<const RandomVariable> rvs) {
    if (rvs.empty()) throw ModelError("sigma_atoms: empty random variable list");
    const auto& space = rvs.front().space();
    for (const auto& x : rvs) require_same_space(space, x.space());

    std::map<std::vector<double>, std::size_t> cell_of;
    std::vector<std::vector<bool>> masks;
    for (std::size_t a = 0; a < space->size(); ++a) {
        std::vector<double> key;
        key.reserve(rvs.size());
        for (const auto& x : rvs) key.push_back(x[a]);
        auto [it, fresh] = cell_of.emplace(std::move(key), masks.size());
        if (fresh) masks.emplace_back(space->size(), false);
        masks[it->second][a] = true;
    }
    std::vector<Event> cells;
    cells.reserve(masks.size());
    for (auto& m : masks) cells.emplace_back(space, std::move(m));
    return cells;
}

inline std::vector<Event> sigma_atoms(std::initializer_list<RandomVariable> rvs) {
    return sigma_atoms(std::span<const RandomVariable>(rvs.begin(), rvs.size()));
}

struct VertexFailure {
    std::size_t generator;
    double covariance;
};

struct PairFailure {
    std::size_t i;
    std::size_t j;
    double delta_xi;
    double delta_eta;
};

struct WitnessMixture {
    std::vector<double> weights;  // over generators
    double covariance;
};

struct UncorrelatedCertificate {
    bool holds = true;
    std::vector<VertexFailure> vertex_failures;
    std::vector<PairFailure> pair_failures;
    std::optional<WitnessMixture> witness;
};

/// Moments of (x, y) under one linear expectation.
struct PairMoments {
    double mean_x;
    double mean_y;
    double mean_xy;
    double covariance() const { return mean_xy - mean_x * mean_y; }
};

inline std::vector<PairMoments> generator_moments(const SublinearModel& model, const RandomVariable& x,
                                                  const RandomVariable& y) {
    auto ex = model.generator_expectations(x);
    auto ey = model.generator_expectations(y);
    auto exy = model.generator_expectations(x * y);
    std::vector<PairMoments> out(ex.size());
    for (std::size_t g = 0; g < out.size(); ++g) out[g] = {ex[g], ey[g], exy[g]};
    return out;
}

/// Covariance of (x, y) under the mixture sum_g w_g * generator_g.
inline double mixture_covariance(std::span<const PairMoments> moments, std::span<const double> weights) {
    double mx = 0.0, my = 0.0, mxy = 0.0;
    for (std::size_t g = 0; g < moments.size(); ++g) {
        mx += weights[g] * moments[g].mean_x;
        my += weights[g] * moments[g].mean_y;
        mxy += weights[g] * moments[g].mean_xy;
    }
    return mxy - mx * my;
}

/**
 * Exact test of E_mu[x y] = E_mu[x] E_mu[y] for every mu in the convex hull
 * of the generators.
 *
 * Under a mixture with weights w the covariance expands as
 *   sum_g w_g cov_g + 1/2 sum_{g,h} w_g w_h (x_g - x_h)(y_g - y_h),
 * where x_g, y_g are generator means. It vanishes on the whole simplex iff
 * every vertex covariance is zero and every pair has (x_g - x_h)(y_g - y_h) = 0.
 */
inline UncorrelatedCertificate uncorrelated_certificate(const SublinearModel& model, const RandomVariable& x,
                                                        const RandomVariable& y) {
    require_same_space(model.space(), x.space());
    require_same_space(model.space(), y.space());
    auto mom = generator_moments(model, x, y);
    const std::size_t m = mom.size();

    UncorrelatedCertificate cert;
    for (std::size_t g = 0; g < m; ++g) {
        double c = mom[g].covariance();
        if (std::abs(c) > kTolerance) cert.vertex_failures.push_back({g, c});
    }
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            double dx = mom[i].mean_x - mom[j].mean_x;
            double dy = mom[i].mean_y - mom[j].mean_y;
            if (std::abs(dx * dy) > kTolerance) cert.pair_failures.push_back({i, j, dx, dy});
        }
    cert.holds = cert.vertex_failures.empty() && cert.pair_failures.empty();
    if (cert.holds) return cert;

    // Witness: the failing vertex or pair midpoint with the largest |covariance|.
    std::vector<double> w(m, 0.0);
    WitnessMixture best{std::vector<double>(m, 0.0), 0.0};
    auto consider = [&](const std::vector<double>& weights) {
        double c = mixture_covariance(mom, weights);
        if (std::abs(c) > std::abs(best.covariance)) best = {weights, c};
    };
    for (const auto& f : cert.vertex_failures) {
        std::fill(w.begin(), w.end(), 0.0);
        w[f.generator] = 1.0;
        consider(w);
    }
    for (const auto& f : cert.pair_failures) {
        std::fill(w.begin(), w.end(), 0.0);
        w[f.i] = 0.5;
        w[f.j] = 0.5;
        consider(w);
    }
    cert.witness = std::move(best);
    return cert;
}

struct SampledCovariance {
    double max_abs_covariance = 0.0;
    std::vector<double> worst_weights;
};

/**
 * Brute-force search of the dominated set: evaluates the covariance at
 * `trials` random mixtures of the generators.
 *
 * Weights are Dirichlet draws (normalized Gamma variates from a seeded
 * mt19937_64). Even trials use concentration 1 (uniform on the simplex),
 * odd trials concentration 0.2, which favours faces and edges.
 */
inline SampledCovariance uncorrelated_sampled(const SublinearModel& model, const RandomVariable& x,
                                              const RandomVariable& y, std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw ModelError("uncorrelated_sampled: trials must be at least 1");
    auto mom = generator_moments(model, x, y);
    const std::size_t m = mom.size();
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> flat(1.0, 1.0), sparse(0.2, 1.0);

    SampledCovariance out;
    out.worst_weights.assign(m, 0.0);
    out.worst_weights[0] = 1.0;
    out.max_abs_covariance = std::abs(mom[0].covariance());
    std::vector<double> w(m);
    for (std::size_t t = 0; t < trials; ++t) {
        double sum = 0.0;
        for (auto& v : w) {
            v = (t % 2 == 0) ? flat(rng) : sparse(rng);
            sum += v;
        }
        if (!(sum > 0.0)) continue;
        for (auto& v : w) v /= sum;
        double c = std::abs(mixture_covariance(mom, w));
        if (c > out.max_abs_covariance) {
            out.max_abs_covariance = c;
            out.worst_weights = w;
        }
    }
    return out;
}

}  // namespace sublin
