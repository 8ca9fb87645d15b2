#pragma once

// Independent brute-force references. Nothing here calls the library's
// evaluation code: joint distributions are built by explicit nested loops.

#include "sublin/credal.hpp"
#include "sublin/space.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

/// Dirichlet(alpha) row of length k.
inline std::vector<double> dirichlet(std::size_t k, double alpha, std::mt19937_64& rng) {
    std::gamma_distribution<double> g(alpha, 1.0);
    std::vector<double> w(k);
    double s = 0.0;
    while (!(s > 0.0)) {
        s = 0.0;
        for (auto& v : w) s += (v = g(rng));
    }
    for (auto& v : w) v /= s;
    return w;
}

/// Random generator matrix: m rows over k atoms, exact row sums. A single atom admits one row only.
inline Matrix random_generators(std::size_t k, std::size_t m, std::mt19937_64& rng) {
    Matrix rows;
    if (k == 1) m = 1;
    for (std::size_t g = 0; g < m; ++g) {
        auto r = dirichlet(k, g % 2 ? 0.5 : 1.0, rng);
        double s = 0.0;
        for (std::size_t a = 0; a + 1 < k; ++a) s += r[a];
        r[k - 1] = std::max(0.0, 1.0 - s);
        rows.push_back(r);
    }
    return rows;
}

inline sublin::SublinearModel make_model(const Matrix& rows) {
    auto space = sublin::make_indexed_space(rows.front().size());
    return sublin::SublinearModel(sublin::CredalSet::normalized(space, rows));
}

inline double dot(const std::vector<double>& p, const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += p[i] * x[i];
    return s;
}

inline double upper(const Matrix& gens, const std::vector<double>& x) {
    double best = -INFINITY;
    for (const auto& g : gens) best = std::max(best, dot(g, x));
    return best;
}

/**
 * Product model given per coordinate by (generators, values). The event is a
 * predicate on the realized value vector. Returns max and min mass over all
 * generator tuples.
 */
struct Coordinate {
    Matrix generators;
    std::vector<double> values;
};

struct Capacities {
    double upper = 0.0;
    double lower = 1.0;
};

inline Capacities product_capacity(const std::vector<Coordinate>& coords,
                                   const std::function<bool(const std::vector<double>&)>& event) {
    const std::size_t n = coords.size();
    Capacities out;
    std::vector<std::size_t> tuple(n, 0);
    while (true) {
        double mass = 0.0;
        std::vector<std::size_t> atom(n, 0);
        std::vector<double> xs(n);
        while (true) {
            double p = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                p *= coords[i].generators[tuple[i]][atom[i]];
                xs[i] = coords[i].values[atom[i]];
            }
            if (p > 0.0 && event(xs)) mass += p;
            std::size_t i = n;
            while (i > 0 && ++atom[i - 1] == coords[i - 1].values.size()) atom[--i] = 0;
            if (i == 0) break;
        }
        out.upper = std::max(out.upper, mass);
        out.lower = std::min(out.lower, mass);
        std::size_t i = n;
        while (i > 0 && ++tuple[i - 1] == coords[i - 1].generators.size()) tuple[--i] = 0;
        if (i == 0) break;
    }
    return out;
}

/// Covariance of (x, y) under the mixture sum_g w_g P_g, computed from the mixed measure itself.
inline double mixture_covariance(const Matrix& gens, const std::vector<double>& w, const std::vector<double>& x,
                                 const std::vector<double>& y) {
    std::vector<double> mu(x.size(), 0.0);
    for (std::size_t g = 0; g < gens.size(); ++g)
        for (std::size_t a = 0; a < x.size(); ++a) mu[a] += w[g] * gens[g][a];
    std::vector<double> xy(x.size());
    for (std::size_t a = 0; a < x.size(); ++a) xy[a] = x[a] * y[a];
    return dot(mu, xy) - dot(mu, x) * dot(mu, y);
}

/// Largest |covariance| over `trials` Dirichlet mixtures plus all vertices.
inline double sampled_max_covariance(const Matrix& gens, const std::vector<double>& x, const std::vector<double>& y,
                                     std::size_t trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double best = 0.0;
    for (std::size_t g = 0; g < gens.size(); ++g) {
        std::vector<double> w(gens.size(), 0.0);
        w[g] = 1.0;
        best = std::max(best, std::abs(mixture_covariance(gens, w, x, y)));
    }
    for (std::size_t t = 0; t < trials; ++t) {
        auto w = dirichlet(gens.size(), t % 2 ? 0.2 : 1.0, rng);
        best = std::max(best, std::abs(mixture_covariance(gens, w, x, y)));
    }
    return best;
}

inline const Matrix& e1_generators() {
    static const Matrix m{{0.5, 0.5}, {0.6, 0.4}};
    return m;
}

inline const Matrix& e2_generators() {
    static const Matrix m{{0.5, 0.0, 0.5}, {0.25, 0.5, 0.25}};
    return m;
}

inline sublin::SublinearModel e1() {
    return sublin::SublinearModel(sublin::CredalSet(sublin::make_space({"H", "T"}), e1_generators()));
}

inline sublin::SublinearModel e2() {
    return sublin::SublinearModel(sublin::CredalSet(sublin::make_space({"-1", "0", "1"}), e2_generators()));
}

/// Two-coordinate E1 x mean-one model: x = coordinate 1 (+-1), y = coordinate 2 with values 0, 1, 2.
struct E1MeanOne {
    sublin::SublinearModel model;
    sublin::RandomVariable x;
    sublin::RandomVariable y;
};

inline E1MeanOne e1_mean_one(double eta_sign = 1.0) {
    const Matrix eta{{0.25, 0.5, 0.25}, {0.5, 0.0, 0.5}};
    Matrix joint;
    for (const auto& a : e1_generators())
        for (const auto& b : eta) {
            std::vector<double> row;
            for (double pa : a)
                for (double pb : b) row.push_back(pa * pb);
            joint.push_back(row);
        }
    auto space = sublin::make_space({"H0", "H1", "H2", "T0", "T1", "T2"});
    sublin::SublinearModel m(sublin::CredalSet(space, joint));
    std::vector<double> y{0, 1, 2, 0, 1, 2};
    for (auto& v : y) v *= eta_sign;
    return {m, sublin::RandomVariable(space, {1, 1, 1, -1, -1, -1}), sublin::RandomVariable(space, y)};
}

}  // namespace oracle
