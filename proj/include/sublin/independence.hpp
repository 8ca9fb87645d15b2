#pragma once

#include "sublin/dependence.hpp"
#include "sublin/product.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sublin {

/// Hard cap on sigma-field cells per side (2^12 = 4096 events).
inline constexpr std::size_t kMaxSigmaCells = 12;

struct CapacityPairWitness {
    Event a;
    Event b;
    double capacity_ab;
    double capacity_product;  // C(A) * C(B)
};

struct CoordinatePairFailure {
    std::size_t i;
    std::size_t j;
    UncorrelatedCertificate certificate;
};

struct IndependenceReport {
    bool holds = false;
    bool capacity_condition = false;
    bool pairwise_uncorrelated = false;
    std::size_t left_cells = 0;
    std::size_t right_cells = 0;
    std::optional<CapacityPairWitness> worst;  // largest C(AB) - C(A)C(B)
    std::vector<CoordinatePairFailure> pair_failures;
};

namespace detail {

inline Event union_of(const std::vector<Event>& cells, std::uint32_t mask, const SpacePtr& space) {
    auto e = Event::empty(space);
    for (std::size_t c = 0; c < cells.size(); ++c)
        if (mask & (1u << c)) e = e | cells[c];
    return e;
}

}  // namespace detail

/**
 * Checks C(AB) <= C(A) C(B) for every A in sigma(x_1..x_split) and B in
 * sigma(x_{split+1}..x_n), plus pairwise uncorrelatedness of all
 * coordinates. `split` is 1-based: the past block is coordinates 1..split.
 */
inline IndependenceReport independence_check(const SublinearModel& joint, std::span<const RandomVariable> coords,
                                             std::size_t split, std::size_t max_cells = kMaxSigmaCells) {
    const std::size_t n = coords.size();
    if (split < 1 || split >= n) throw ModelError("independence_check: split must satisfy 1 <= m < n");
    max_cells = std::min(max_cells, kMaxSigmaCells);
    for (const auto& c : coords) require_same_space(joint.space(), c.space());

    auto left = sigma_atoms(coords.subspan(0, split));
    auto right = sigma_atoms(coords.subspan(split));
    if (left.size() > max_cells) throw GuardExceeded("independence_check (past sigma-field cells)", left.size(), max_cells);
    if (right.size() > max_cells)
        throw GuardExceeded("independence_check (future sigma-field cells)", right.size(), max_cells);

    const std::size_t la = left.size(), lb = right.size(), G = joint.generator_count();
    const std::uint32_t na = 1u << la, nb = 1u << lb;

    // cell-pair masses per generator
    std::vector<std::vector<double>> cell(G, std::vector<double>(la * lb, 0.0));
    std::vector<std::size_t> left_of(joint.space()->size()), right_of(joint.space()->size());
    for (std::size_t c = 0; c < la; ++c)
        for (auto a : left[c].members()) left_of[a] = c;
    for (std::size_t c = 0; c < lb; ++c)
        for (auto a : right[c].members()) right_of[a] = c;
    for (std::size_t g = 0; g < G; ++g) {
        const auto& row = joint.credal().generator(g);
        for (std::size_t a = 0; a < row.size(); ++a) cell[g][left_of[a] * lb + right_of[a]] += row[a];
    }

    auto subset_sums = [](std::span<const double> w, std::vector<double>& out) {
        out[0] = 0.0;
        for (std::uint32_t s = 1; s < out.size(); ++s) {
            auto low = static_cast<std::size_t>(__builtin_ctz(s));
            out[s] = out[s & (s - 1)] + w[low];
        }
    };

    std::vector<double> cap_a(na, 0.0), cap_b(nb, 0.0), tmp_a(na), tmp_b(nb);
    for (std::size_t g = 0; g < G; ++g) {
        std::vector<double> ml(la, 0.0), mr(lb, 0.0);
        for (std::size_t i = 0; i < la; ++i)
            for (std::size_t j = 0; j < lb; ++j) {
                ml[i] += cell[g][i * lb + j];
                mr[j] += cell[g][i * lb + j];
            }
        subset_sums(ml, tmp_a);
        subset_sums(mr, tmp_b);
        for (std::uint32_t s = 0; s < na; ++s) cap_a[s] = std::max(cap_a[s], tmp_a[s]);
        for (std::uint32_t s = 0; s < nb; ++s) cap_b[s] = std::max(cap_b[s], tmp_b[s]);
    }

    IndependenceReport rep;
    rep.left_cells = la;
    rep.right_cells = lb;
    rep.capacity_condition = true;
    double worst_gap = -1.0;
    std::uint32_t worst_a = 0, worst_b = 0;
    double worst_ab = 0.0;

    std::vector<std::vector<double>> rows(G, std::vector<double>(lb));
    std::vector<double> cap_ab(nb), sums(nb);
    for (std::uint32_t A = 0; A < na; ++A) {
        std::fill(cap_ab.begin(), cap_ab.end(), 0.0);
        for (std::size_t g = 0; g < G; ++g) {
            std::fill(rows[g].begin(), rows[g].end(), 0.0);
            for (std::size_t i = 0; i < la; ++i)
                if (A & (1u << i))
                    for (std::size_t j = 0; j < lb; ++j) rows[g][j] += cell[g][i * lb + j];
            subset_sums(rows[g], sums);
            for (std::uint32_t B = 0; B < nb; ++B) cap_ab[B] = std::max(cap_ab[B], sums[B]);
        }
        for (std::uint32_t B = 0; B < nb; ++B) {
            double gap = cap_ab[B] - cap_a[A] * cap_b[B];
            if (gap > kTolerance) rep.capacity_condition = false;
            if (gap > worst_gap) {
                worst_gap = gap;
                worst_a = A;
                worst_b = B;
                worst_ab = cap_ab[B];
            }
        }
    }
    rep.worst = CapacityPairWitness{detail::union_of(left, worst_a, joint.space()),
                                    detail::union_of(right, worst_b, joint.space()), worst_ab,
                                    cap_a[worst_a] * cap_b[worst_b]};

    rep.pairwise_uncorrelated = true;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            auto cert = uncorrelated_certificate(joint, coords[i], coords[j]);
            if (!cert.holds) {
                rep.pairwise_uncorrelated = false;
                rep.pair_failures.push_back({i, j, std::move(cert)});
            }
        }
    rep.holds = rep.capacity_condition && rep.pairwise_uncorrelated;
    return rep;
}

inline IndependenceReport independence_check(const ProductModel& product, std::size_t split,
                                             std::size_t max_cells = kMaxSigmaCells,
                                             double atom_guard = kDefaultAtomGuard) {
    auto joint = product.materialize(atom_guard);
    return independence_check(joint.model, joint.coordinates, split, max_cells);
}

/**
 * Uncorrelatedness certificate for coordinates i and j (0-based) of a
 * product model. Only the two-coordinate sub-product matters: any mixture
 * of joint generators projects to a mixture over (g_i, g_j) pairs with the
 * same first and mixed moments of (x_i, x_j). Witness weights index the
 * sub-product's generators (g_i major).
 */
inline UncorrelatedCertificate coordinate_certificate(const ProductModel& product, std::size_t i, std::size_t j) {
    if (i == j || i >= product.horizon() || j >= product.horizon())
        throw ModelError("coordinate_certificate: need two distinct coordinates");
    ProductModel pair(std::vector<Factor>{product.factor(i), product.factor(j)});
    auto joint = pair.materialize();
    return uncorrelated_certificate(joint.model, joint.coordinates[0], joint.coordinates[1]);
}

}  // namespace sublin
