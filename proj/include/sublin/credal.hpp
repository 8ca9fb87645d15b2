#pragma once

#include "sublin/errors.hpp"
#include "sublin/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sublin {

using Distribution = std::vector<double>;

/**
 * Finite family of probability vectors (generators) over a sample space.
 *
 * The set of linear expectations dominated by the induced sublinear
 * expectation is the convex hull of the generators.
 */
class CredalSet {
public:
    CredalSet(SpacePtr space, std::vector<Distribution> generators)
        : space_(std::move(space)), generators_(std::move(generators)) {
        if (!space_) throw ModelError("credal set without a sample space");
        if (generators_.empty()) throw ModelError("credal set needs at least one generator");
        for (std::size_t g = 0; g < generators_.size(); ++g) {
            const auto& row = generators_[g];
            if (row.size() != space_->size())
                throw ModelError("generator " + std::to_string(g) + " has " + std::to_string(row.size()) +
                                 " entries for " + std::to_string(space_->size()) + " atoms");
            double sum = 0.0;
            for (double v : row) {
                if (!std::isfinite(v) || v < 0.0)
                    throw ModelError("generator " + std::to_string(g) + " has a negative or non-finite entry");
                sum += v;
            }
            if (std::abs(sum - 1.0) > kTolerance)
                throw ModelError("generator " + std::to_string(g) + " sums to " + std::to_string(sum));
            for (std::size_t h = 0; h < g; ++h)
                if (generators_[h] == row)
                    throw ModelError("generator " + std::to_string(g) + " duplicates generator " +
                                     std::to_string(h));
        }
    }

    /// Rescales each row to sum 1 after checking it is within `tolerance` of 1.
    static CredalSet normalized(SpacePtr space, std::vector<Distribution> rows, double tolerance = kLoadTolerance) {
        for (std::size_t g = 0; g < rows.size(); ++g) {
            double sum = std::accumulate(rows[g].begin(), rows[g].end(), 0.0);
            if (std::abs(sum - 1.0) > tolerance)
                throw ModelError("generator row " + std::to_string(g) + " sums to " + std::to_string(sum) +
                                 ", expected 1");
            for (auto& v : rows[g]) v /= sum;
        }
        return CredalSet(std::move(space), std::move(rows));
    }

    const SpacePtr& space() const noexcept { return space_; }
    std::size_t size() const noexcept { return generators_.size(); }
    const Distribution& generator(std::size_t g) const { return generators_.at(g); }
    const std::vector<Distribution>& generators() const noexcept { return generators_; }

private:
    SpacePtr space_;
    std::vector<Distribution> generators_;
};

/// Linear expectation of `values` under one distribution.
inline double linear_expectation(std::span<const double> dist, std::span<const double> values) {
    double s = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) s += dist[i] * values[i];
    return s;
}

/// Value together with the (smallest) generator index attaining it.
struct Attained {
    double value;
    std::size_t generator;
};

/**
 * Sublinear expectation E(x) = max over generators of E_g[x], with the
 * upper capacity C(A) = E(1_A) and lower capacity c(A) = -E(-1_A).
 */
class SublinearModel {
public:
    explicit SublinearModel(CredalSet credal) : credal_(std::move(credal)) {}

    const CredalSet& credal() const noexcept { return credal_; }
    const SpacePtr& space() const noexcept { return credal_.space(); }
    std::size_t generator_count() const noexcept { return credal_.size(); }

    double generator_expectation(std::size_t g, const RandomVariable& x) const {
        require_same_space(space(), x.space());
        return linear_expectation(credal_.generator(g), x.values());
    }

    std::vector<double> generator_expectations(const RandomVariable& x) const {
        require_same_space(space(), x.space());
        std::vector<double> out(generator_count());
        for (std::size_t g = 0; g < out.size(); ++g) out[g] = linear_expectation(credal_.generator(g), x.values());
        return out;
    }

    Attained upper(const RandomVariable& x) const {
        auto e = generator_expectations(x);
        Attained best{e[0], 0};
        for (std::size_t g = 1; g < e.size(); ++g)
            if (e[g] > best.value) best = {e[g], g};
        return best;
    }

    Attained lower(const RandomVariable& x) const {
        auto e = generator_expectations(x);
        Attained best{e[0], 0};
        for (std::size_t g = 1; g < e.size(); ++g)
            if (e[g] < best.value) best = {e[g], g};
        return best;
    }

    double mass(std::size_t g, const Event& a) const {
        require_same_space(space(), a.space());
        const auto& row = credal_.generator(g);
        double s = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i)
            if (a.contains(i)) s += row[i];
        return s;
    }

private:
    CredalSet credal_;
};

inline double upper_expectation(const SublinearModel& model, const RandomVariable& x) { return model.upper(x).value; }

/// -E(-x), i.e. the minimum of the generator expectations.
inline double lower_expectation(const SublinearModel& model, const RandomVariable& x) {
    return -upper_expectation(model, -x);
}

inline double upper_capacity(const SublinearModel& model, const Event& a) {
    double best = 0.0;
    for (std::size_t g = 0; g < model.generator_count(); ++g) best = std::max(best, model.mass(g, a));
    return best;
}

inline double lower_capacity(const SublinearModel& model, const Event& a) {
    double best = 1.0;
    for (std::size_t g = 0; g < model.generator_count(); ++g) best = std::min(best, model.mass(g, a));
    return best;
}

/// Smallest generator index whose expectation of `x` equals E(x) within tolerance.
inline std::size_t verify_representation(const SublinearModel& model, const RandomVariable& x) {
    auto e = model.generator_expectations(x);
    double top = *std::max_element(e.begin(), e.end());
    for (std::size_t g = 0; g < e.size(); ++g)
        if (std::abs(e[g] - top) <= kTolerance) return g;
    return 0;  // unreachable: the maximum is one of the entries
}

struct MarkovReport {
    double bound;
    double capacity;
    bool holds;
};

/// Compares C(|x| > r) with E(|x|^p) / r^p.
inline MarkovReport markov_check(const SublinearModel& model, const RandomVariable& x, double r, double p) {
    if (!(r > 0.0)) throw ModelError("markov_check: r must be positive");
    if (!(p >= 1.0)) throw ModelError("markov_check: p must be at least 1");
    auto ax = x.abs();
    double bound = upper_expectation(model, ax.pow(p)) / std::pow(r, p);
    double cap = upper_capacity(model, ax.where([r](double v) { return v > r; }));
    return {bound, cap, cap <= bound + kTolerance};
}

struct H0Report {
    std::vector<Event> partition;
    std::vector<double> capacities;
    double total = 0.0;
    double bound_m = 0.0;
    bool holds = true;
};

/// Sum of upper capacities over a partition of the space, against M = generator count.
inline H0Report h0_partition_sum(const SublinearModel& model, std::vector<Event> partition) {
    if (partition.empty()) throw ModelError("partition is empty");
    std::vector<int> cover(model.space()->size(), 0);
    for (const auto& part : partition) {
        require_same_space(model.space(), part.space());
        for (auto a : part.members()) ++cover[a];
    }
    for (std::size_t a = 0; a < cover.size(); ++a) {
        if (cover[a] == 0) throw ModelError("partition does not cover atom " + model.space()->label(a));
        if (cover[a] > 1) throw ModelError("partition parts overlap at atom " + model.space()->label(a));
    }
    H0Report rep;
    rep.bound_m = static_cast<double>(model.generator_count());
    for (const auto& part : partition) {
        rep.capacities.push_back(upper_capacity(model, part));
        rep.total += rep.capacities.back();
    }
    rep.partition = std::move(partition);
    rep.holds = rep.total <= rep.bound_m + kTolerance;
    return rep;
}

}  // namespace sublin
