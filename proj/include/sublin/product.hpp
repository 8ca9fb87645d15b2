#pragma once

#include "sublin/credal.hpp"
#include "sublin/errors.hpp"

#include <charconv>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace sublin {

/// Default joint-atom budget for materializing a product model.
inline constexpr double kDefaultAtomGuard = 1e6;

/**
 * Numeric value of each atom: the label itself when every label parses as
 * a number, otherwise the atom index.
 */
inline RandomVariable atom_values(const SpacePtr& space) {
    std::vector<double> v(space->size());
    bool numeric = true;
    for (std::size_t i = 0; i < v.size() && numeric; ++i) {
        const auto& s = space->label(i);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v[i]);
        numeric = ec == std::errc() && ptr == s.data() + s.size();
    }
    if (!numeric)
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    return RandomVariable(space, std::move(v));
}

/// One coordinate of a product model: its marginal model and the variable it carries.
struct Factor {
    std::shared_ptr<const SublinearModel> marginal;
    RandomVariable variable;
};

/// Materialized joint model together with the coordinate variables lifted to it.
struct JointModel {
    SublinearModel model;
    std::vector<RandomVariable> coordinates;
};

/**
 * Independent product of finitely many marginal models.
 *
 * The joint sample space is the product of the marginal spaces and the
 * joint generators are all coordinate-wise products of marginal
 * generators, indexed by tuples in mixed radix (first coordinate most
 * significant). Nothing is materialized until `materialize()` is called,
 * so long horizons are cheap as long as callers only need per-coordinate
 * quantities.
 */
class ProductModel {
public:
    explicit ProductModel(std::vector<Factor> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw ModelError("product model needs at least one coordinate");
        for (const auto& f : factors_) {
            if (!f.marginal) throw ModelError("product factor without a marginal model");
            require_same_space(f.marginal->space(), f.variable.space());
        }
    }

    std::size_t horizon() const noexcept { return factors_.size(); }
    const Factor& factor(std::size_t i) const { return factors_.at(i); }
    const std::vector<Factor>& factors() const noexcept { return factors_; }
    const SublinearModel& marginal(std::size_t i) const { return *factors_.at(i).marginal; }
    const RandomVariable& variable(std::size_t i) const { return factors_.at(i).variable; }

    std::size_t generators_at(std::size_t i) const { return marginal(i).generator_count(); }
    std::size_t atoms_at(std::size_t i) const { return marginal(i).space()->size(); }

    /// Number of generator tuples over coordinates [first, last).
    double generator_count(std::size_t first, std::size_t last) const {
        double n = 1.0;
        for (std::size_t i = first; i < last; ++i) n *= static_cast<double>(generators_at(i));
        return n;
    }
    double generator_count() const { return generator_count(0, horizon()); }

    double atom_count(std::size_t first, std::size_t last) const {
        double n = 1.0;
        for (std::size_t i = first; i < last; ++i) n *= static_cast<double>(atoms_at(i));
        return n;
    }
    double atom_count() const { return atom_count(0, horizon()); }

    /// E_g[variable i] for every marginal generator g of coordinate i.
    std::vector<double> means(std::size_t i) const { return marginal(i).generator_expectations(variable(i)); }

    /// [-E(-x_i), E(x_i)] as a pair.
    std::pair<double, double> mean_range(std::size_t i) const {
        auto m = means(i);
        return {*std::min_element(m.begin(), m.end()), *std::max_element(m.begin(), m.end())};
    }

    bool mean_certain(std::size_t i) const {
        auto [lo, hi] = mean_range(i);
        return hi - lo <= kTolerance;
    }

    /// Same model with coordinate i's variable multiplied by weights[i].
    ProductModel scaled(const std::vector<double>& weights) const {
        if (weights.size() < horizon()) throw ModelError("scaled: need one weight per coordinate");
        auto f = factors_;
        for (std::size_t i = 0; i < f.size(); ++i) f[i].variable = f[i].variable * weights[i];
        return ProductModel(std::move(f));
    }

    /// Model restricted to the first n coordinates.
    ProductModel prefix(std::size_t n) const {
        if (n == 0 || n > horizon()) throw ModelError("prefix length out of range");
        return ProductModel(std::vector<Factor>(factors_.begin(), factors_.begin() + static_cast<long>(n)));
    }

    /// Model on coordinates [first, last).
    ProductModel slice(std::size_t first, std::size_t last) const {
        if (first >= last || last > horizon()) throw ModelError("slice bounds out of range");
        return ProductModel(
            std::vector<Factor>(factors_.begin() + static_cast<long>(first), factors_.begin() + static_cast<long>(last)));
    }

    /// Generator tuple for a mixed-radix joint generator index.
    std::vector<std::size_t> tuple_of(std::size_t index) const {
        std::vector<std::size_t> t(horizon());
        for (std::size_t i = horizon(); i-- > 0;) {
            t[i] = index % generators_at(i);
            index /= generators_at(i);
        }
        return t;
    }

    /**
     * Builds the explicit joint model. Joint atoms are labelled by joining
     * marginal labels with '|'.
     */
    JointModel materialize(double atom_guard = kDefaultAtomGuard) const {
        const double atoms = atom_count();
        const double gens = generator_count();
        if (atoms > atom_guard) throw GuardExceeded("product materialization (joint atoms)", atoms, atom_guard);
        if (atoms * gens > 64.0 * atom_guard)
            throw GuardExceeded("product materialization (atoms x generators)", atoms * gens, 64.0 * atom_guard);
        const std::size_t na = static_cast<std::size_t>(atoms);
        const std::size_t ng = static_cast<std::size_t>(gens);
        const std::size_t n = horizon();

        std::vector<std::vector<std::size_t>> paths(na, std::vector<std::size_t>(n));
        std::vector<std::string> labels(na);
        for (std::size_t a = 0; a < na; ++a) {
            std::size_t rest = a;
            for (std::size_t i = n; i-- > 0;) {
                paths[a][i] = rest % atoms_at(i);
                rest /= atoms_at(i);
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (i) labels[a] += '|';
                labels[a] += marginal(i).space()->label(paths[a][i]);
            }
        }
        auto space = make_space(std::move(labels));

        std::vector<Distribution> gens_out(ng, Distribution(na));
        for (std::size_t g = 0; g < ng; ++g) {
            auto t = tuple_of(g);
            for (std::size_t a = 0; a < na; ++a) {
                double p = 1.0;
                for (std::size_t i = 0; i < n; ++i) p *= marginal(i).credal().generator(t[i])[paths[a][i]];
                gens_out[g][a] = p;
            }
            double s = 0.0;
            for (double v : gens_out[g]) s += v;
            for (auto& v : gens_out[g]) v /= s;
        }

        std::vector<RandomVariable> coords;
        coords.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> v(na);
            for (std::size_t a = 0; a < na; ++a) v[a] = variable(i)[paths[a][i]];
            coords.emplace_back(space, std::move(v));
        }
        return {SublinearModel(CredalSet(space, std::move(gens_out))), std::move(coords)};
    }

private:
    std::vector<Factor> factors_;
};

/// n i.i.d.-style copies of one marginal model carrying the variable `x`.
inline ProductModel build_product_model(const SublinearModel& marginal, std::size_t n, const RandomVariable& x) {
    if (n == 0) throw ModelError("product horizon must be at least 1");
    auto shared = std::make_shared<const SublinearModel>(marginal);
    return ProductModel(std::vector<Factor>(n, Factor{shared, x}));
}

inline ProductModel build_product_model(const SublinearModel& marginal, std::size_t n) {
    return build_product_model(marginal, n, atom_values(marginal.space()));
}

/// Coordinate i (1-based) carries i^growth times the base variable.
inline ProductModel build_growing_product_model(const SublinearModel& marginal, std::size_t n,
                                                const RandomVariable& x, double growth) {
    auto base = build_product_model(marginal, n, x);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(static_cast<double>(i + 1), growth);
    return base.scaled(w);
}

/// Product of heterogeneous (marginal, variable) pairs.
inline ProductModel build_product_model(const std::vector<std::pair<SublinearModel, RandomVariable>>& parts) {
    std::vector<Factor> f;
    f.reserve(parts.size());
    for (const auto& [m, x] : parts) f.push_back({std::make_shared<const SublinearModel>(m), x});
    return ProductModel(std::move(f));
}

}  // namespace sublin
