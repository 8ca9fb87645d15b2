#pragma once

#include "sublin/credal.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sublin {

enum class Axiom { monotonicity, constant_preserving, subadditivity, positive_homogeneity };

inline const char* axiom_name(Axiom a) {
    switch (a) {
        case Axiom::monotonicity: return "monotonicity";
        case Axiom::constant_preserving: return "constant_preserving";
        case Axiom::subadditivity: return "subadditivity";
        case Axiom::positive_homogeneity: return "positive_homogeneity";
    }
    return "unknown";
}

struct AxiomViolation {
    Axiom axiom;
    std::size_t trial;
    double lhs;
    double rhs;
    std::vector<double> witness_a;  // random variable(s) that produced the violation
    std::vector<double> witness_b;
    double scalar = 0.0;
};

struct AxiomReport {
    std::size_t trials = 0;
    std::vector<AxiomViolation> violations;
    bool ok() const { return violations.empty(); }
};

namespace detail {

inline RandomVariable random_rv(const SpacePtr& space, std::mt19937_64& rng, double scale = 10.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> v(space->size());
    for (auto& x : v) x = u(rng);
    return RandomVariable(space, std::move(v));
}

}  // namespace detail

/**
 * Randomized check of the four sublinear-expectation axioms for an
 * arbitrary functional `F(const RandomVariable&) -> double`.
 *
 * Each trial draws fresh random variables and scalars; the homogeneity
 * check additionally exercises the scalar 0 once per run.
 */
template <class Functional>
AxiomReport verify_axioms(const Functional& F, const SpacePtr& space, std::size_t trial_count, std::uint64_t seed) {
    if (trial_count == 0) throw ModelError("verify_axioms: trial_count must be at least 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    AxiomReport rep;
    rep.trials = trial_count;
    auto fail = [&](Axiom a, std::size_t t, double lhs, double rhs, const RandomVariable* x, const RandomVariable* y,
                    double s) {
        AxiomViolation v{a, t, lhs, rhs, {}, {}, s};
        if (x) v.witness_a.assign(x->values().begin(), x->values().end());
        if (y) v.witness_b.assign(y->values().begin(), y->values().end());
        rep.violations.push_back(std::move(v));
    };

    for (std::size_t t = 0; t < trial_count; ++t) {
        auto x = detail::random_rv(space, rng);
        auto y = detail::random_rv(space, rng);

        // x + nonnegative >= x
        auto bump = detail::random_rv(space, rng).map([](double v) { return std::abs(v); });
        auto upper = x + bump;
        double fu = F(upper), fx = F(x);
        if (fu < fx - kTolerance) fail(Axiom::monotonicity, t, fu, fx, &upper, &x, 0.0);

        double c = 20.0 * unit(rng) - 10.0;
        auto cv = RandomVariable::constant(space, c);
        double fc = F(cv);
        if (std::abs(fc - c) > kTolerance) fail(Axiom::constant_preserving, t, fc, c, &cv, nullptr, c);

        double fxy = F(x + y), fy = F(y);
        if (fxy > fx + fy + kTolerance) fail(Axiom::subadditivity, t, fxy, fx + fy, &x, &y, 0.0);

        double lam = t == 0 ? 0.0 : 10.0 * unit(rng);
        double flx = F(x * lam);
        if (std::abs(flx - lam * fx) > kTolerance * std::max(1.0, std::abs(lam * fx)))
            fail(Axiom::positive_homogeneity, t, flx, lam * fx, &x, nullptr, lam);
    }
    return rep;
}

inline AxiomReport verify_axioms(const SublinearModel& model, std::size_t trial_count, std::uint64_t seed) {
    return verify_axioms([&model](const RandomVariable& x) { return upper_expectation(model, x); }, model.space(),
                         trial_count, seed);
}

}  // namespace sublin
