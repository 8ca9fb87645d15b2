#include "sublin/lln.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace sublin;

namespace {

ProductModel e2_product(std::size_t n) { return build_product_model(oracle::e2(), n); }

std::vector<oracle::Coordinate> e2_coords(std::size_t n) {
    return std::vector<oracle::Coordinate>(n, {oracle::e2_generators(), {-1, 0, 1}});
}

double mean_deviation_oracle(std::size_t n, double eps) {
    return oracle::product_capacity(e2_coords(n), [&](const std::vector<double>& xs) {
               double s = 0.0;
               for (double x : xs) s += x;
               return std::abs(s / static_cast<double>(n)) > eps;
           }).upper;
}

}  // namespace

TEST(DeviationExact, E2FourCoordinates) {
    DeviationQuery q{e2_product(4), 0.5, 1, 4, {}, std::vector<double>(4, 0.25)};
    auto r = deviation_capacity_exact(q);
    EXPECT_NEAR(r.capacity, mean_deviation_oracle(4, 0.5), 1e-12);
    EXPECT_NEAR(r.capacity, 0.1875, 1e-12);
    // attained with three coordinates on the two-point generator
    EXPECT_EQ(std::count(r.tuple.begin(), r.tuple.end(), 0u), 3);
}

TEST(DeviationExact, SmallHorizonsMatchOracle) {
    for (std::size_t n : {1u, 2u, 3u, 5u})
        for (double eps : {0.1, 0.3, 0.5, 0.75}) {
            DeviationQuery q{e2_product(n), eps, 1, n, {}, std::vector<double>(n, 1.0 / static_cast<double>(n))};
            EXPECT_NEAR(deviation_capacity_exact(q).capacity, mean_deviation_oracle(n, eps), 1e-12)
                << "n=" << n << " eps=" << eps;
        }
}

TEST(DeviationExact, SingleE1Coordinate) {
    auto e1 = oracle::e1();
    DeviationQuery q{build_product_model(e1, 1, RandomVariable(e1.space(), {1, -1})), 1.0, 1, 1, {0.2}, {}};
    EXPECT_NEAR(deviation_capacity_exact(q).capacity, 0.5, 1e-15);
}

TEST(DeviationExact, EventBeyondRangeIsEmpty) {
    DeviationQuery q{e2_product(6), 1.0, 1, 6, {}, std::vector<double>(6, 1.0 / 6)};
    EXPECT_EQ(deviation_capacity_exact(q).capacity, 0.0);
}

TEST(DeviationExact, StrictThreshold) {
    // |sum| equals eps exactly on some paths: those do not count.
    DeviationQuery q{e2_product(2), 1.0, 1, 2, {}, {}};
    EXPECT_NEAR(deviation_capacity_exact(q).capacity, 0.5, 1e-15);  // |sum| = 2 under the all-p tuple
}

TEST(DeviationExact, GuardCountsGeneratorTuples) {
    DeviationQuery q{e2_product(12), 0.5, 1, 12, {}, {}};
    EXPECT_THROW(deviation_capacity_exact(q, 1000), GuardExceeded);
    EXPECT_NO_THROW(deviation_capacity_exact(q, 5000));
}

TEST(DeviationExact, RandomProductsAgainstOracle) {
    std::mt19937_64 rng(101);
    for (int t = 0; t < 40; ++t) {
        std::size_t n = 1 + rng() % 3;
        std::vector<oracle::Coordinate> coords;
        std::vector<std::pair<SublinearModel, RandomVariable>> parts;
        std::vector<double> w(n), lam(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t k = 2 + rng() % 2;
            auto rows = oracle::random_generators(k, 1 + rng() % 2, rng);
            std::vector<double> v(k);
            for (auto& x : v) x = static_cast<double>(rng() % 7) - 3.0;
            auto m = oracle::make_model(rows);
            parts.emplace_back(m, RandomVariable(m.space(), v));
            coords.push_back({rows, v});
            w[i] = 0.5 + static_cast<double>(rng() % 4) * 0.25;
            lam[i] = static_cast<double>(rng() % 3) * 0.25;
        }
        double eps = 0.3 + static_cast<double>(rng() % 5) * 0.4;
        DeviationQuery q{build_product_model(parts), eps, 1, n, lam, w};
        double expect = oracle::product_capacity(coords, [&](const std::vector<double>& xs) {
                            double s = 0.0;
                            for (std::size_t i = 0; i < n; ++i) s += w[i] * (xs[i] - lam[i]);
                            return std::abs(s) > eps;
                        }).upper;
        EXPECT_NEAR(deviation_capacity_exact(q).capacity, expect, 1e-12);
        EXPECT_GE(deviation_capacity_dp_bound(q), expect - 1e-12);
    }
}

TEST(DeviationDpBound, DominatesExact) {
    for (std::size_t n : {2u, 4u, 6u}) {
        DeviationQuery q{e2_product(n), 0.5, 1, n, {}, std::vector<double>(n, 1.0 / static_cast<double>(n))};
        EXPECT_GE(deviation_capacity_dp_bound(q) + 1e-12, deviation_capacity_exact(q).capacity);
    }
}

TEST(DeviationMc, WithinThreeStandardErrors) {
    DeviationQuery q{e2_product(4), 0.5, 1, 4, {}, std::vector<double>(4, 0.25)};
    auto mc = deviation_capacity_mc(q, 100000, 42);
    EXPECT_TRUE(mc.exhaustive);
    EXPECT_EQ(mc.candidates, 16u);
    EXPECT_LE(std::abs(mc.estimate - 0.1875), 3 * mc.std_error);
}

TEST(DeviationMc, EmptyEventAndDegenerateModel) {
    DeviationQuery q{e2_product(3), 3.0, 1, 3, {}, {}};
    auto mc = deviation_capacity_mc(q, 1000, 1);
    EXPECT_EQ(mc.estimate, 0.0);
    EXPECT_EQ(mc.std_error, 0.0);

    auto s = make_space({"-1", "1"});
    SublinearModel coin(CredalSet(s, {{0.5, 0.5}}));
    DeviationQuery c{build_product_model(coin, 3), 1.5, 1, 3, {}, {}};
    auto r = deviation_capacity_mc(c, 200000, 3);
    EXPECT_NEAR(deviation_capacity_exact(c).capacity, 0.25, 1e-15);
    EXPECT_LE(std::abs(r.estimate - 0.25), 4 * r.std_error);
}

TEST(DeviationMc, HillClimbOutsideEnumerableRegime) {
    DeviationQuery q{e2_product(14), 0.5, 1, 14, {}, std::vector<double>(14, 1.0 / 14)};
    auto mc = deviation_capacity_mc(q, 20000, 5, 64);
    EXPECT_FALSE(mc.exhaustive);
    double exact = deviation_capacity_exact(q).capacity;
    EXPECT_LE(mc.estimate, exact + 4 * mc.std_error);
    EXPECT_GT(mc.estimate, 0.0);
}

TEST(WeakLLN, E2SweepRespectsBound) {
    auto rep = weak_lln_run(e2_product(16), {2, 4, 8, 16}, 0.5);
    EXPECT_DOUBLE_EQ(rep.sup_constant, 1.0);
    ASSERT_EQ(rep.rows.size(), 4u);
    const double expected[] = {0.5, 0.1875, 0.09765625, 0.0282135009765625};
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& r = rep.rows[k];
        EXPECT_NEAR(r.capacity, expected[k], 1e-12);
        EXPECT_DOUBLE_EQ(r.bound, 1.0 / (static_cast<double>(r.n) * 0.25));
        EXPECT_TRUE(r.holds);
        EXPECT_LE(r.capacity, r.markov_direct + 1e-12);
        EXPECT_EQ(r.provenance, Provenance::exact);
    }
    EXPECT_DOUBLE_EQ(rep.rows[3].bound, 0.25);
    EXPECT_TRUE(rep.all_hold);
    EXPECT_TRUE(rep.monotone);
    for (double r : rep.centering.residuals) EXPECT_LE(r, 1e-9);
}

TEST(WeakLLN, ConstantCoordinates) {
    auto e2 = oracle::e2();
    auto rep = weak_lln_run(build_product_model(e2, 6, RandomVariable::constant(e2.space(), 2.0)), {1, 3, 6}, 0.1);
    for (double l : rep.centering.lambdas) EXPECT_EQ(l, 2.0);
    for (const auto& r : rep.rows) EXPECT_EQ(r.capacity, 0.0);
}

TEST(WeakLLN, CorrelatedCoordinatesRejected) {
    auto e1 = oracle::e1();
    EXPECT_THROW(weak_lln_run(build_product_model(e1, 3, RandomVariable(e1.space(), {1, -1})), {3}, 0.5),
                 HypothesisViolation);
}

TEST(WeakLLN, GuardAndMcFallback) {
    EXPECT_THROW(weak_lln_run(e2_product(16), {16}, 0.5, {1000, 0, 0}), GuardExceeded);
    auto rep = weak_lln_run(e2_product(16), {16}, 0.5, {1000, 20000, 7});
    EXPECT_EQ(rep.rows[0].provenance, Provenance::mc);
    EXPECT_TRUE(rep.rows[0].holds);
}

TEST(Ottaviani, WorkedTwoStepInstance) {
    auto rep = ottaviani_check(e2_product(2), 2, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(rep.r, 0.5);
    EXPECT_DOUBLE_EQ(rep.lhs, 0.0);
    EXPECT_DOUBLE_EQ(rep.rhs, 0.5);
    EXPECT_TRUE(rep.holds);
    EXPECT_TRUE(rep.partition_verified);
}

TEST(Ottaviani, ThreeStepInstancePinned) {
    auto rep = ottaviani_check(e2_product(3), 3, 1.0, 1.0);
    EXPECT_NEAR(rep.r, 0.5, 1e-15);
    EXPECT_NEAR(rep.lhs, 0.25, 1e-15);
    EXPECT_NEAR(rep.final_capacity, 0.375, 1e-15);
    EXPECT_NEAR(rep.a_capacities[0], 0.0, 1e-15);
    EXPECT_NEAR(rep.a_capacities[1], 0.0, 1e-15);
    EXPECT_NEAR(rep.a_capacities[2], 0.25, 1e-15);
    EXPECT_NEAR(rep.rhs, 0.5, 1e-15);
    EXPECT_TRUE(rep.holds);
}

TEST(Ottaviani, LargeThresholdsEmptyEverything) {
    auto rep = ottaviani_check(e2_product(3), 3, 3.0, 3.0);
    EXPECT_EQ(rep.r, 1.0);
    EXPECT_EQ(rep.lhs, 0.0);
    EXPECT_EQ(rep.rhs, 0.0);
}

TEST(Ottaviani, ComponentsMatchBruteForce) {
    auto coords = e2_coords(3);
    auto partial = [](const std::vector<double>& xs, std::size_t k) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += xs[i];
        return s;
    };
    for (double s : {0.5, 1.0, 2.0})
        for (double t : {0.5, 1.0, 2.0}) {
            auto rep = ottaviani_check(e2_product(3), 3, s, t);
            double lhs = oracle::product_capacity(coords, [&](const std::vector<double>& xs) {
                             double m = 0.0;
                             for (std::size_t k = 1; k <= 3; ++k) m = std::max(m, std::abs(partial(xs, k)));
                             return m > s + t;
                         }).upper;
            double r = 1.0;
            for (std::size_t k = 0; k < 3; ++k)
                r = std::min(r, oracle::product_capacity(coords, [&](const std::vector<double>& xs) {
                                    return std::abs(partial(xs, 3) - partial(xs, k)) <= s;
                                }).lower);
            EXPECT_NEAR(rep.lhs, lhs, 1e-12);
            EXPECT_NEAR(rep.r, r, 1e-12);
            EXPECT_TRUE(rep.partition_verified);
        }
}

TEST(Ottaviani, ArgumentChecks) {
    EXPECT_THROW(ottaviani_check(e2_product(2), 3, 1, 1), ModelError);
    EXPECT_THROW(ottaviani_check(e2_product(2), 2, 0, 1), ModelError);
    EXPECT_THROW(ottaviani_check(e2_product(12), 12, 1, 1), GuardExceeded);
}
