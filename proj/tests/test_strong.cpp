#include "sublin/strong.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace sublin;

namespace {

RandomVariable e2_identity() { return RandomVariable(oracle::e2().space(), {-1, 0, 1}); }

}  // namespace

TEST(Kronecker, UnitSeries) {
    std::vector<double> x(1000, 1.0);
    auto k = kronecker_transform(x, 2.0);
    EXPECT_TRUE(k.converges);
    EXPECT_NEAR(k.trajectory.back(), 1e-3, 1e-15);
    EXPECT_NEAR(k.weighted_partial_sums.back(), M_PI * M_PI / 6, 1.1e-3);
}

TEST(Kronecker, ZeroSeries) {
    auto k = kronecker_transform(std::vector<double>(50, 0.0), 1.5);
    for (double v : k.trajectory) EXPECT_EQ(v, 0.0);
    for (double v : k.weighted_partial_sums) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(k.converges);
}

TEST(Kronecker, AlternatingGrowingSeries) {
    const std::size_t N = 10000;
    std::vector<double> x(N);
    for (std::size_t i = 1; i <= N; ++i) x[i - 1] = (i % 2 ? -1.0 : 1.0) * std::pow(static_cast<double>(i), 0.4);
    auto k = kronecker_transform(x, 1.5);
    EXPECT_TRUE(k.converges);
    EXPECT_LT(std::abs(k.trajectory.back()), 0.05);
    // Independent partial sum of sum (-1)^i / i^1.1.
    double s = 0.0;
    for (std::size_t i = 1; i <= N; ++i) s += (i % 2 ? -1.0 : 1.0) / std::pow(static_cast<double>(i), 1.1);
    EXPECT_NEAR(k.weighted_partial_sums.back(), s, 1e-12);
}

TEST(Kronecker, RejectsPAtMostOne) {
    EXPECT_THROW(kronecker_transform(std::vector<double>{1.0}, 1.0), ModelError);
}

TEST(Kronecker, DivergentSeriesIsFlagged) {
    std::vector<double> x(2000, 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::pow(static_cast<double>(i + 1), 1.2);
    EXPECT_FALSE(kronecker_transform(x, 1.5).converges);
}

TEST(StrongLLN, GrowingNormConfiguration) {
    const double p = 1.5, eps = 0.5;
    auto prod = build_growing_product_model(oracle::e2(), 8, e2_identity(), 0.4);
    auto rep = strong_lln_run(prod, p, eps, {{2, 4}, {4, 8}}, {kDefaultGuard, 0, 3});
    EXPECT_FALSE(rep.vacuous);
    EXPECT_TRUE(rep.hypothesis_converging);
    EXPECT_NEAR(rep.hypothesis_decay, -2.2, 1e-9);
    EXPECT_TRUE(rep.lambdas_in_interval);
    EXPECT_EQ(rep.bound_m, 0.0);
    ASSERT_EQ(rep.rows.size(), 2u);
    for (const auto& row : rep.rows) {
        std::vector<oracle::Coordinate> coords;
        for (std::size_t i = row.m; i <= row.n; ++i) {
            double scale = std::pow(static_cast<double>(i), 0.4) / std::pow(static_cast<double>(i), p);
            coords.push_back({oracle::e2_generators(), {-scale, 0.0, scale}});
        }
        double cap = oracle::product_capacity(coords, [&](const std::vector<double>& xs) {
                         double s = 0.0;
                         for (double x : xs) s += x;
                         return std::abs(s) > eps;
                     }).upper;
        double var = 0.0;
        for (std::size_t i = row.m; i <= row.n; ++i)
            var += std::pow(static_cast<double>(i), 0.8) / std::pow(static_cast<double>(i), 2 * p);
        EXPECT_NEAR(row.capacity, cap, 1e-12);
        EXPECT_NEAR(row.variance_term, var / (eps * eps), 1e-12);
        EXPECT_EQ(row.cross_term, 0.0);
        EXPECT_TRUE(row.holds);
        EXPECT_TRUE(row.lambda_contained);
        EXPECT_EQ(row.provenance, Provenance::exact);
    }
    EXPECT_TRUE(rep.all_hold);
    EXPECT_EQ(rep.trajectories.size(), 2u);
}

TEST(StrongLLN, CrossTermWithMeanUncertainCoordinates) {
    auto e1 = oracle::e1();
    auto e2 = oracle::e2();
    // Only the first coordinate is mean-uncertain, so every coordinate pair stays uncorrelated.
    std::vector<std::pair<SublinearModel, RandomVariable>> parts{{e1, RandomVariable(e1.space(), {1, -1})}};
    for (int i = 0; i < 5; ++i) parts.emplace_back(e2, e2_identity());
    auto prod = build_product_model(parts);
    auto rep = strong_lln_run(prod, 2.0, 0.3, {{2, 5}, {3, 6}});
    EXPECT_NEAR(rep.bound_m, 0.2, 1e-15);
    EXPECT_NEAR(rep.lambdas[0], 0.2, 1e-15);
    for (const auto& row : rep.rows) {
        double head = 0.0, tail = 0.0;
        for (std::size_t i = 1; i < row.m; ++i) head += 0.2 / std::pow(static_cast<double>(i), 2.0);
        for (std::size_t j = row.m + 1; j <= row.n; ++j) tail += 0.2 / std::pow(static_cast<double>(j), 2.0);
        EXPECT_NEAR(row.cross_term, 2.0 / 0.09 * head * tail, 1e-12);
        EXPECT_TRUE(row.holds);
        EXPECT_TRUE(row.lambda_contained);
    }
}

TEST(StrongLLN, AuxiliaryConstantMatchesGenericSelection) {
    // Materialize a small heterogeneous product and run select_lambda on the auxiliary pair directly.
    auto e1 = oracle::e1();
    auto e2 = oracle::e2();
    auto prod = build_product_model({{e1, RandomVariable(e1.space(), {1, -1})},
                                     {e2, e2_identity()},
                                     {e2, RandomVariable(e2.space(), {0, 1, 2})}});
    const double p = 1.5;
    auto rep = strong_lln_run(prod, p, 0.4, {{2, 3}});
    auto j = prod.materialize();
    auto w = power_weights(3, p);
    auto x = j.coordinates[2] * w[2];
    auto y = -((j.coordinates[0] - rep.lambdas[0]) * w[0]);
    auto sel = select_lambda(j.model, x, y);
    EXPECT_NEAR(rep.rows[0].lambda_nm, sel.lambda_hat, 1e-12);
    auto d = centering_interval(j.model, x);
    EXPECT_NEAR(rep.rows[0].lambda_interval.lo, d.lo, 1e-12);
    EXPECT_NEAR(rep.rows[0].lambda_interval.hi, d.hi, 1e-12);
}

TEST(StrongLLN, BoundedCoordinatesAreVacuous) {
    auto rep = strong_lln_run(build_product_model(oracle::e2(), 6), 1.5, 0.5, {{2, 4}});
    EXPECT_TRUE(rep.vacuous);
    EXPECT_NEAR(rep.deterministic_bound, 2.0 * std::pow(6.0, -0.5), 1e-15);
    for (const auto& t : rep.trajectories) EXPECT_LE(std::abs(t.final_value), rep.deterministic_bound);
}

TEST(StrongLLN, SingleGeneratorCapacityIsProbability) {
    auto s = make_space({"-1", "1"});
    SublinearModel coin(CredalSet(s, {{0.3, 0.7}}));
    auto prod = build_product_model(coin, 4);
    auto rep = strong_lln_run(prod, 2.0, 0.05, {{1, 3}});
    // centering removes the mean 0.4, leaving x_i - 0.4 in {-1.4, 0.6}
    double prob = 0.0;
    for (int a = 0; a < 8; ++a) {
        double sum = 0.0, pr = 1.0;
        for (int i = 0; i < 3; ++i) {
            bool up = (a >> i) & 1;
            sum += (up ? 0.6 : -1.4) / ((i + 1.0) * (i + 1.0));
            pr *= up ? 0.7 : 0.3;
        }
        if (std::abs(sum) > 0.05) prob += pr;
    }
    EXPECT_NEAR(rep.rows[0].capacity, prob, 1e-12);
}

TEST(StrongLLN, ArgumentChecks) {
    auto prod = build_product_model(oracle::e2(), 4);
    EXPECT_THROW(strong_lln_run(prod, 1.0, 0.5, {{1, 2}}), ModelError);
    EXPECT_THROW(strong_lln_run(prod, 1.5, 0.5, {{3, 2}}), ModelError);
    EXPECT_THROW(strong_lln_run(prod, 1.5, 0.5, {{1, 5}}), ModelError);
}

TEST(TailSup, PinnedE2Values) {
    auto prod = build_product_model(oracle::e2(), 6);
    auto w = power_weights(6, 1.5);
    const double expected[] = {1.0, 0.0625, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t base = 0; base < 6; ++base)
        EXPECT_NEAR(tail_sup_capacity(prod, {}, w, 6, base, 0.8), expected[base], 1e-12) << base;
}

TEST(TailSup, MatchesBruteForceAndIsMonotone) {
    auto prod = build_product_model(oracle::e2(), 5);
    auto w = power_weights(5, 1.2);
    auto coords = std::vector<oracle::Coordinate>(5, {oracle::e2_generators(), {-1, 0, 1}});
    for (double eps : {0.2, 0.5, 1.0}) {
        double prev = 2.0;
        for (std::size_t base = 0; base < 5; ++base) {
            double c = tail_sup_capacity(prod, {}, w, 5, base, eps);
            double expect = oracle::product_capacity(coords, [&](const std::vector<double>& xs) {
                                double best = 0.0;
                                for (std::size_t i = base; i < 5; ++i) {
                                    double s = 0.0;
                                    for (std::size_t j = i; j < 5; ++j) best = std::max(best, std::abs(s += w[j] * xs[j]));
                                }
                                return best > eps;
                            }).upper;
            EXPECT_NEAR(c, expect, 1e-12);
            EXPECT_LE(c, prev + 1e-12);
            prev = c;
        }
    }
}

TEST(TailSup, TrivialCases) {
    auto e2 = oracle::e2();
    auto prod = build_product_model(oracle::e2(), 4);
    EXPECT_EQ(tail_sup_capacity(prod, {}, {}, 4, 0, 4.0), 0.0);
    auto constant = build_product_model(e2, 4, RandomVariable::constant(e2.space(), 1.5));
    EXPECT_EQ(tail_sup_capacity(constant, std::vector<double>(4, 1.5), {}, 4, 0, 0.01), 0.0);
}

TEST(CauchySubsequence, ZeroDifferencesTakeEveryIndex) {
    auto chain = cauchy_subsequence([](std::size_t, std::size_t, double) { return 0.0; }, 10);
    EXPECT_FALSE(chain.stalled);
    ASSERT_EQ(chain.indices.size(), 10u);
    for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(chain.indices[k], k + 1);
}

TEST(CauchySubsequence, ConvergentSeriesGivesValidChain) {
    auto s = make_space({"-1", "1"});
    SublinearModel coin(CredalSet(s, {{0.5, 0.5}}));
    const std::size_t N = 14;
    auto prod = build_product_model(coin, N);
    std::vector<double> w(N);
    for (std::size_t i = 0; i < N; ++i) w[i] = std::ldexp(1.0, -static_cast<int>(i + 1));
    auto chain = cauchy_subsequence(partial_sum_oracle(prod, {}, w), N, 8);
    EXPECT_FALSE(chain.stalled);
    ASSERT_EQ(chain.link_capacities.size(), 8u);
    for (std::size_t k = 0; k + 1 < chain.indices.size(); ++k) {
        std::size_t a = chain.indices[k], b = chain.indices[k + 1];
        double thr = std::ldexp(1.0, -static_cast<int>(k + 1));
        std::vector<oracle::Coordinate> coords;
        for (std::size_t i = a; i < b; ++i) coords.push_back({{{0.5, 0.5}}, {-w[i], w[i]}});
        double cap = oracle::product_capacity(coords, [&](const std::vector<double>& xs) {
                         double sum = 0.0;
                         for (double x : xs) sum += x;
                         return std::abs(sum) > thr;
                     }).upper;
        EXPECT_LT(cap, thr);
        EXPECT_NEAR(cap, chain.link_capacities[k], 1e-15);
    }
}

TEST(CauchySubsequence, RandomWalkStalls) {
    auto s = make_space({"-1", "1"});
    SublinearModel coin(CredalSet(s, {{0.5, 0.5}}));
    auto prod = build_product_model(coin, 12);
    auto chain = cauchy_subsequence(partial_sum_oracle(prod, {}, {}), 12);
    EXPECT_TRUE(chain.stalled);
    EXPECT_EQ(chain.indices.size(), 1u);
}
