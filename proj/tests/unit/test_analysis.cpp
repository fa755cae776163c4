#include <cmath>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "qnd/analysis.hpp"
#include "qnd/errors.hpp"
#include "qnd/rng.hpp"

using namespace qnd;

TEST(Db, RoundTrip) {
    for (double r : {1e-6, 0.324, 0.55, 1.0, 147.0, 3e7}) EXPECT_NEAR(from_db(to_db(r)), r, 1e-12 * r);
    EXPECT_NEAR(to_db(0.55), -2.596, 1e-3);
}

TEST(Moments, Basic) {
    std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8};
    EXPECT_DOUBLE_EQ(mean(x), 2.5);
    EXPECT_DOUBLE_EQ(variance(x), 5.0 / 3.0);
    EXPECT_DOUBLE_EQ(covariance(x, y), 10.0 / 3.0);
}

TEST(Budget, ClosedFormSolution) {
    // Independent scalar oracle: T - 1/T = 0.55 -> T = (0.55 + sqrt(0.55^2 + 4)) / 2.
    double t = (0.55 + std::sqrt(0.55 * 0.55 + 4)) / 2;
    auto s = solve_budget(0.55, 0.324);
    EXPECT_NEAR(s.total_ratio, t, 1e-12);
    EXPECT_NEAR(t, 1.312, 1e-3);
    EXPECT_NEAR(s.readout_ratio, 0.226, 1e-12);
    EXPECT_NEAR(s.classical_ratio, t - 1 - 0.226, 1e-12);
    EXPECT_NEAR(s.classical_ratio, 0.086, 1e-3);
}

TEST(Budget, WeightAndInvalid) {
    auto b = NoiseBudget::from_ratios(7e5, 0.226, 0.086);
    EXPECT_NEAR(b.weight(), 1.0 / 1.312, 1e-12);
    NoiseBudget bad{1.0, -1.0, 0.0};
    EXPECT_THROW(bad.validate(), InvalidParameter);
}

TEST(Budget, BayesEstimate) {
    NoiseBudget b{1.0, 0.2, 0.05};
    EXPECT_NEAR(bayes_estimate(10.0, b), 10.0 / 1.25, 1e-12);
}

TEST(ConditionalVariance, SyntheticClosure) {
    // jz1 = J + e1, jz2 = J + e2 with Var J = P, Var e = m: the configured
    // weight reproduces var_diff = T - 1/T in units of P and var_cond = var_diff - m.
    const double P = 7e5 / 4, m = 0.226, c = 0.0861;
    auto budget = NoiseBudget::from_ratios(7e5, m, c);
    std::vector<std::pair<double, double>> trials;
    for (int i = 0; i < 200000; ++i) {
        Rng rng = trial_rng(51, i, "cv");
        double j = gauss(rng, std::sqrt(P));
        double e1 = gauss(rng, std::sqrt((m + c) * P));
        double e2 = gauss(rng, std::sqrt((m + c) * P));
        trials.emplace_back(j + e1, j + e2);
    }
    auto cv = conditional_variance(trials, budget);
    double t = 1 + m + c;
    // Var((1-w) J - w e1 + e2) with w = 1/T
    double expect = std::pow(1 - 1 / t, 2) + (m + c) / (t * t) + (m + c);
    EXPECT_NEAR(cv.var_diff_ratio, expect, 0.01 * expect);
    EXPECT_NEAR(cv.var_cond_ratio, cv.var_diff_ratio - m, 1e-12);
}

TEST(ConditionalVariance, UncorrelatedPairsGiveTwiceProjection) {
    // Two independent CSS readouts: nothing to condition on.
    const double P = 7e5 / 4;
    auto budget = NoiseBudget::from_ratios(7e5, 0.0, 0.0);
    std::vector<std::pair<double, double>> trials;
    for (int i = 0; i < 50000; ++i) {
        Rng rng = trial_rng(53, i, "indep");
        trials.emplace_back(gauss(rng, std::sqrt(P)), gauss(rng, std::sqrt(P)));
    }
    auto cv = conditional_variance(trials, budget, 1.0);
    EXPECT_NEAR(cv.var_diff_db, 10 * std::log10(2.0), 0.1);
    EXPECT_NEAR(conditional_variance(trials, budget, 0.0).var_diff_ratio, 1.0, 0.03);
}

TEST(Calibration, SplittingDifference) {
    const double g = 253e3;
    std::vector<std::pair<double, double>> pairs;
    std::vector<double> d;
    for (int i = 0; i < 5000; ++i) {
        Rng rng = trial_rng(52, i, "cal");
        double n1 = 3.5e5 + gauss(rng, 300), n2 = n1 + gauss(rng, 400);
        pairs.emplace_back(2 * g * std::sqrt(n1), 2 * g * std::sqrt(n2));
        d.push_back(n2 - n1);
    }
    // Om^2/(4 g^2) = n, so (Om2^2 - Om1^2)/(8 g^2) = (n2 - n1)/2.
    EXPECT_NEAR(calibrate_measurement_noise(pairs, g), variance(d) / 4, 1e-6 * variance(d));
}

TEST(Polyfit, ExactQuadratic) {
    std::vector<double> x{1e4, 1e5, 7e5, 9e5}, y;
    for (double v : x) y.push_back(3.0 + 0.25 * v + 2e-8 * v * v);
    auto f = polyfit(x, y, 2);
    EXPECT_NEAR(f.coeffs(1), 0.25, 1e-9);
    EXPECT_NEAR(f.coeffs(2), 2e-8, 1e-15);
    EXPECT_THROW(polyfit(std::vector<double>{1, 2}, std::vector<double>{1, 2}, 2), InvalidParameter);
    EXPECT_THROW(polyfit(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}, 2), InvalidParameter);
}

TEST(Polyfit, WeightedCovariance) {
    std::vector<double> x{0, 1, 2}, y{1, 3, 5}, w{4, 4, 4};
    auto f = polyfit(x, y, 1, w);
    EXPECT_NEAR(f.coeffs(0), 1, 1e-12);
    EXPECT_NEAR(f.coeffs(1), 2, 1e-12);
    // sigma = 0.5 per point; slope variance = sigma^2 / sum (x - xbar)^2
    EXPECT_NEAR(f.cov(1, 1), 0.25 / 2, 1e-12);
}

TEST(Contrast, FitRecoversCoefficients) {
    std::vector<std::pair<double, double>> pts;
    for (double m : {0.0, 1e5, 2e5, 3e5, 4e5, 5e5, 6e5}) pts.emplace_back(m, 0.97 - 5.5e-7 * m - 1e-12 * m * m);
    auto f = contrast_fit(pts);
    EXPECT_NEAR(f.c_initial, 0.97, 1e-10);
    EXPECT_NEAR(f.k1, 5.5e-7, 1e-15);
    EXPECT_NEAR(f.k2, 1e-12, 1e-20);
}

TEST(Sinusoid, Visibility) {
    std::vector<double> ph, y;
    for (int k = 0; k < 8; ++k) {
        ph.push_back(2 * M_PI * k / 8);
        y.push_back(100 * (1 + 0.8 * std::cos(ph.back() - 0.3)));
    }
    auto f = fit_sinusoid(ph, y);
    EXPECT_NEAR(f.visibility(), 0.8, 1e-12);
    EXPECT_NEAR(f.phase, 0.3, 1e-12);
}

TEST(Metrics, StandardQuantumLimit) {
    auto z = squeezing_metrics(1, 1, 1, 1);
    EXPECT_NEAR(z.zeta_direct_db, 0, 1e-12);
    EXPECT_NEAR(z.zeta_inferred_db, 0, 1e-12);
}

TEST(Metrics, ArithmeticOracles) {
    auto z = squeezing_metrics(0.97, 0.82, 0.55, 0.324);
    EXPECT_NEAR(z.zeta_direct_db, 10 * std::log10(0.82 * 0.82 / (0.97 * 0.55)), 1e-12);
    EXPECT_NEAR(z.zeta_direct_db, 1.0, 0.05);
    EXPECT_NEAR(z.zeta_inferred_db, 3.3, 0.05);
    EXPECT_GE(z.zeta_inferred_db, z.zeta_direct_db);
}

TEST(Gain, SampledMeasurement) {
    EXPECT_NEAR(sampled_measurement_gain(1.0, 1.0), 0.0, 1e-12);
    EXPECT_NEAR(sampled_measurement_gain(0.5, 1.0), 10 * std::log10(2.0), 1e-12);
    EXPECT_NEAR(sampled_measurement_gain(0.15, 0.324), 13.1, 0.05);
    EXPECT_THROW(sampled_measurement_gain(0.0, 1.0), InvalidParameter);
    EXPECT_THROW(sampled_measurement_gain(1.5, 1.0), InvalidParameter);
}
