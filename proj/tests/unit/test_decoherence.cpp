#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qnd/analysis.hpp"
#include "qnd/decoherence.hpp"

using namespace qnd;

TEST(Contrast, QuadraticModel) {
    EXPECT_DOUBLE_EQ(contrast_model(0.97, 0, 5.5e-7, 1e-12), 0.97);
    EXPECT_NEAR(contrast_model(0.97, 2e5, 5.5e-7, 1e-12), 0.97 - 0.11 - 0.04, 1e-12);
}

TEST(Contrast, CumulativeAndClamped) {
    Rng rng = trial_rng(31, 0, "decoh");
    auto s = prepare_css(7e5, Vec3::UnitY(), 0.97, rng);
    ProbeImpact imp;
    imp.photons = 3e5;
    s = apply_probe_decoherence(s, imp, rng);
    EXPECT_NEAR(s.contrast, contrast_model(0.97, 3e5, imp.k1, imp.k2), 1e-12);
    s = apply_probe_decoherence(s, imp, rng);
    EXPECT_NEAR(s.contrast, contrast_model(0.97, 6e5, imp.k1, imp.k2), 1e-12);
    for (int i = 0; i < 5; ++i) s = apply_probe_decoherence(s, imp, rng);
    EXPECT_TRUE(s.contrast_clamped);
    EXPECT_GE(s.contrast, 0.0);
}

TEST(Raman, LossStatistics) {
    ProbeImpact imp;
    std::vector<double> dn, djz;
    for (int i = 0; i < 4000; ++i) {
        Rng rng = trial_rng(32, i, "raman");
        auto s = prepare_css(7e5, Vec3::UnitY(), 1.0, rng);
        auto t = apply_probe_decoherence(s, imp, rng);
        dn.push_back(s.n_eff - t.n_eff);
        djz.push_back(t.jz() - s.jz());
    }
    double k = imp.scattered();
    EXPECT_NEAR(mean(dn), k * imp.raman_branch, 0.01 * k);
    // Lost atoms leave the upper state: J_z shifts by -k/2 per atom lost.
    EXPECT_NEAR(mean(djz), -0.5 * k * imp.raman_branch, 0.01 * k);
    EXPECT_NEAR(variance(dn), k * imp.raman_branch * (1 - imp.raman_branch), 0.1 * k * 0.25);
}

TEST(Backaction, DeterminantReachesBound) {
    Rng rng = trial_rng(33, 0, "kick");
    auto s = prepare_css(7e5, Vec3::UnitY(), 1.0, rng);
    s = condition_on_jz(s, 0.2 * 7e5 / 4);
    for (double q : {1.0, 0.5, 0.02}) {
        auto t = backaction_kick(s, 9.5e4, q, rng);
        EXPECT_NEAR(t.tangent_det(), t.heisenberg_bound() / q, 1e-6 * t.tangent_det());
        EXPECT_NEAR(t.var_theta(), s.var_theta(), 1e-6 * s.var_theta());
    }
}

TEST(Backaction, PredictedSlope) {
    EXPECT_DOUBLE_EQ(predict_k1(7e5, 0.41), 0.41 / 7e5);
    EXPECT_THROW(predict_k1(0, 0.41), std::exception);
}
