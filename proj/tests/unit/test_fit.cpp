#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qnd/analysis.hpp"
#include "qnd/cavity.hpp"
#include "qnd/errors.hpp"
#include "qnd/spectroscopy.hpp"

using namespace qnd;

namespace {

SweepConfig sweep_at(double photons, double q = 0.5) {
    SweepConfig s;
    s.photons = photons;
    s.detection_efficiency = q;
    s.nominal_n_up = 3.5e5;
    return s;
}

struct Scatter {
    double sd;
    double mean_sigma;
    double mean;
};

Scatter fit_scatter(double photons, int trials, const char* stream) {
    auto c = default_cavity();
    std::vector<double> s, sig;
    for (int i = 0; i < trials; ++i) {
        Rng rng = trial_rng(21, i, stream);
        auto f = fit_splitting(synthesize_sweep(3.5e5, 253e3, sweep_at(photons), c, rng));
        if (!f.converged) continue;
        s.push_back(f.splitting);
        sig.push_back(f.sigma_splitting);
    }
    return {std::sqrt(variance(s)), mean(sig), mean(s)};
}

}  // namespace

TEST(Fit, NoiselessTraceRecoversSplitting) {
    auto c = default_cavity();
    auto t = model_sweep(3.5e5, 253e3, sweep_at(1e9), c);
    auto f = fit_splitting(t);
    ASSERT_TRUE(f.converged);
    // A doublet of Lorentzians is not the exact dressed lineshape; the bias is small.
    EXPECT_NEAR(f.splitting, 2 * 253e3 * std::sqrt(3.5e5), 1e-3 * f.splitting);
}

TEST(Fit, PopulationInversion) {
    SplittingFit f;
    f.converged = true;
    f.splitting = 2 * 253e3 * std::sqrt(2.0e5);
    f.sigma_splitting = 1e5;
    auto p = population_from_splitting(f, 253e3);
    EXPECT_NEAR(p.n_up, 2.0e5, 1e-6);
    EXPECT_NEAR(p.sigma_n, 2 * std::sqrt(2.0e5) * 1e5 / (2 * 253e3), 1e-6);
    f.converged = false;
    EXPECT_THROW(population_from_splitting(f, 253e3), FitError);
}

TEST(Fit, RejectsDegenerateTraces) {
    SpectrumTrace t;
    t.freq.assign(32, 0.0);
    for (int i = 0; i < 32; ++i) t.freq[i] = i * 1e5;
    t.power.assign(32, 0.0);
    EXPECT_THROW(fit_splitting(t), FitError);
    t.freq.resize(8);
    t.power.assign(8, 1.0);
    EXPECT_THROW(fit_splitting(t), FitError);
}

TEST(Fit, ReportedSigmaMatchesScatter) {
    auto s = fit_scatter(9.5e4, 1500, "sigma");
    EXPECT_NEAR(s.mean_sigma / s.sd, 1.0, 0.15);
}

TEST(Fit, InverseSqrtPhotonScaling) {
    auto lo = fit_scatter(5e4, 1500, "scale-lo");
    auto hi = fit_scatter(2e5, 1500, "scale-hi");
    EXPECT_NEAR(lo.sd / hi.sd, 2.0, 0.2);
}

TEST(Fit, SweepValidation) {
    SweepConfig s;
    s.points = 15;
    EXPECT_THROW(s.validate(), InvalidParameter);
    s.points = 64;
    s.detection_efficiency = 0;
    EXPECT_THROW(s.validate(), InvalidParameter);
}

TEST(Loss, PartitionSumsToOne) {
    auto c = default_cavity();
    auto p = loss_partition(sweep_at(9.5e4), 3.5e5, 253e3, c);
    EXPECT_NEAR(p.scattered + p.mirror, 1.0, 1e-12);
    // On a half-atom, half-photon polariton the atomic share is Gamma/(Gamma+kappa).
    EXPECT_NEAR(p.scattered, c.gamma_atom / (c.gamma_atom + c.kappa), 0.01);
    CavityConfig no_atom_loss = c;
    no_atom_loss.gamma_atom = 0;
    EXPECT_NEAR(loss_partition(sweep_at(9.5e4), 3.5e5, 253e3, no_atom_loss).scattered, 0.0, 1e-15);
}
