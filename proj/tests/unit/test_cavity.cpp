#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qnd/cavity.hpp"
#include "qnd/errors.hpp"
#include "qnd/spectroscopy.hpp"

using namespace qnd;

TEST(Geometry, SymmetricResonatorOracle) {
    // Independent form: g = cos(pi d/fsr), z_R = (L/2) sqrt((1+g)/(1-g)).
    const double fsr = 7.828e9, d = 2257e6, lam = 795e-9;
    const double L = 299792458.0 / (2 * fsr);
    const double g = std::cos(M_PI * d / fsr);
    const double zr = 0.5 * L * std::sqrt((1 + g) / (1 - g));
    auto geo = geometry_from_mode_spacings(fsr, d, lam);
    EXPECT_NEAR(geo.length, L, 1e-15);
    EXPECT_NEAR(geo.z_r, zr, 1e-12);
    EXPECT_NEAR(geo.w0, std::sqrt(lam * zr / M_PI), 1e-12);
    EXPECT_NEAR(geo.mirror_radius, L / (1 - g), 1e-12);
}

TEST(Geometry, SecondOrderSpacingRoundTrip) {
    auto geo = geometry_from_mode_spacings(7.828e9, 2257e6, 795e-9);
    EXPECT_NEAR(transverse_spacing(geo, 7.828e9, 1), 2257e6, 1e-3);
    EXPECT_NEAR(transverse_spacing(geo, 7.828e9, 2), 4514e6, 1e-3);
}

TEST(Geometry, RejectsUnstableInput) {
    EXPECT_THROW(geometry_from_mode_spacings(7.8e9, 0.0, 795e-9), InvalidParameter);
    EXPECT_THROW(geometry_from_mode_spacings(7.8e9, 7.9e9, 795e-9), InvalidParameter);
    EXPECT_THROW(geometry_from_mode_spacings(-1, 1e9, 795e-9), InvalidParameter);
}

TEST(Cavity, DefaultLinewidth) {
    auto c = default_cavity();
    EXPECT_NEAR(c.kappa, 7.828e9 / 710, 1e-6);
    EXPECT_NO_THROW(c.validate());
    CavityConfig bad = c;
    bad.finesse = 0;
    EXPECT_THROW(bad.validate(), InvalidParameter);
}

TEST(Coupling, AxialOnlyClosedForm) {
    // cos^2 standing wave sampled on a uniform phase grid: discrete moments are exact.
    const double g0 = 303.5e3;
    std::vector<double> g;
    const int k = 4000;
    for (int i = 0; i < k; ++i) g.push_back(g0 * std::cos(M_PI * i / k));
    auto p = effective_params(std::span<const double>(g));
    EXPECT_NEAR(p.n_eff_fraction, 2.0 / 3.0, 1e-10);
    EXPECT_NEAR(p.g_eff, std::sqrt(0.75) * g0, 1e-10 * g0);
}

TEST(Coupling, UniformCouplingIsExact) {
    std::vector<double> g(100, 1e5);
    auto p = effective_params(std::span<const double>(g));
    EXPECT_NEAR(p.n_eff_fraction, 1.0, 1e-14);
    EXPECT_NEAR(p.g_eff, 1e5, 1e-8);
    EXPECT_NEAR(p.fraction_error, 0.0, 1e-12);
}

TEST(Coupling, PeakAtWaistAntinode) {
    auto c = default_cavity();
    // The mirror-symmetric standing wave has a node at the waist centre.
    EXPECT_NEAR(mode_coupling(Vec3::Zero(), c), 0.0, 1e-9);
    EXPECT_NEAR(mode_coupling(Vec3(0, 0, c.lambda_probe / 4), c), c.g0_peak, 1e-6 * c.g0_peak);
    EXPECT_NEAR(mode_coupling(Vec3(c.w0, 0, c.lambda_probe / 4), c), c.g0_peak * std::exp(-1.0), 1e-6 * c.g0_peak);
}

TEST(Coupling, SampledCloudStatistics) {
    auto c = default_cavity();
    AtomCloud cloud;
    Rng rng = trial_rng(11, 0, "cloud");
    auto pos = sample_atom_positions(cloud, c, 200000, rng);
    double sx = 0;
    for (auto& r : pos) sx += r.x() * r.x();
    EXPECT_NEAR(std::sqrt(sx / pos.size()), cloud.x_rms, 0.02 * cloud.x_rms);
    auto p = effective_params(pos, c);
    EXPECT_GT(p.n_eff_fraction, 0.6);
    EXPECT_LT(p.n_eff_fraction, 0.7);
}

TEST(Spectroscopy, DressedModes) {
    auto c = default_cavity();
    auto m = dressed_modes(3.5e5, 253e3, 0.0, c);
    EXPECT_NEAR(m.splitting(), 2 * 253e3 * std::sqrt(3.5e5), 1e-3);
    EXPECT_NEAR(m.fwhm, 0.5 * (c.kappa + c.gamma_atom), 1e-6);
    EXPECT_THROW(dressed_modes(-1, 253e3, 0, c), InvalidParameter);
}

TEST(Spectroscopy, EmptyCavityTransmission) {
    auto c = default_cavity();
    EXPECT_NEAR(transmission(0.0, 0.0, 253e3, 0.0, c), 1.0, 1e-12);
    EXPECT_NEAR(transmission(0.5 * c.kappa, 0.0, 253e3, 0.0, c), 0.5, 1e-12);
}

TEST(Spectroscopy, DressedPeakWidth) {
    // Numerical half-maximum width of the upper dressed mode.
    auto c = default_cavity();
    const double n = 3.5e5, g = 253e3;
    auto m = dressed_modes(n, g, 0, c);
    double peak = 0, fpk = 0;
    for (double f = m.omega_plus - 3e6; f < m.omega_plus + 3e6; f += 1e3) {
        double t = transmission(f, n, g, 0, c);
        if (t > peak) peak = t, fpk = f;
    }
    double lo = fpk, hi = fpk;
    while (transmission(lo, n, g, 0, c) > peak / 2) lo -= 1e3;
    while (transmission(hi, n, g, 0, c) > peak / 2) hi += 1e3;
    EXPECT_NEAR(hi - lo, m.fwhm, 0.02 * m.fwhm);
}
