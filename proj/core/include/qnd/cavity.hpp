#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qnd/rng.hpp"
#include "qnd/spin.hpp"

namespace qnd {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPlanck = 6.62607015e-34;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kPi = 3.14159265358979323846;

// All frequencies are in cycles per second (Hz), not rad/s.
struct CavityConfig {
    double fsr = 7.828e9;
    double finesse = 710.0;
    double lambda_probe = 795e-9;
    double lambda_lattice = 823e-9;
    double g0_peak = 303.5e3;
    double w0 = 0.0;
    double z_r = 0.0;
    double kappa = 0.0;
    double gamma_atom = 5.75e6;

    void validate() const;
};

// Fills kappa from fsr/finesse and w0 from z_r.
CavityConfig make_cavity(double fsr, double finesse, double lambda_probe, double lambda_lattice,
                         double g0_peak, double z_r, double gamma_atom);

struct ModeGeometry {
    double length;
    double mirror_radius;
    double gouy_phase;  // single-pass Gouy phase, rad
    double z_r;
    double w0;
};

ModeGeometry geometry_from_mode_spacings(double fsr, double spacing_01, double lambda_probe);

// 7.828 GHz FSR, finesse 710, 2257 MHz TEM01 spacing, Rb D1 probe, 823 nm lattice.
CavityConfig default_cavity();

// Transverse-mode spacing of order (m+n) for a symmetric cavity, folded into [0, fsr).
double transverse_spacing(const ModeGeometry& g, double fsr, int order);

struct AtomCloud {
    double n_total = 1.05e6;
    double sigma_z = 0.84e-3;
    double x_rms = 10e-6;
    double y_rms = 10e-6;
    double z_site_rms = 24e-9;
    double temp_radial = 25e-6;
    double trap_depth = 7.4e6;  // U0/h in Hz
    double axial_offset = 0.0;  // cloud centre relative to the mode waist, m

    void validate() const;
};

double trap_depth_kelvin(double trap_depth_hz);
// x_rms = (w_lattice/2) sqrt(T/U0)
double radial_rms_from_temperature(double w_lattice, double temp_k, double trap_depth_hz);

double mode_waist(double z, const CavityConfig& cfg);
double mode_coupling(const Vec3& r, const CavityConfig& cfg);

std::vector<Vec3> sample_atom_positions(const AtomCloud& cloud, const CavityConfig& cfg, std::size_t n, Rng& rng);

struct EffectiveParams {
    double n_eff_fraction = 0.0;
    double g_eff = 0.0;
    double mc_error = 0.0;        // relative error of g_eff
    double fraction_error = 0.0;  // relative error of n_eff_fraction
    std::size_t samples = 0;
};

EffectiveParams effective_params(const std::vector<Vec3>& positions, const CavityConfig& cfg);
// Same moment solution from per-atom couplings g_i (Hz).
EffectiveParams effective_params(std::span<const double> couplings);

}  // namespace qnd
