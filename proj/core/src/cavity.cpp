#include "qnd/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qnd/errors.hpp"

namespace qnd {

void CavityConfig::validate() const {
    if (!(fsr > 0 && finesse > 0 && lambda_probe > 0 && lambda_lattice > 0))
        throw InvalidParameter("cavity: fsr, finesse and wavelengths must be positive");
    if (!(g0_peak >= 0 && w0 > 0 && z_r > 0 && kappa > 0 && gamma_atom >= 0))
        throw InvalidParameter("cavity: coupling, waist, Rayleigh length and linewidths must be positive");
    if (std::abs(kappa - fsr / finesse) > 1e-9 * kappa)
        throw InvalidParameter("cavity: kappa must equal fsr/finesse");
    if (std::abs(w0 - std::sqrt(lambda_probe * z_r / kPi)) > 1e-9 * w0)
        throw InvalidParameter("cavity: w0 inconsistent with z_r and lambda_probe");
}

CavityConfig make_cavity(double fsr, double finesse, double lambda_probe, double lambda_lattice,
                         double g0_peak, double z_r, double gamma_atom) {
    CavityConfig c;
    c.fsr = fsr;
    c.finesse = finesse;
    c.lambda_probe = lambda_probe;
    c.lambda_lattice = lambda_lattice;
    c.g0_peak = g0_peak;
    c.z_r = z_r;
    c.w0 = std::sqrt(lambda_probe * z_r / kPi);
    c.kappa = fsr / finesse;
    c.gamma_atom = gamma_atom;
    c.validate();
    return c;
}

ModeGeometry geometry_from_mode_spacings(double fsr, double spacing_01, double lambda_probe) {
    if (!(fsr > 0) || !(lambda_probe > 0)) throw InvalidParameter("fsr and wavelength must be positive");
    if (!(spacing_01 > 0 && spacing_01 < fsr))
        throw InvalidParameter("transverse mode spacing must lie in (0, fsr), got " + std::to_string(spacing_01));
    ModeGeometry g{};
    g.length = kSpeedOfLight / (2.0 * fsr);
    g.gouy_phase = kPi * spacing_01 / fsr;
    double c = std::cos(g.gouy_phase);
    if (c >= 1.0) throw GeometryError("flat-mirror limit: no stable mode");
    g.mirror_radius = g.length / (1.0 - c);
    if (g.mirror_radius <= g.length / 2.0) throw GeometryError("mirror radius <= L/2: unstable resonator");
    g.z_r = 0.5 * g.length * std::sqrt((2.0 * g.mirror_radius - g.length) / g.length);
    g.w0 = std::sqrt(lambda_probe * g.z_r / kPi);
    return g;
}

CavityConfig default_cavity() {
    CavityConfig c;
    auto g = geometry_from_mode_spacings(c.fsr, 2257e6, c.lambda_probe);
    return make_cavity(c.fsr, c.finesse, c.lambda_probe, c.lambda_lattice, c.g0_peak, g.z_r, c.gamma_atom);
}

double transverse_spacing(const ModeGeometry& g, double fsr, int order) {
    double gouy = std::acos(1.0 - g.length / g.mirror_radius);
    double s = std::fmod(order * gouy / kPi * fsr, fsr);
    return s < 0 ? s + fsr : s;
}

void AtomCloud::validate() const {
    if (!(n_total > 0)) throw InvalidParameter("cloud: n_total must be positive");
    if (sigma_z < 0 || x_rms < 0 || y_rms < 0 || z_site_rms < 0)
        throw InvalidParameter("cloud: extents must be non-negative");
    if (std::abs(x_rms - y_rms) > 1e-12 * std::max(x_rms, 1e-30))
        throw InvalidParameter("cloud: x_rms and y_rms must match (cylindrical symmetry)");
}

double trap_depth_kelvin(double trap_depth_hz) { return kPlanck * trap_depth_hz / kBoltzmann; }

double radial_rms_from_temperature(double w_lattice, double temp_k, double trap_depth_hz) {
    if (!(trap_depth_hz > 0) || temp_k < 0) throw InvalidParameter("trap depth must be positive, temperature >= 0");
    return 0.5 * w_lattice * std::sqrt(temp_k / trap_depth_kelvin(trap_depth_hz));
}

double mode_waist(double z, const CavityConfig& cfg) {
    double u = z / cfg.z_r;
    return cfg.w0 * std::sqrt(1.0 + u * u);
}

double mode_coupling(const Vec3& r, const CavityConfig& cfg) {
    double w = mode_waist(r.z(), cfg);
    double rho2 = r.x() * r.x() + r.y() * r.y();
    double k = 2.0 * kPi / cfg.lambda_probe;
    return cfg.g0_peak * (cfg.w0 / w) * std::exp(-rho2 / (w * w)) * std::sin(k * r.z());
}

std::vector<Vec3> sample_atom_positions(const AtomCloud& cloud, const CavityConfig& cfg, std::size_t n, Rng& rng) {
    if (n < 1) throw InvalidParameter("sample_atom_positions: n must be >= 1");
    cloud.validate();
    double site = cfg.lambda_lattice / 2.0;
    std::vector<Vec3> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double j = std::round(gauss(rng, cloud.sigma_z) / site);
        double z = cloud.axial_offset + j * site + gauss(rng, cloud.z_site_rms);
        out.emplace_back(gauss(rng, cloud.x_rms), gauss(rng, cloud.y_rms), z);
    }
    return out;
}

EffectiveParams effective_params(std::span<const double> couplings) {
    if (couplings.empty()) throw InvalidParameter("effective_params: empty position list");
    // u = (2g)^2; N/N_tot = <u>^2/<u^2>, (2g_eff)^2 = <u^2>/<u>.
    const double n = static_cast<double>(couplings.size());
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    for (double g : couplings) {
        double u = 4.0 * g * g;
        s1 += u;
        s2 += u * u;
        s3 += u * u * u;
        s4 += u * u * u * u;
    }
    double m1 = s1 / n, m2 = s2 / n, m3 = s3 / n, m4 = s4 / n;
    if (m1 <= 0) throw InvalidParameter("effective_params: no atom couples to the mode");
    EffectiveParams p;
    p.samples = couplings.size();
    p.n_eff_fraction = m1 * m1 / m2;
    p.g_eff = 0.5 * std::sqrt(m2 / m1);

    // Delta-method errors from the sample covariance of (u, u^2).
    double v11 = m2 - m1 * m1, v22 = m4 - m2 * m2, v12 = m3 - m1 * m2;
    auto rel_var = [&](double a, double b) {  // var of log(m1^a m2^b)
        double da = a / m1, db = b / m2;
        return (da * da * v11 + db * db * v22 + 2 * da * db * v12) / n;
    };
    p.fraction_error = std::sqrt(std::max(0.0, rel_var(2.0, -1.0)));
    p.mc_error = std::sqrt(std::max(0.0, rel_var(-0.5, 0.5)));
    return p;
}

EffectiveParams effective_params(const std::vector<Vec3>& positions, const CavityConfig& cfg) {
    if (positions.empty()) throw InvalidParameter("effective_params: empty position list");
    std::vector<double> g;
    g.reserve(positions.size());
    for (const auto& r : positions) g.push_back(mode_coupling(r, cfg));
    return effective_params(std::span<const double>(g));
}

}  // namespace qnd
