#include "qnd/spectroscopy.hpp"

#include <algorithm>
#include <cmath>

#include "qnd/errors.hpp"

namespace qnd {

void SweepConfig::validate() const {
    if (!(span > 0)) throw InvalidParameter("sweep: span must be positive");
    if (!(photons > 0)) throw InvalidParameter("sweep: photons must be positive");
    if (!(detection_efficiency > 0 && detection_efficiency <= 1))
        throw InvalidParameter("sweep: detection efficiency must lie in (0, 1]");
    if (points < 16 || points % 2 != 0) throw InvalidParameter("sweep: points must be even and >= 16");
}

DressedModes dressed_modes(double n_up, double g_eff, double detuning_ac, const CavityConfig& cfg) {
    if (n_up < 0) throw InvalidParameter("dressed_modes: n_up must be non-negative");
    double omega = std::sqrt(n_up) * 2.0 * g_eff;
    double root = std::sqrt(omega * omega + detuning_ac * detuning_ac);
    return {0.5 * detuning_ac + 0.5 * root, 0.5 * detuning_ac - 0.5 * root, 0.5 * (cfg.kappa + cfg.gamma_atom)};
}

std::complex<double> cavity_amplitude(double omega, double n_up, double g_eff, double detuning_ac,
                                      const CavityConfig& cfg) {
    using namespace std::complex_literals;
    double half_rabi = 0.5 * std::sqrt(std::max(n_up, 0.0)) * 2.0 * g_eff;
    std::complex<double> atom = 0.5 * cfg.gamma_atom - 1i * (omega - detuning_ac);
    std::complex<double> denom = 0.5 * cfg.kappa - 1i * omega + half_rabi * half_rabi / atom;
    return 1.0 / denom;
}

double transmission(double omega, double n_up, double g_eff, double detuning_ac, const CavityConfig& cfg) {
    return std::norm(0.5 * cfg.kappa * cavity_amplitude(omega, n_up, g_eff, detuning_ac, cfg));
}

namespace {

std::vector<double> sweep_grid(double n_up, double g_eff, const SweepConfig& sweep, const CavityConfig& cfg) {
    double centre_n = sweep.nominal_n_up >= 0 ? sweep.nominal_n_up : n_up;
    auto modes = dressed_modes(centre_n, g_eff, sweep.detuning_ac, cfg);
    int half = sweep.points / 2;
    double step = sweep.span / half;
    std::vector<double> freq;
    freq.reserve(sweep.points);
    for (double centre : {modes.omega_minus, modes.omega_plus})
        for (int i = 0; i < half; ++i) freq.push_back(centre - 0.5 * sweep.span + (i + 0.5) * step);
    return freq;
}

}  // namespace

SpectrumTrace model_sweep(double n_up, double g_eff, const SweepConfig& sweep, const CavityConfig& cfg) {
    sweep.validate();
    SpectrumTrace t;
    t.freq = sweep_grid(n_up, g_eff, sweep, cfg);
    // Each component carries M/2 photons spread over points/2 bins.
    double per_bin = sweep.detection_efficiency * sweep.photons / sweep.points;
    t.model_power.reserve(t.freq.size());
    for (double f : t.freq) t.model_power.push_back(per_bin * transmission(f, n_up, g_eff, sweep.detuning_ac, cfg));
    t.power = t.model_power;
    return t;
}

SpectrumTrace synthesize_sweep(double n_up, double g_eff, const SweepConfig& sweep, const CavityConfig& cfg,
                               Rng& rng) {
    SpectrumTrace t = model_sweep(n_up, g_eff, sweep, cfg);
    for (std::size_t i = 0; i < t.power.size(); ++i) t.power[i] = static_cast<double>(poisson(rng, t.model_power[i]));
    return t;
}

PopulationEstimate population_from_splitting(const SplittingFit& fit, double g_eff) {
    if (!fit.converged) throw FitError("population_from_splitting: fit did not converge");
    if (!(g_eff > 0)) throw InvalidParameter("population_from_splitting: g_eff must be positive");
    double r = fit.splitting / (2.0 * g_eff);
    double n = r * r;
    return {n, 2.0 * std::sqrt(n) * fit.sigma_splitting / (2.0 * g_eff)};
}

LossPartition loss_partition(const SweepConfig& sweep, double n_up, double g_eff, const CavityConfig& cfg) {
    auto freq = sweep_grid(n_up, g_eff, sweep, cfg);
    double half_rabi = std::sqrt(std::max(n_up, 0.0)) * g_eff;
    double w_sum = 0, sc = 0, mi = 0;
    for (double f : freq) {
        double photons = std::norm(cavity_amplitude(f, n_up, g_eff, sweep.detuning_ac, cfg));
        double d = f - sweep.detuning_ac;
        // atomic excitation per intracavity photon
        double r = half_rabi * half_rabi / (0.25 * cfg.gamma_atom * cfg.gamma_atom + d * d);
        double atom_loss = cfg.gamma_atom > 0 ? cfg.gamma_atom * r : 0.0;
        double total = atom_loss + cfg.kappa;
        w_sum += photons;
        sc += photons * atom_loss / total;
        mi += photons * cfg.kappa / total;
    }
    return {sc / w_sum, mi / w_sum};
}

double scattered_fraction(const SweepConfig& sweep, double n_up, double g_eff, const CavityConfig& cfg) {
    return loss_partition(sweep, n_up, g_eff, cfg).scattered;
}

}  // namespace qnd
