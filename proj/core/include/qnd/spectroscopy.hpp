#pragma once

#include <complex>
#include <vector>

#include "qnd/cavity.hpp"
#include "qnd/rng.hpp"

namespace qnd {

struct SweepConfig {
    double span = 25e6;           // Hz scanned around each dressed mode
    double duration = 70e-6;      // s, recorded only (quasi-static model)
    double photons = 9.5e4;       // probe photons per splitting measurement
    double detection_efficiency = 0.4;
    int points = 64;              // total bins, split evenly between the two components
    double detuning_ac = 0.0;     // atom minus bare-cavity detuning, Hz
    double nominal_n_up = -1.0;   // where the scan windows are centred; < 0 means the true n_up

    void validate() const;
};

struct DressedModes {
    double omega_plus;
    double omega_minus;
    double fwhm;
    double splitting() const { return omega_plus - omega_minus; }
};

DressedModes dressed_modes(double n_up, double g_eff, double detuning_ac, const CavityConfig& cfg);

// Intracavity field amplitude for unit drive at probe offset omega (Hz from
// the bare cavity), linear response.
std::complex<double> cavity_amplitude(double omega, double n_up, double g_eff, double detuning_ac,
                                      const CavityConfig& cfg);
// Power transmission, 1 on the empty-cavity resonance.
double transmission(double omega, double n_up, double g_eff, double detuning_ac, const CavityConfig& cfg);

struct SpectrumTrace {
    std::vector<double> freq;         // Hz from bare cavity
    std::vector<double> power;        // detected counts per bin
    std::vector<double> model_power;  // noiseless expectation
};

SpectrumTrace model_sweep(double n_up, double g_eff, const SweepConfig& sweep, const CavityConfig& cfg);
SpectrumTrace synthesize_sweep(double n_up, double g_eff, const SweepConfig& sweep, const CavityConfig& cfg,
                               Rng& rng);

struct SplittingFit {
    double omega_plus = 0.0;
    double omega_minus = 0.0;
    double fwhm = 0.0;
    double splitting = 0.0;
    double sigma_splitting = 0.0;
    double amp_plus = 0.0;
    double amp_minus = 0.0;
    double baseline = 0.0;
    bool converged = false;
    double chi2 = 0.0;
    int iterations = 0;
};

struct FitOptions {
    int max_iterations = 100;
    double tolerance = 1e-10;
};

SplittingFit fit_splitting(const SpectrumTrace& trace, const FitOptions& opt = {});

struct PopulationEstimate {
    double n_up;
    double sigma_n;
};

PopulationEstimate population_from_splitting(const SplittingFit& fit, double g_eff);

struct LossPartition {
    double scattered;  // fraction of lost probe photons scattered into free space
    double mirror;     // fraction leaving through the mirrors
};

LossPartition loss_partition(const SweepConfig& sweep, double n_up, double g_eff, const CavityConfig& cfg);
double scattered_fraction(const SweepConfig& sweep, double n_up, double g_eff, const CavityConfig& cfg);

}  // namespace qnd
