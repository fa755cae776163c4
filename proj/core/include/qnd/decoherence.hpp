#pragma once

#include "qnd/rng.hpp"
#include "qnd/spin.hpp"

namespace qnd {

struct ProbeImpact {
    double photons = 9.5e4;          // M for one splitting measurement
    double scatter_fraction = 0.41;  // M_sc / M
    double k1 = 5.5e-7;              // per photon
    double k2 = 1.0e-12;             // per photon^2
    double raman_branch = 0.5;       // p_R
    double q_total = 1.0;            // combined back-action efficiency
    double technical_phi_var = 0.0;  // rad^2 added to the phi quadrature per measurement

    double scattered() const { return scatter_fraction * photons; }
    void validate() const;
};

// C(M) = C_i - k1 M - k2 M^2, unclamped.
double contrast_model(double c_initial, double photons, double k1, double k2);

// Contrast loss on the cumulative photon count, then Binomial Raman loss
// removed from the upper state. J_z shifts by -k/2 for k lost atoms.
CollectiveSpinState apply_probe_decoherence(const CollectiveSpinState& s, const ProbeImpact& impact, Rng& rng);

// Kicks the quadrature conjugate to J_z so the conditional covariance
// determinant reaches bound^2 / q_total.
CollectiveSpinState backaction_kick(const CollectiveSpinState& s, double photons, double q_total, Rng& rng,
                                    double technical_phi_var = 0.0);

double predict_k1(double n_eff, double scatter_fraction);

double raman_splitting_decay(double n_up, double photons, const ProbeImpact& impact);

}  // namespace qnd
