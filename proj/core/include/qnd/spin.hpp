#pragma once

#include <Eigen/Dense>

#include "qnd/rng.hpp"

namespace qnd {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// R[psi, phi, theta]: right-handed rotation by psi about the axis with
// azimuth phi and latitude theta.
struct Rotation {
    double psi = 0.0;
    double phi_axis = 0.0;
    double theta_axis = 0.0;

    Vec3 axis() const;
    Mat3 matrix() const;
};

// Unit east (increasing azimuth) and north (increasing latitude) vectors at m.
// At the poles east is fixed to +y.
struct TangentFrame {
    Vec3 east;
    Vec3 north;
};
TangentFrame tangent_frame(const Vec3& m);

// Gaussian tangent-plane model of a collective spin. North pole = all atoms
// in the upper clock state.
struct CollectiveSpinState {
    double n_eff = 0.0;
    Vec3 mean_dir = Vec3::UnitX();
    double contrast = 1.0;
    double contrast_initial = 1.0;
    Vec3 fluct = Vec3::Zero();  // latent quantum-noise displacement, tangent to mean_dir
    Mat3 cov = Mat3::Zero();    // conditional covariance of fluct, tangent to mean_dir
    double probe_photons = 0.0; // cumulative probe photons seen by this state
    bool contrast_clamped = false;

    double fluct_theta() const;
    double fluct_phi() const;
    double var_theta() const;
    double var_phi() const;
    // Determinant of the 2x2 tangent covariance; equals var_theta*var_phi
    // when the quadratures are uncorrelated.
    double tangent_det() const;
    // (1/(n C))^2, the minimum-uncertainty product in angle units.
    double heisenberg_bound() const;

    Vec3 direction() const;  // normalize(mean_dir + fluct)
    double latitude() const;
    double jz() const;
};

CollectiveSpinState prepare_css(double n_eff, const Vec3& direction, double contrast, Rng& rng);
CollectiveSpinState prepare_css(double n_eff, const Vec3& direction, double contrast = 1.0);

CollectiveSpinState rotate(const CollectiveSpinState& s, const Rotation& r);
CollectiveSpinState rotate(const CollectiveSpinState& s, const Mat3& rot);

struct Populations {
    double n_up;
    double n_down;
};
Populations populations(const CollectiveSpinState& s);

// Kalman update of the conditional covariance after a J_z readout with the
// given noise variance (population^2). The latent fluctuation is untouched.
CollectiveSpinState condition_on_jz(const CollectiveSpinState& s, double readout_var);

// Changes atom number and contrast and moves the Bloch vector so that
// J_z = jz_new exactly. Angular fluctuations are rescaled by (n C)/(n' C').
CollectiveSpinState reshape(const CollectiveSpinState& s, double n_new, double c_new, double jz_new);

}  // namespace qnd
