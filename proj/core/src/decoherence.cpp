#include "qnd/decoherence.hpp"

#include <algorithm>
#include <cmath>

#include "qnd/errors.hpp"

namespace qnd {

void ProbeImpact::validate() const {
    if (photons < 0) throw InvalidParameter("probe: photons must be >= 0");
    if (scatter_fraction < 0 || scatter_fraction > 1) throw InvalidParameter("probe: scatter fraction must lie in [0, 1]");
    if (raman_branch < 0 || raman_branch > 1) throw InvalidParameter("probe: raman branch must lie in [0, 1]");
    if (!(q_total > 0 && q_total <= 1)) throw InvalidParameter("probe: q_total must lie in (0, 1]");
    if (k1 < 0 || k2 < 0 || technical_phi_var < 0) throw InvalidParameter("probe: k1, k2, technical variance must be >= 0");
}

double contrast_model(double c_initial, double photons, double k1, double k2) {
    return c_initial - k1 * photons - k2 * photons * photons;
}

CollectiveSpinState apply_probe_decoherence(const CollectiveSpinState& s, const ProbeImpact& impact, Rng& rng) {
    impact.validate();
    if (impact.photons == 0) return s;

    double total = s.probe_photons + impact.photons;
    double c_new = std::min(s.contrast, contrast_model(s.contrast_initial, total, impact.k1, impact.k2));
    bool clamped = false;
    if (c_new <= 0) {
        c_new = 0;
        clamped = true;
    }

    auto pops = populations(s);
    auto trials = static_cast<long long>(std::llround(impact.scattered()));
    double lost = static_cast<double>(binomial(rng, trials, impact.raman_branch));
    lost = std::min(lost, std::floor(pops.n_up));
    lost = std::min(lost, s.n_eff - 1.0);

    CollectiveSpinState out = s;
    if (c_new > 0) {
        out = reshape(s, s.n_eff - lost, c_new, s.jz() - 0.5 * lost);
    } else {
        out.n_eff = s.n_eff - lost;
        out.contrast = 0;
    }
    out.probe_photons = total;
    out.contrast_clamped = s.contrast_clamped || clamped;
    return out;
}

CollectiveSpinState backaction_kick(const CollectiveSpinState& s, double photons, double q_total, Rng& rng,
                                    double technical_phi_var) {
    if (!(q_total > 0 && q_total <= 1)) throw InvalidParameter("backaction_kick: q_total must lie in (0, 1]");
    if (photons <= 0 || s.contrast <= 0) return s;
    Vec3 h = Vec3::UnitZ() - s.mean_dir.z() * s.mean_dir;
    if (h.norm() < 1e-12) return s;
    h.normalize();
    Vec3 p = s.mean_dir.cross(h).normalized();

    double s_hh = h.dot(s.cov * h);
    double s_pp = p.dot(s.cov * p);
    double s_hp = h.dot(s.cov * p);
    double target = s.heisenberg_bound() / q_total;
    double k = s_hh > 0 ? (target + s_hp * s_hp) / s_hh - s_pp : 0.0;
    k = std::max(k, 0.0) + technical_phi_var;

    CollectiveSpinState out = s;
    out.fluct += gauss(rng, std::sqrt(k)) * p;
    out.cov += k * p * p.transpose();
    return out;
}

double predict_k1(double n_eff, double scatter_fraction) {
    if (!(n_eff > 0)) throw InvalidParameter("predict_k1: n_eff must be positive");
    return scatter_fraction / n_eff;
}

double raman_splitting_decay(double n_up, double photons, const ProbeImpact& impact) {
    return std::max(0.0, n_up - impact.raman_branch * impact.scatter_fraction * photons);
}

}  // namespace qnd
