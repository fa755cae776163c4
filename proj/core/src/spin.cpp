#include "qnd/spin.hpp"

#include <algorithm>
#include <cmath>

#include "qnd/errors.hpp"

namespace qnd {

Vec3 Rotation::axis() const {
    return {std::cos(theta_axis) * std::cos(phi_axis), std::cos(theta_axis) * std::sin(phi_axis),
            std::sin(theta_axis)};
}

Mat3 Rotation::matrix() const {
    return Eigen::AngleAxisd(psi, axis()).toRotationMatrix();
}

TangentFrame tangent_frame(const Vec3& m) {
    Vec3 east = Vec3::UnitZ().cross(m);
    if (east.norm() < 1e-12)
        east = Vec3::UnitY();
    else
        east.normalize();
    Vec3 north = m.cross(east).normalized();
    return {east, north};
}

double CollectiveSpinState::fluct_theta() const { return fluct.dot(tangent_frame(mean_dir).north); }
double CollectiveSpinState::fluct_phi() const { return fluct.dot(tangent_frame(mean_dir).east); }

double CollectiveSpinState::var_theta() const {
    Vec3 n = tangent_frame(mean_dir).north;
    return n.dot(cov * n);
}

double CollectiveSpinState::var_phi() const {
    Vec3 e = tangent_frame(mean_dir).east;
    return e.dot(cov * e);
}

double CollectiveSpinState::tangent_det() const {
    auto f = tangent_frame(mean_dir);
    double a = f.north.dot(cov * f.north);
    double b = f.east.dot(cov * f.east);
    double c = f.north.dot(cov * f.east);
    return a * b - c * c;
}

double CollectiveSpinState::heisenberg_bound() const {
    double nc = n_eff * contrast;
    return nc > 0.0 ? 1.0 / (nc * nc) : INFINITY;
}

Vec3 CollectiveSpinState::direction() const { return (mean_dir + fluct).normalized(); }

double CollectiveSpinState::latitude() const { return std::asin(std::clamp(direction().z(), -1.0, 1.0)); }

double CollectiveSpinState::jz() const { return 0.5 * n_eff * contrast * direction().z(); }

CollectiveSpinState prepare_css(double n_eff, const Vec3& direction, double contrast) {
    if (!(n_eff > 0.0)) throw InvalidParameter("prepare_css: n_eff must be positive");
    if (std::abs(direction.norm() - 1.0) > 1e-9) throw InvalidParameter("prepare_css: direction must be a unit vector");
    if (!(contrast > 0.0 && contrast <= 1.0)) throw InvalidParameter("prepare_css: contrast must lie in (0, 1]");
    CollectiveSpinState s;
    s.n_eff = n_eff;
    s.mean_dir = direction.normalized();
    s.contrast = contrast;
    s.contrast_initial = contrast;
    // Variance 1/(n C^2) keeps Var(J_z) = n/4 for any contrast.
    double var = 1.0 / (n_eff * contrast * contrast);
    auto f = tangent_frame(s.mean_dir);
    s.cov = var * (f.north * f.north.transpose() + f.east * f.east.transpose());
    return s;
}

CollectiveSpinState prepare_css(double n_eff, const Vec3& direction, double contrast, Rng& rng) {
    CollectiveSpinState s = prepare_css(n_eff, direction, contrast);
    double sd = std::sqrt(1.0 / (n_eff * contrast * contrast));
    auto f = tangent_frame(s.mean_dir);
    double dth = gauss(rng, sd);
    double dph = gauss(rng, sd);
    s.fluct = dth * f.north + dph * f.east;
    return s;
}

CollectiveSpinState rotate(const CollectiveSpinState& s, const Mat3& rot) {
    CollectiveSpinState out = s;
    out.mean_dir = (rot * s.mean_dir).normalized();
    out.fluct = rot * s.fluct;
    out.cov = rot * s.cov * rot.transpose();
    return out;
}

CollectiveSpinState rotate(const CollectiveSpinState& s, const Rotation& r) { return rotate(s, r.matrix()); }

Populations populations(const CollectiveSpinState& s) {
    double up = 0.5 * s.n_eff * (1.0 + s.contrast * s.direction().z());
    return {up, s.n_eff - up};
}

CollectiveSpinState condition_on_jz(const CollectiveSpinState& s, double readout_var) {
    Vec3 h = Vec3::UnitZ() - s.mean_dir.z() * s.mean_dir;
    double scale = 0.5 * s.n_eff * s.contrast;
    if (h.norm() < 1e-12 || scale <= 0.0) return s;
    double r = readout_var / (scale * scale);
    Vec3 ch = s.cov * h;
    double denom = h.dot(ch) + r;
    if (denom <= 0.0) return s;
    CollectiveSpinState out = s;
    out.cov = s.cov - ch * ch.transpose() / denom;
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
}

CollectiveSpinState reshape(const CollectiveSpinState& s, double n_new, double c_new, double jz_new) {
    if (!(n_new > 0.0)) throw InvalidParameter("reshape: atom number must stay positive");
    CollectiveSpinState out = s;
    out.n_eff = n_new;
    out.contrast = c_new;
    if (c_new <= 0.0) {
        out.contrast = 0.0;
        return out;
    }
    double f = (s.n_eff * s.contrast) / (n_new * c_new);
    out.fluct = s.fluct * f;
    out.cov = s.cov * (f * f);

    double vz_target = std::clamp(2.0 * jz_new / (n_new * c_new), -1.0, 1.0);
    Vec3 v = out.direction();
    double delta = std::asin(vz_target) - std::asin(std::clamp(v.z(), -1.0, 1.0));
    if (std::abs(delta) < 1e-15) return out;
    Vec3 axis = v.cross(Vec3::UnitZ());
    if (axis.norm() < 1e-12) axis = tangent_frame(v).east;
    axis.normalize();
    return rotate(out, Mat3(Eigen::AngleAxisd(delta, axis)));
}

}  // namespace qnd
