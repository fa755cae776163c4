// Poisson-weighted Levenberg-Marquardt fit of a Lorentzian doublet with a
// shared width and a flat baseline.

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "qnd/errors.hpp"
#include "qnd/spectroscopy.hpp"

namespace qnd {
namespace {

constexpr int kParams = 6;  // c_minus, c_plus, width, a_minus, a_plus, baseline
using Params = Eigen::Matrix<double, kParams, 1>;
using Jac = Eigen::Matrix<double, Eigen::Dynamic, kParams>;

void evaluate(const std::vector<double>& x, const Params& p, Eigen::VectorXd& f, Jac* jac) {
    const std::size_t n = x.size();
    f.resize(n);
    if (jac) jac->resize(n, kParams);
    for (std::size_t i = 0; i < n; ++i) {
        double val = p(5);
        double d_width = 0.0;
        for (int k = 0; k < 2; ++k) {
            double c = p(k), w = p(2), a = p(3 + k);
            double u = 2.0 * (x[i] - c) / w;
            double l = 1.0 / (1.0 + u * u);
            val += a * l;
            if (jac) {
                double dl_du = -2.0 * u * l * l;
                (*jac)(i, k) = a * dl_du * (-2.0 / w);
                (*jac)(i, 3 + k) = l;
                d_width += a * dl_du * (-u / w);
            }
        }
        if (jac) {
            (*jac)(i, 2) = d_width;
            (*jac)(i, 5) = 1.0;
        }
        f(i) = val;
    }
}

// Half width (in bins) of the peak at idx, measured against half its height.
int half_width_bins(const std::vector<double>& y, std::size_t idx, double floor) {
    double half = floor + 0.5 * (y[idx] - floor);
    int left = 0, right = 0;
    for (std::size_t j = idx; j > 0 && y[j - 1] > half; --j) ++left;
    for (std::size_t j = idx + 1; j < y.size() && y[j] > half; ++j) ++right;
    return std::max(left, right) + 1;
}

}  // namespace

SplittingFit fit_splitting(const SpectrumTrace& trace, const FitOptions& opt) {
    const auto& x = trace.freq;
    const auto& y = trace.power;
    const std::size_t n = x.size();
    if (n < 16 || y.size() != n) throw FitError("fit_splitting: need >= 8 points per resonance");
    if (std::all_of(y.begin(), y.end(), [](double v) { return v <= 0.0; }))
        throw FitError("fit_splitting: degenerate trace (no counts)");

    // Initial guess: global maximum, then the best bin outside its neighbourhood.
    std::size_t i1 = std::max_element(y.begin(), y.end()) - y.begin();
    double floor = *std::min_element(y.begin(), y.end());
    int hw = half_width_bins(y, i1, floor);
    int excl = std::max(2, hw);
    std::size_t i2 = n;
    for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(static_cast<long>(j) - static_cast<long>(i1)) <= excl) continue;
        if (i2 == n || y[j] > y[i2]) i2 = j;
    }
    if (i2 == n) throw FitError("fit_splitting: could not locate a second resonance");
    if (x[i2] < x[i1]) std::swap(i1, i2);
    double bin = std::abs(x[1] - x[0]);

    Params p;
    p << x[i1], x[i2], std::max(2.0 * hw * bin, 2.0 * bin), y[i1] - floor, y[i2] - floor, floor;

    Eigen::VectorXd f, w(n), r(n);
    Jac J;
    auto weighted_cost = [&](const Params& q, const Eigen::VectorXd& wt) {
        Eigen::VectorXd fq;
        evaluate(x, q, fq, nullptr);
        double c = 0;
        for (std::size_t i = 0; i < n; ++i) c += wt(i) * (y[i] - fq(i)) * (y[i] - fq(i));
        return c;
    };

    SplittingFit out;
    double lambda = 1e-3;
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        evaluate(x, p, f, &J);
        for (std::size_t i = 0; i < n; ++i) w(i) = 1.0 / std::max(f(i), 1.0);
        r = Eigen::Map<const Eigen::VectorXd>(y.data(), n) - f;
        Eigen::Matrix<double, kParams, kParams> A = J.transpose() * w.asDiagonal() * J;
        Params g = J.transpose() * (w.array() * r.array()).matrix();
        double cost = (w.array() * r.array().square()).sum();

        bool stepped = false;
        for (int tries = 0; tries < 12; ++tries) {
            Eigen::Matrix<double, kParams, kParams> Ad = A;
            Ad.diagonal() += lambda * A.diagonal().cwiseMax(1e-30);
            Params dp = Ad.ldlt().solve(g);
            if (!dp.allFinite()) break;
            Params trial = p + dp;
            trial(2) = std::abs(trial(2));
            double c_new = weighted_cost(trial, w);
            if (c_new <= cost) {
                double rel = std::abs(cost - c_new) / std::max(cost, 1e-300);
                bool small = (dp.array().abs() <= opt.tolerance * (p.array().abs() + bin)).all();
                p = trial;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (rel < opt.tolerance || small) converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) {
            converged = lambda > 1e6;  // stuck at a minimum
            break;
        }
        if (converged) {
            ++it;
            break;
        }
    }

    evaluate(x, p, f, &J);
    for (std::size_t i = 0; i < n; ++i) w(i) = 1.0 / std::max(f(i), 1.0);
    Eigen::Matrix<double, kParams, kParams> A = J.transpose() * w.asDiagonal() * J;
    Eigen::FullPivLU<Eigen::Matrix<double, kParams, kParams>> lu(A);
    out.iterations = it;
    out.chi2 = 0;
    for (std::size_t i = 0; i < n; ++i) out.chi2 += w(i) * (y[i] - f(i)) * (y[i] - f(i));

    if (p(0) > p(1)) {
        std::swap(p(0), p(1));
        std::swap(p(3), p(4));
    }
    out.omega_minus = p(0);
    out.omega_plus = p(1);
    out.fwhm = std::abs(p(2));
    out.amp_minus = p(3);
    out.amp_plus = p(4);
    out.baseline = p(5);
    out.splitting = p(1) - p(0);

    if (!lu.isInvertible()) {
        out.converged = false;
        return out;
    }
    Eigen::Matrix<double, kParams, kParams> cov = lu.inverse();
    double var_s = cov(0, 0) + cov(1, 1) - 2.0 * cov(0, 1);
    out.sigma_splitting = std::sqrt(std::max(var_s, 0.0));
    out.converged = converged && out.sigma_splitting > 0 && p.allFinite();
    return out;
}

}  // namespace qnd
