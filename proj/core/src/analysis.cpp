#include "qnd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qnd/errors.hpp"

namespace qnd {

double to_db(double ratio) {
    if (!(ratio > 0)) throw InvalidParameter("to_db: ratio must be positive");
    return 10.0 * std::log10(ratio);
}

double from_db(double db) { return std::pow(10.0, db / 10.0); }

double mean(std::span<const double> x) {
    if (x.empty()) throw InvalidParameter("mean of empty sample");
    double s = 0;
    for (double v : x) s += v;
    return s / x.size();
}

double covariance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidParameter("covariance needs two equal samples of size >= 2");
    double mx = mean(x), my = mean(y), s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s / (x.size() - 1);
}

double variance(std::span<const double> x) { return covariance(x, x); }

void NoiseBudget::validate() const {
    if (projection_var < 0 || readout_var < 0 || classical_var < 0)
        throw InvalidParameter("noise budget: variances must be >= 0");
}

double NoiseBudget::weight() const {
    double t = projection_var + readout_var + classical_var;
    return t > 0 ? projection_var / t : 0.0;
}

NoiseBudget NoiseBudget::from_ratios(double n_eff, double m_ratio, double c_ratio) {
    double p = n_eff / 4.0;
    NoiseBudget b{p, m_ratio * p, c_ratio * p};
    b.validate();
    return b;
}

BudgetSolution solve_budget(double var_diff_ratio, double var_cond_ratio) {
    if (!(var_diff_ratio > 0) || !(var_cond_ratio > 0) || var_cond_ratio > var_diff_ratio)
        throw InvalidParameter("solve_budget: need 0 < var_cond <= var_diff");
    double d = var_diff_ratio;
    double t = 0.5 * (d + std::sqrt(d * d + 4.0));
    double m = d - var_cond_ratio;
    double c = t - 1.0 - m;
    if (c < 0) throw InvalidParameter("solve_budget: targets imply negative classical noise");
    return {m, c, t};
}

double calibrate_measurement_noise(std::span<const std::pair<double, double>> splittings, double g_eff) {
    if (splittings.size() < 2) throw InvalidParameter("calibrate_measurement_noise: need at least 2 pairs");
    if (!(g_eff > 0)) throw InvalidParameter("calibrate_measurement_noise: g_eff must be positive");
    std::vector<double> d;
    d.reserve(splittings.size());
    double scale = 8.0 * g_eff * g_eff;
    for (auto [o1, o2] : splittings) d.push_back((o2 * o2 - o1 * o1) / scale);
    return variance(d);
}

double bayes_estimate(double jz1_measured, const NoiseBudget& budget, double prior_mean) {
    budget.validate();
    return prior_mean + budget.weight() * (jz1_measured - prior_mean);
}

double empirical_weight(std::span<const std::pair<double, double>> trials) {
    std::vector<double> a, b;
    for (auto [x, y] : trials) {
        a.push_back(x);
        b.push_back(y);
    }
    return covariance(a, b) / variance(a);
}

ConditionalVariance conditional_variance(std::span<const std::pair<double, double>> trials, const NoiseBudget& budget,
                                         std::optional<double> weight_override) {
    budget.validate();
    if (trials.size() < 2) throw InvalidParameter("conditional_variance: need at least 2 trials");
    if (!(budget.projection_var > 0)) throw InvalidParameter("conditional_variance: projection variance must be positive");
    ConditionalVariance out;
    out.weight = weight_override.value_or(budget.weight());
    std::vector<double> d;
    d.reserve(trials.size());
    for (auto [j1, j2] : trials) d.push_back(j2 - out.weight * j1);
    out.var_diff = variance(d);
    out.var_cond = out.var_diff - budget.readout_var;
    out.var_diff_ratio = out.var_diff / budget.projection_var;
    out.var_cond_ratio = out.var_cond / budget.projection_var;
    out.var_diff_db = to_db(out.var_diff_ratio);
    out.var_cond_db = out.var_cond_ratio > 0 ? to_db(out.var_cond_ratio) : -INFINITY;
    return out;
}

PolyFit polyfit(std::span<const double> x, std::span<const double> y, int degree, std::span<const double> weights) {
    const auto n = static_cast<Eigen::Index>(x.size());
    if (x.size() != y.size()) throw InvalidParameter("polyfit: x and y sizes differ");
    if (!weights.empty() && weights.size() != x.size()) throw InvalidParameter("polyfit: weight size mismatch");
    if (degree < 0 || n < degree + 1) throw InvalidParameter("polyfit: not enough points");
    std::set<double> distinct(x.begin(), x.end());
    if (static_cast<int>(distinct.size()) < degree + 1) throw InvalidParameter("polyfit: rank-deficient design");

    // Column scaling keeps the normal equations well conditioned for x ~ 1e5.
    double xs = 0;
    for (double v : x) xs = std::max(xs, std::abs(v));
    if (xs == 0) xs = 1;
    Eigen::MatrixXd A(n, degree + 1);
    Eigen::VectorXd b(n), sw(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double w = weights.empty() ? 1.0 : weights[i];
        if (!(w > 0)) throw InvalidParameter("polyfit: weights must be positive");
        sw(i) = std::sqrt(w);
        double u = x[i] / xs, p = 1.0;
        for (int k = 0; k <= degree; ++k, p *= u) A(i, k) = sw(i) * p;
        b(i) = sw(i) * y[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < degree + 1) throw InvalidParameter("polyfit: rank-deficient design");
    Eigen::VectorXd c = qr.solve(b);
    Eigen::VectorXd r = A * c - b;
    PolyFit out;
    int dof = static_cast<int>(n) - (degree + 1);
    out.residual_var = dof > 0 ? r.squaredNorm() / dof : 0.0;
    Eigen::MatrixXd cov = (A.transpose() * A).inverse();
    if (weights.empty()) cov *= out.residual_var;
    out.coeffs.resize(degree + 1);
    out.cov.resize(degree + 1, degree + 1);
    for (int k = 0; k <= degree; ++k) {
        out.coeffs(k) = c(k) / std::pow(xs, k);
        for (int l = 0; l <= degree; ++l) out.cov(k, l) = cov(k, l) / (std::pow(xs, k) * std::pow(xs, l));
    }
    return out;
}

ContrastFit contrast_fit(std::span<const std::pair<double, double>> points) {
    std::vector<double> m, c;
    for (auto [a, b] : points) {
        m.push_back(a);
        c.push_back(b);
    }
    if (std::set<double>(m.begin(), m.end()).size() < 4) throw InvalidParameter("contrast_fit: need >= 4 distinct M values");
    auto f = polyfit(m, c, 2);
    ContrastFit out;
    out.c_initial = f.coeffs(0);
    out.k1 = -f.coeffs(1);
    out.k2 = -f.coeffs(2);
    Eigen::Matrix3d sign = Eigen::Vector3d(1, -1, -1).asDiagonal();
    out.cov = sign * f.cov * sign;
    out.sigma_c_initial = std::sqrt(std::max(0.0, out.cov(0, 0)));
    out.sigma_k1 = std::sqrt(std::max(0.0, out.cov(1, 1)));
    out.sigma_k2 = std::sqrt(std::max(0.0, out.cov(2, 2)));
    return out;
}

SinusoidFit fit_sinusoid(std::span<const double> phase, std::span<const double> y) {
    const auto n = static_cast<Eigen::Index>(phase.size());
    if (phase.size() != y.size() || n < 3) throw InvalidParameter("fit_sinusoid: need >= 3 matched points");
    Eigen::MatrixXd A(n, 3);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, 0) = 1.0;
        A(i, 1) = std::cos(phase[i]);
        A(i, 2) = std::sin(phase[i]);
        b(i) = y[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < 3) throw InvalidParameter("fit_sinusoid: phases do not determine a sinusoid");
    Eigen::Vector3d c = qr.solve(b);
    return {c(0), std::hypot(c(1), c(2)), std::atan2(c(2), c(1))};
}

SqueezingMetrics squeezing_metrics(double c_initial, double c_final, double var_diff_ratio, double var_cond_ratio) {
    if (!(c_initial > 0 && c_initial <= 1 && c_final > 0 && c_final <= 1))
        throw InvalidParameter("squeezing_metrics: contrasts must lie in (0, 1]");
    if (!(var_diff_ratio > 0 && var_cond_ratio > 0)) throw InvalidParameter("squeezing_metrics: variances must be positive");
    double num = c_final * c_final / c_initial;
    return {to_db(num / var_diff_ratio), to_db(num / var_cond_ratio)};
}

double sampled_measurement_gain(double extract_fraction, double var_cond_ratio) {
    if (!(extract_fraction > 0 && extract_fraction <= 1))
        throw InvalidParameter("sampled_measurement_gain: fraction must lie in (0, 1]");
    if (!(var_cond_ratio > 0)) throw InvalidParameter("sampled_measurement_gain: variance ratio must be positive");
    return to_db(1.0 / (extract_fraction * var_cond_ratio));
}

}  // namespace qnd
