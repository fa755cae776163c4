#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qnd {

double to_db(double ratio);
double from_db(double db);

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased
double covariance(std::span<const double> x, std::span<const double> y);

// Variances in population^2; P = N/4.
struct NoiseBudget {
    double projection_var = 0.0;
    double readout_var = 0.0;
    double classical_var = 0.0;

    void validate() const;
    double weight() const;  // P / (P + m + c)
    static NoiseBudget from_ratios(double n_eff, double m_ratio, double c_ratio);
};

// Readout and classical ratios (units of P) reproducing the two target
// variance ratios: T - 1/T = var_diff, m = var_diff - var_cond, c = T - 1 - m.
struct BudgetSolution {
    double readout_ratio;
    double classical_ratio;
    double total_ratio;
};
BudgetSolution solve_budget(double var_diff_ratio, double var_cond_ratio);

// Delta J_zm^2 with Delta J_zm = std(Om2^2 - Om1^2) / (8 g^2).
double calibrate_measurement_noise(std::span<const std::pair<double, double>> splittings, double g_eff);

double bayes_estimate(double jz1_measured, const NoiseBudget& budget, double prior_mean = 0.0);
// Cov(jz1, jz2) / Var(jz1)
double empirical_weight(std::span<const std::pair<double, double>> trials);

struct ConditionalVariance {
    double weight = 0.0;
    double var_diff = 0.0;
    double var_cond = 0.0;
    double var_diff_ratio = 0.0;
    double var_cond_ratio = 0.0;
    double var_diff_db = 0.0;
    double var_cond_db = 0.0;
};
ConditionalVariance conditional_variance(std::span<const std::pair<double, double>> trials, const NoiseBudget& budget,
                                         std::optional<double> weight_override = std::nullopt);

struct PolyFit {
    Eigen::VectorXd coeffs;  // ascending powers
    Eigen::MatrixXd cov;
    double residual_var = 0.0;
};
// Least squares; weights are inverse variances (empty = unweighted, covariance
// scaled by the residual variance).
PolyFit polyfit(std::span<const double> x, std::span<const double> y, int degree,
                std::span<const double> weights = {});

struct ContrastFit {
    double c_initial, k1, k2;
    double sigma_c_initial, sigma_k1, sigma_k2;
    Eigen::Matrix3d cov;
};
ContrastFit contrast_fit(std::span<const std::pair<double, double>> points);

// y = offset + a cos(x) + b sin(x)
struct SinusoidFit {
    double offset, amplitude, phase;
    double visibility() const { return offset != 0 ? amplitude / offset : 0.0; }
};
SinusoidFit fit_sinusoid(std::span<const double> phase, std::span<const double> y);

struct SqueezingMetrics {
    double zeta_direct_db;
    double zeta_inferred_db;
};
SqueezingMetrics squeezing_metrics(double c_initial, double c_final, double var_diff_ratio, double var_cond_ratio);

double sampled_measurement_gain(double extract_fraction, double var_cond_ratio);

struct SqueezingReport {
    double var_diff_db = 0.0;
    double var_cond_db = 0.0;
    double contrast_i = 0.0;
    double contrast_f = 0.0;
    double zeta_direct_db = 0.0;
    double zeta_inferred_db = 0.0;
    double weight = 0.0;
    double readout_ratio = 0.0;  // calibrated m / P
    std::size_t n_trials = 0;
    std::size_t failed_trials = 0;
};

}  // namespace qnd
