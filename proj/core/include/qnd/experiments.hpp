#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qnd/analysis.hpp"
#include "qnd/cavity.hpp"
#include "qnd/config.hpp"
#include "qnd/sequence.hpp"

namespace qnd {

struct RunOptions {
    std::uint64_t seed = 1;
    std::size_t trials = 1000;
    unsigned threads = 0;

    static RunOptions from(const RunConfig& cfg) { return {cfg.seed, cfg.trials, cfg.threads}; }
};

ProbeSettings probe_settings(const RunConfig& cfg);
RotationNoiseModel experiment_rotation_noise(const RunConfig& cfg);

// --- geometry / coupling
struct GeometryReport {
    ModeGeometry geometry;
    double kappa;
    double predicted_spacing_02;
    bool spacing_02_consistent;
    double dressed_fwhm;
};
GeometryReport run_geometry(const RunConfig& cfg);

struct CouplingReport {
    EffectiveParams params;
    double two_g_eff;
    double n_eff;  // n_total * fraction
    double wells_68;  // lattice wells spanned by the central 68 % of atoms
    double x_rms_from_temperature;
};
CouplingReport run_coupling(const RunConfig& cfg, std::size_t samples, std::uint64_t seed);

// --- projection noise
struct ProjectionPoint {
    double n = 0;
    double var_jz = 0;
    double var_ratio = 0;       // var / (n/4)
    double splitting_diff_rms = 0;  // rms of (Om_up - Om_down), Hz
};
struct ProjectionResult {
    std::vector<ProjectionPoint> points;
    PolyFit fit;
    double linear_ratio = 0;  // c1 / (1/4)
};
ProjectionResult run_projection_scan(const RunConfig& cfg, const RunOptions& opt);

// --- squeezing
struct SqueezeTrial {
    double jz1 = 0, jz2 = 0;
    double jz_true = 0;
    double down1 = 0, down2 = 0;
    double split_down1 = 0, split_down2 = 0;
    double contrast_f = 0;
    bool failed = false;
};
struct SqueezeResult {
    SqueezingReport report;
    NoiseBudget budget;
    double empirical_weight = 0;
    double calibrated_readout_ratio = 0;
    ConditionalVariance cv;
    std::vector<SqueezeTrial> trials;
};
SqueezeResult run_squeeze(const RunConfig& cfg, const RunOptions& opt);

// --- back-action
struct BackactionPoint {
    double psi = 0;
    double var_ratio = 0;
    double var_db = 0;
    double stderr_ratio = 0;
    double oracle_ratio = 0;         // cos^2 floor + sin^2 ceiling
    double min_uncertainty_db = 0;   // q_total = 1 reference
    double degraded_db = 0;          // configured q_total reference
    double min_product_over_bound = 0;
};
struct BackactionResult {
    std::vector<BackactionPoint> points;
    double floor_ratio = 0;
    double ceiling_ratio = 0;
};
BackactionResult run_backaction_scan(const RunConfig& cfg, const std::vector<double>& psi, const RunOptions& opt);
// Var ratio at a single psi; used for calibration.
BackactionPoint backaction_point(const RunConfig& cfg, double psi, const RunOptions& opt);

// --- contrast
struct ContrastPoint {
    double photons = 0;   // cumulative probe photons before the final readout
    double contrast = 0;  // fitted fringe visibility
    double contrast_true = 0;
};
struct ContrastResult {
    std::vector<ContrastPoint> points;
    ContrastFit fit;
    double model_scatter_fraction = 0;
    double predicted_k1_model = 0;
    double predicted_k1_configured = 0;
};
ContrastResult run_contrast_scan(const RunConfig& cfg, const RunOptions& opt);

// --- rotation noise
struct RotationNoiseRow {
    std::string sequence;
    std::string channel;  // channel name or "total"
    double analytic = 0;
    double mc = 0;
    double analytic_db = 0;
    double mc_db = 0;
};
std::vector<RotationNoiseRow> run_rotation_noise(const RunConfig& cfg, const RunOptions& opt);
const std::vector<std::string>& added_noise_sequences();

// --- budget closure
struct BudgetCalibration {
    BudgetSolution solution;
    double weight = 0;
    double raman_var = 0;        // v_k per splitting measurement
    double sigma_n2 = 0;         // per-splitting readout variance required
    double fit_constant = 0;     // sigma_n^2 * q measured by Monte Carlo
    double detection_efficiency = 0;
    double technical_ratio = 0;
    double q_total = 0;
    double backaction_a = 0, backaction_b = 0;  // ratio = a + b / q_total
};
BudgetCalibration run_solve_budget(const RunConfig& cfg, const RunOptions& opt, bool include_backaction = true);

}  // namespace qnd
