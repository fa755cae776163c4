#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "qnd/errors.hpp"
#include "qnd/experiments.hpp"
#include "qnd/output.hpp"

namespace qndcli {
namespace {

using qnd::csv_number;
using qnd::CsvTable;

std::string num(double v) { return csv_number(v); }

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

class Writer {
public:
    Writer(const Invocation& inv) : inv_(inv) {}

    void csv(const std::string& name, const CsvTable& t) {
        t.write(inv_.out_dir / name);
        outputs_.push_back(name);
    }
    void svg(const std::string& name, const std::string& text) {
        if (!want_svg()) return;
        qnd::write_text(inv_.out_dir / name, text);
        outputs_.push_back(name);
    }
    bool want_svg() const {
        auto it = inv_.args.find("svg");
        return inv_.svg || (it != inv_.args.end() && it->second == "1");
    }
    void manifest() {
        qnd::Manifest m;
        m.command = inv_.command;
        m.version = QND_VERSION;
        m.seed = inv_.config.seed;
        m.config_hash = inv_.config.hash();
        m.config_ini = inv_.config.to_ini();
        m.args = inv_.args;
        if (want_svg()) m.args["svg"] = "1";
        m.outputs = outputs_;
        qnd::write_text(inv_.out_dir / "manifest.ini", m.str());
    }

private:
    const Invocation& inv_;
    std::vector<std::string> outputs_;
};

void geometry(const Invocation& inv, Writer& w, std::ostream& log) {
    const auto& c = inv.config;
    auto r = qnd::run_geometry(c);
    CsvTable t({"fsr_hz", "spacing_01_hz", "length_m", "mirror_radius_m", "gouy_phase_rad", "z_r_m", "w0_m", "kappa_hz",
                "spacing_02_predicted_hz", "spacing_02_measured_hz", "spacing_02_consistent", "dressed_fwhm_hz"});
    t.row({num(c.cavity.fsr), num(c.spacing_01), num(r.geometry.length), num(r.geometry.mirror_radius),
           num(r.geometry.gouy_phase), num(r.geometry.z_r), num(r.geometry.w0), num(r.kappa),
           num(r.predicted_spacing_02), num(c.spacing_02), r.spacing_02_consistent ? "1" : "0", num(r.dressed_fwhm)});
    w.csv("geometry.csv", t);
    log << "length        " << fmt("%.4f cm", r.geometry.length * 100) << '\n'
        << "mirror radius " << fmt("%.3f cm", r.geometry.mirror_radius * 100) << '\n'
        << "z_R           " << fmt("%.4f cm", r.geometry.z_r * 100) << '\n'
        << "w0            " << fmt("%.2f um", r.geometry.w0 * 1e6) << '\n'
        << "kappa         " << fmt("%.3f MHz", r.kappa / 1e6) << '\n'
        << "spacing_02    " << fmt("%.1f MHz predicted", r.predicted_spacing_02 / 1e6) << ", "
        << fmt("%.1f MHz measured", c.spacing_02 / 1e6) << (r.spacing_02_consistent ? " (consistent)" : " (INCONSISTENT)")
        << '\n'
        << "dressed FWHM  " << fmt("%.3f MHz", r.dressed_fwhm / 1e6) << '\n';
}

void coupling(const Invocation& inv, Writer& w, std::ostream& log) {
    const auto& c = inv.config;
    std::size_t samples = c.coupling_samples;
    if (auto it = inv.args.find("samples"); it != inv.args.end()) samples = static_cast<std::size_t>(std::stod(it->second));
    auto r = qnd::run_coupling(c, samples, c.seed);
    CsvTable t({"samples", "n_eff_fraction", "fraction_rel_err", "g_eff_hz", "two_g_eff_hz", "g_rel_err", "n_eff",
                "wells_68", "x_rms_from_temperature_m"});
    t.row({std::to_string(samples), num(r.params.n_eff_fraction), num(r.params.fraction_error), num(r.params.g_eff),
           num(r.two_g_eff), num(r.params.mc_error), num(r.n_eff), num(r.wells_68), num(r.x_rms_from_temperature)});
    w.csv("coupling.csv", t);
    log << "N/N_tot = " << fmt("%.4f", r.params.n_eff_fraction) << " +/- "
        << fmt("%.4f", r.params.fraction_error * r.params.n_eff_fraction) << '\n'
        << "2g      = 2pi x " << fmt("%.1f kHz", r.two_g_eff / 1e3) << " +/- "
        << fmt("%.1f kHz", r.two_g_eff * r.params.mc_error / 1e3) << '\n';
}

void projection(const Invocation& inv, Writer& w, std::ostream& log) {
    auto r = qnd::run_projection_scan(inv.config, qnd::RunOptions::from(inv.config));
    CsvTable t({"n", "var_jz", "var_ratio", "splitting_diff_rms_hz"});
    std::vector<double> xs, ys, fit;
    for (auto& p : r.points) {
        t.row({num(p.n), num(p.var_jz), num(p.var_ratio), num(p.splitting_diff_rms)});
        xs.push_back(p.n);
        ys.push_back(p.var_jz);
        fit.push_back(r.fit.coeffs(0) + r.fit.coeffs(1) * p.n + r.fit.coeffs(2) * p.n * p.n);
    }
    w.csv("projection.csv", t);
    CsvTable f({"c0", "c1", "c2", "sigma_c0", "sigma_c1", "sigma_c2", "linear_ratio"});
    f.row({num(r.fit.coeffs(0)), num(r.fit.coeffs(1)), num(r.fit.coeffs(2)), num(std::sqrt(r.fit.cov(0, 0))),
           num(std::sqrt(r.fit.cov(1, 1))), num(std::sqrt(r.fit.cov(2, 2))), num(r.linear_ratio)});
    w.csv("projection_fit.csv", f);
    w.svg("projection.svg", qnd::svg_plot("Projection noise", "N", "Var(J_z)",
                                          {{"simulated", xs, ys, true}, {"quadratic fit", xs, fit, false}}));
    for (auto& p : r.points)
        log << "N = " << fmt("%.3g", p.n) << "  Var/(N/4) = " << fmt("%.4f", p.var_ratio)
            << "  rms(Om_up - Om_down) = " << fmt("%.1f kHz", p.splitting_diff_rms / 1e3) << '\n';
    log << "fitted linear ratio = " << fmt("%.4f", r.linear_ratio) << '\n';
}

void squeeze(const Invocation& inv, Writer& w, std::ostream& log) {
    auto r = qnd::run_squeeze(inv.config, qnd::RunOptions::from(inv.config));
    CsvTable t({"trial", "jz1", "jz2", "jz_true", "down1", "down2", "split_down1_hz", "split_down2_hz", "contrast_f",
                "failed"});
    for (std::size_t i = 0; i < r.trials.size(); ++i) {
        const auto& x = r.trials[i];
        t.row({std::to_string(i), num(x.jz1), num(x.jz2), num(x.jz_true), num(x.down1), num(x.down2), num(x.split_down1),
               num(x.split_down2), num(x.contrast_f), x.failed ? "1" : "0"});
    }
    w.csv("squeeze_trials.csv", t);
    const auto& s = r.report;
    CsvTable rep({"n_trials", "failed_trials", "weight", "empirical_weight", "readout_ratio", "var_diff_db",
                  "var_cond_db", "contrast_i", "contrast_f", "zeta_direct_db", "zeta_inferred_db"});
    rep.row({std::to_string(s.n_trials), std::to_string(s.failed_trials), num(s.weight), num(r.empirical_weight),
             num(s.readout_ratio), num(s.var_diff_db), num(s.var_cond_db), num(s.contrast_i), num(s.contrast_f),
             num(s.zeta_direct_db), num(s.zeta_inferred_db)});
    w.csv("squeeze_report.csv", rep);
    log << "trials " << s.n_trials << " (" << s.failed_trials << " failed fits)\n"
        << "weight " << fmt("%.4f", s.weight) << " (empirical " << fmt("%.4f", r.empirical_weight) << ")\n"
        << "calibrated readout m/P = " << fmt("%.4f", s.readout_ratio) << '\n'
        << "Var(Jz2 - w Jz1)/(N/4)  = " << fmt("%+.2f dB", s.var_diff_db) << '\n'
        << "conditional variance    = " << fmt("%+.2f dB", s.var_cond_db) << '\n'
        << "C_i = " << fmt("%.3f", s.contrast_i) << ", C_f = " << fmt("%.3f", s.contrast_f) << '\n'
        << "zeta direct   = " << fmt("%.2f dB", s.zeta_direct_db) << '\n'
        << "zeta inferred = " << fmt("%.2f dB", s.zeta_inferred_db) << '\n';
}

void backaction(const Invocation& inv, Writer& w, std::ostream& log) {
    const auto& c = inv.config;
    auto r = qnd::run_backaction_scan(c, c.backaction_psi, qnd::RunOptions::from(c));
    CsvTable t({"psi_rad", "var_ratio", "var_db", "stderr_ratio", "oracle_ratio", "min_uncertainty_db", "degraded_db",
                "min_product_over_bound"});
    std::vector<double> xs, ys, dash, solid;
    for (auto& p : r.points) {
        t.row({num(p.psi), num(p.var_ratio), num(p.var_db), num(p.stderr_ratio), num(p.oracle_ratio),
               num(p.min_uncertainty_db), num(p.degraded_db), num(p.min_product_over_bound)});
        xs.push_back(p.psi);
        ys.push_back(p.var_db);
        dash.push_back(p.min_uncertainty_db);
        solid.push_back(p.degraded_db);
        log << "psi = " << fmt("%.4f", p.psi) << "  " << fmt("%+.2f dB", p.var_db) << "  oracle "
            << fmt("%+.2f dB", qnd::to_db(p.oracle_ratio)) << '\n';
    }
    w.csv("backaction.csv", t);
    w.svg("backaction.svg", qnd::svg_plot("Back-action", "psi (rad)", "variance / projection noise (dB)",
                                          {{"simulated", xs, ys, true},
                                           {"minimum uncertainty", xs, dash, false},
                                           {"efficiency limited", xs, solid, false}}));
}

void contrast(const Invocation& inv, Writer& w, std::ostream& log) {
    auto r = qnd::run_contrast_scan(inv.config, qnd::RunOptions::from(inv.config));
    CsvTable t({"photons", "contrast", "contrast_true"});
    std::vector<double> xs, ys, fit;
    for (auto& p : r.points) {
        t.row({num(p.photons), num(p.contrast), num(p.contrast_true)});
        xs.push_back(p.photons);
        ys.push_back(p.contrast);
        fit.push_back(r.fit.c_initial - r.fit.k1 * p.photons - r.fit.k2 * p.photons * p.photons);
    }
    w.csv("contrast.csv", t);
    CsvTable f({"c_initial", "k1", "k2", "sigma_c_initial", "sigma_k1", "sigma_k2", "model_scatter_fraction",
                "predicted_k1_model", "predicted_k1_configured"});
    f.row({num(r.fit.c_initial), num(r.fit.k1), num(r.fit.k2), num(r.fit.sigma_c_initial), num(r.fit.sigma_k1),
           num(r.fit.sigma_k2), num(r.model_scatter_fraction), num(r.predicted_k1_model), num(r.predicted_k1_configured)});
    w.csv("contrast_fit.csv", f);
    w.svg("contrast.svg", qnd::svg_plot("Contrast versus probe photons", "M", "contrast",
                                        {{"fringe fit", xs, ys, true}, {"polynomial", xs, fit, false}}));
    log << "C_i = " << fmt("%.4f", r.fit.c_initial) << ", k1 = " << fmt("%.3e", r.fit.k1) << ", k2 = "
        << fmt("%.3e", r.fit.k2) << '\n'
        << "scattered fraction (linear response) = " << fmt("%.4f", r.model_scatter_fraction) << '\n'
        << "predicted k1: " << fmt("%.3e", r.predicted_k1_model) << " (model fraction), "
        << fmt("%.3e", r.predicted_k1_configured) << " (configured fraction)\n";
}

void rotation(const Invocation& inv, Writer& w, std::ostream& log) {
    auto rows = qnd::run_rotation_noise(inv.config, qnd::RunOptions::from(inv.config));
    CsvTable t({"sequence", "channel", "analytic_rad", "mc_rad", "analytic_db", "mc_db"});
    for (auto& r : rows) {
        t.row({r.sequence, r.channel, num(r.analytic), num(r.mc), num(r.analytic_db), num(r.mc_db)});
        if (r.channel == "total")
            log << r.sequence << ": analytic " << fmt("%+.1f dB", r.analytic_db) << ", Monte Carlo "
                << fmt("%+.1f dB", r.mc_db) << '\n';
    }
    w.csv("rotation_noise.csv", t);
}

void budget(const Invocation& inv, Writer& w, std::ostream& log) {
    auto b = qnd::run_solve_budget(inv.config, qnd::RunOptions::from(inv.config));
    CsvTable t({"readout_ratio", "classical_ratio", "total_ratio", "weight", "raman_var", "sigma_n2", "fit_constant",
                "detection_efficiency", "technical_ratio", "q_total", "backaction_a", "backaction_b"});
    t.row({num(b.solution.readout_ratio), num(b.solution.classical_ratio), num(b.solution.total_ratio), num(b.weight),
           num(b.raman_var), num(b.sigma_n2), num(b.fit_constant), num(b.detection_efficiency), num(b.technical_ratio),
           num(b.q_total), num(b.backaction_a), num(b.backaction_b)});
    w.csv("budget.csv", t);
    log << "m/P = " << fmt("%.4f", b.solution.readout_ratio) << ", c/P = " << fmt("%.4f", b.solution.classical_ratio)
        << ", T = " << fmt("%.4f", b.solution.total_ratio) << '\n'
        << "[probe] detection_efficiency = " << fmt("%.4f", b.detection_efficiency) << '\n'
        << "[probe] q_total = " << fmt("%.5f", b.q_total) << '\n'
        << "[budget] technical_ratio = " << fmt("%.4f", b.technical_ratio) << '\n';
}

}  // namespace

void run(const Invocation& inv, std::ostream& log) {
    Writer w(inv);
    const auto& c = inv.command;
    if (c == "calibrate-geometry")
        geometry(inv, w, log);
    else if (c == "calibrate-coupling")
        coupling(inv, w, log);
    else if (c == "projection-scan")
        projection(inv, w, log);
    else if (c == "squeeze")
        squeeze(inv, w, log);
    else if (c == "backaction-scan")
        backaction(inv, w, log);
    else if (c == "contrast-scan")
        contrast(inv, w, log);
    else if (c == "rotation-noise")
        rotation(inv, w, log);
    else if (c == "solve-budget")
        budget(inv, w, log);
    else
        throw qnd::ConfigError("unknown command '" + c + "'");
    w.manifest();
}

}  // namespace qndcli
