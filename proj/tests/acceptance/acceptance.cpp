// Acceptance checks: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "qnd/analysis.hpp"
#include "qnd/cavity.hpp"
#include "qnd/experiments.hpp"
#include "qnd/sequence.hpp"
#include "qnd/spectroscopy.hpp"

using namespace qnd;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream detail;

    // Records value against [target - tol, target + tol].
    void within(const std::string& what, double value, double target, double tol) {
        bool pass = std::isfinite(value) && std::abs(value - target) <= tol;
        ok = ok && pass;
        detail << (detail.tellp() > 0 ? "; " : "") << what << " = " << fmt(value) << " (want " << fmt(target)
               << " +/- " << fmt(tol) << (pass ? "" : ", MISS") << ")";
    }
    void require(const std::string& what, bool pass) {
        ok = ok && pass;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (pass ? " ok" : " MISS");
    }
    static std::string fmt(double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return buf;
    }
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<void(Check&)>& body) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail << (c.detail.tellp() > 0 ? "; " : "") << "exception: " << e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!c.ok) ++failures;
    std::printf("[%s] %2d %s: %s [%.1f s]\n", c.ok ? "PASS" : "FAIL", id, name.c_str(), c.detail.str().c_str(), secs);
    std::fflush(stdout);
}

RunConfig base() { return RunConfig::defaults(); }

RunOptions opts(const RunConfig& cfg, std::size_t trials) { return {cfg.seed, trials, 0}; }

double fit_sd(double photons, int trials, const std::string& stream, double* mean_sigma) {
    auto cav = default_cavity();
    SweepConfig s;
    s.photons = photons;
    s.detection_efficiency = 0.5;
    s.nominal_n_up = 3.5e5;
    std::vector<double> split, sig;
    for (int i = 0; i < trials; ++i) {
        Rng rng = trial_rng(20101, i, stream);
        auto f = fit_splitting(synthesize_sweep(3.5e5, 253e3, s, cav, rng));
        if (!f.converged) continue;
        split.push_back(f.splitting);
        sig.push_back(f.sigma_splitting);
    }
    if (mean_sigma) *mean_sigma = mean(sig);
    return std::sqrt(variance(split));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main() {
    criterion(1, "cavity geometry", [](Check& c) {
        auto r = run_geometry(base());
        c.within("z_R [cm]", r.geometry.z_r * 100, 1.97, 0.02);
        c.within("w0 [um]", r.geometry.w0 * 1e6, 70.6, 1.0);
    });

    criterion(2, "effective coupling", [](Check& c) {
        auto cfg = base();
        auto r = run_coupling(cfg, 1000000, cfg.seed);
        c.within("N/N_tot", r.params.n_eff_fraction, 0.664, 0.010);
        c.within("2g/2pi [kHz]", r.two_g_eff / 1e3, 506.0, 8.0);
        // Axial-only cloud: no radial extent, short compared with z_R.
        AtomCloud axial = cfg.cloud;
        axial.x_rms = axial.y_rms = 0.0;
        axial.z_site_rms = 0.0;
        axial.sigma_z = 0.1e-3;
        Rng rng = trial_rng(cfg.seed, 0, "axial-oracle");
        auto p = effective_params(sample_atom_positions(axial, cfg.cavity, 1000000, rng), cfg.cavity);
        c.within("axial N/N_tot - 2/3", p.n_eff_fraction - 2.0 / 3.0, 0.0, 1e-3);
        c.within("axial g/(sqrt(3/4) g0) - 1", p.g_eff / (std::sqrt(0.75) * cfg.cavity.g0_peak) - 1.0, 0.0, 1e-3);
    });

    criterion(3, "dressed linewidth", [](Check& c) {
        auto cfg = base();
        c.within("kappa/2pi [MHz]", cfg.cavity.kappa / 1e6, 7.828e3 / 710, 1e-9);
        c.within("FWHM [MHz]", run_geometry(cfg).dressed_fwhm / 1e6, 8.5, 0.3);
    });

    criterion(4, "projection noise", [](Check& c) {
        auto cfg = base();
        cfg.projection_n = {1e4, 1e5, 7e5};
        auto r = run_projection_scan(cfg, opts(cfg, 10000));
        c.within("linear ratio", r.linear_ratio, 1.0, 0.05);
        const double want = std::sqrt(2.0) * cfg.g_eff;
        for (const auto& p : r.points)
            c.within("rms(Om_up-Om_down)/(sqrt2 g) @" + Check::fmt(p.n), p.splitting_diff_rms / want, 1.0, 0.02);
    });

    criterion(5, "squeezing pipeline", [](Check& c) {
        auto cfg = base();
        c.within("m/P", cfg.readout_ratio, 0.226, 5e-4);
        c.within("c/P", cfg.classical_ratio, 0.086, 5e-4);
        auto r = run_squeeze(cfg, opts(cfg, 10000));
        c.within("var_diff [dB]", r.report.var_diff_db, -2.6, 0.2);
        c.within("var_cond [dB]", r.report.var_cond_db, -4.9, 0.3);
        c.within("zeta_direct [dB]", r.report.zeta_direct_db, 1.0, 0.3);
        c.within("zeta_inferred [dB]", r.report.zeta_inferred_db, 3.3, 0.3);
    });

    criterion(6, "back-action", [](Check& c) {
        auto cfg = base();
        std::vector<double> psi;
        for (int i = 0; i <= 8; ++i) psi.push_back(kPi * i / 8);
        auto r = run_backaction_scan(cfg, psi, opts(cfg, 1000));
        const auto& pts = r.points;
        const auto& floor = pts.front();
        const auto& top = pts[4];
        c.within("plateau [dB]", top.var_db, 21.4, 1.5);
        bool mono = true, oracle = true, bound = true;
        double worst = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i > 0 && i <= 4) mono = mono && pts[i].var_ratio >= pts[i - 1].var_ratio;
            if (i > 4) mono = mono && pts[i].var_ratio <= pts[i - 1].var_ratio;
            double cs = std::cos(pts[i].psi), sn = std::sin(pts[i].psi);
            // The oracle is built from the measured floor and ceiling, so their errors propagate.
            double se = std::sqrt(std::pow(pts[i].stderr_ratio, 2) + std::pow(cs * cs * floor.stderr_ratio, 2) +
                                  std::pow(sn * sn * top.stderr_ratio, 2));
            double z = std::abs(pts[i].var_ratio - pts[i].oracle_ratio) / se;
            worst = std::max(worst, z);
            oracle = oracle && z <= 3.0;
            bound = bound && pts[i].min_product_over_bound >= 1.0 - 1e-9;
        }
        c.require("monotone", mono);
        c.require("oracle within 3 sigma (worst " + Check::fmt(worst) + ")", oracle);
        c.require("uncertainty product >= bound", bound);
    });

    criterion(7, "decoherence", [](Check& c) {
        auto cfg = base();
        auto r = run_contrast_scan(cfg, opts(cfg, cfg.trials));
        c.within("k1", r.fit.k1, 5.5e-7, 0.7e-7);
        c.within("k2", r.fit.k2, 1.0e-12, 0.3e-12);
        c.within("M_sc/M", r.model_scatter_fraction, 0.41, 0.03);
        c.within("predicted k1", r.predicted_k1_model, 6.4e-7, 0.3e-7);
    });

    criterion(8, "rotation noise", [](Check& c) {
        auto cfg = base();
        McOptions mo;
        mo.trials = 10000;
        mo.seed = cfg.seed;
        mo.threads = 0;
        const auto& m = cfg.rotation;
        auto first_order = [&](NoiseChannel ch) {
            switch (ch) {
                case NoiseChannel::amplitude_common: return kPi * m.eps_common_rms;
                case NoiseChannel::amplitude_diff: return kPi * m.eps_diff_rms;
                case NoiseChannel::phase: return kPi * m.phase_jitter_rms;
                case NoiseChannel::detuning_slow: return kPi * m.detuning_slow_rms / m.rabi_frequency;
                case NoiseChannel::detuning_fast: return kPi * m.detuning_fast_rms / m.rabi_frequency;
            }
            return 0.0;
        };
        int matched = 0, total = 0;
        double worst = 0;
        std::string worst_at;
        for (const auto& name : added_noise_sequences()) {
            auto seq = catalog_sequence(name);
            auto a = analytic_added_noise(seq, m);
            auto mc = mc_added_noise(seq, m, mo);
            for (auto ch : kNoiseChannels) {
                ++total;
                double av = a.rms.at(ch), mv = mc.rms.at(ch);
                double dev = av > 0 ? std::abs(mv / av - 1.0) : mv / (0.1 * first_order(ch));
                if (dev <= (av > 0 ? 0.10 : 1.0)) ++matched;
                double scaled = av > 0 ? dev / 0.10 : dev;
                if (scaled > worst) worst = scaled, worst_at = name + "/" + channel_name(ch);
            }
            if (name == "proj-a" || name == "proj-b") {
                c.require(name + " total " + Check::fmt(mc.db(cfg.n_ref)) + " dB <= -14", mc.db(cfg.n_ref) <= -14.0);
            }
        }
        c.require("channels matched " + std::to_string(matched) + "/" + std::to_string(total) + " (worst " +
                      worst_at + " at " + Check::fmt(worst) + " of tolerance)",
                  matched == total);
    });

    criterion(9, "amplifier comparison", [](Check& c) {
        double g = sampled_measurement_gain(0.15, 0.324);
        c.within("G [dB]", g, 13.1, 0.05);
        c.within("G inside 13(1)", g, 13.0, 1.0);
    });

    criterion(10, "property suites", [](Check& c) {
        // Rotation composition and identity.
        double comp = 0, ident = 0;
        for (int i = 0; i < 200; ++i) {
            Rng rng = trial_rng(10, i, "prop/rot");
            Vec3 d(gauss(rng), gauss(rng), gauss(rng));
            auto s = prepare_css(7e5, d.normalized(), 0.97, rng);
            double phi = uniform(rng, -kPi, kPi), th = uniform(rng, -1.2, 1.2);
            double a = uniform(rng, -7, 7), b = uniform(rng, -7, 7);
            auto two = rotate(rotate(s, Rotation{a, phi, th}), Rotation{b, phi, th});
            auto one = rotate(s, Rotation{a + b, phi, th});
            comp = std::max({comp, (two.mean_dir - one.mean_dir).norm(), (two.fluct - one.fluct).norm(),
                             (two.cov - one.cov).norm() * 7e5});
            auto full = rotate(s, Rotation{2 * kPi, phi, th});
            ident = std::max({ident, (full.mean_dir - s.mean_dir).norm(), (full.fluct - s.fluct).norm()});
        }
        c.require("composition " + Check::fmt(comp) + " <= 1e-10", comp <= 1e-10);
        c.require("identity " + Check::fmt(ident) + " <= 1e-10", ident <= 1e-10);

        // Uncertainty product under repeated probing.
        bool mono = true;
        Rng rng = trial_rng(10, 0, "prop/probe");
        auto s = prepare_css(7e5, Vec3::UnitY(), 0.97, rng);
        double vt = s.var_theta(), vp = s.var_phi();
        for (int k = 0; k < 8; ++k) {
            s = condition_on_jz(s, 0.2 * 7e5 / 4);
            s = backaction_kick(s, 9.5e4, 0.05, rng);
            mono = mono && s.var_theta() <= vt * (1 + 1e-12) && s.var_phi() >= vp * (1 - 1e-12) &&
                   s.tangent_det() >= s.heisenberg_bound() * (1 - 1e-9);
            vt = s.var_theta();
            vp = s.var_phi();
        }
        c.require("probing monotone and bounded", mono);

        // Moment solver against the cos^2 closed form.
        std::vector<double> g;
        const double g0 = 303.5e3;
        for (int i = 0; i < 10000; ++i) g.push_back(g0 * std::cos(kPi * i / 10000));
        auto p = effective_params(std::span<const double>(g));
        double dev = std::max(std::abs(p.n_eff_fraction - 2.0 / 3.0), std::abs(p.g_eff / (std::sqrt(0.75) * g0) - 1));
        c.require("moment closed form " + Check::fmt(dev) + " <= 1e-10", dev <= 1e-10);

        // Fit error bars and photon scaling.
        double sig = 0;
        double sd = fit_sd(9.5e4, 2000, "prop/fit", &sig);
        c.within("fit sigma / scatter", sig / sd, 1.0, 0.15);
        double lo = fit_sd(5e4, 2000, "prop/lo", nullptr), hi = fit_sd(2e5, 2000, "prop/hi", nullptr);
        c.within("sd(M)/sd(4M) / 2", lo / hi / 2.0, 1.0, 0.10);

        // Byte-identical CLI reruns across thread counts.
#ifdef QND_CLI_PATH
        fs::path root = fs::temp_directory_path() / ("qnd_accept_" + std::to_string(::getpid()));
        bool same = true;
        for (const char* cmd : {"squeeze", "rotation-noise", "backaction-scan"}) {
            std::vector<fs::path> dirs;
            for (int threads : {1, 3, 1}) {
                fs::path out = root / (std::string(cmd) + "_" + std::to_string(dirs.size()));
                std::string line = std::string("\"") + QND_CLI_PATH + "\" " + cmd + " --trials 1500 --threads " +
                                   std::to_string(threads) + " --out \"" + out.string() + "\" --svg > /dev/null";
                if (std::system(line.c_str()) != 0) same = false;
                dirs.push_back(out);
            }
            for (const auto& e : fs::directory_iterator(dirs[0])) {
                auto name = e.path().filename();
                for (std::size_t k = 1; k < dirs.size(); ++k)
                    same = same && fs::exists(dirs[k] / name) && slurp(e.path()) == slurp(dirs[k] / name);
            }
        }
        fs::remove_all(root);
        c.require("byte-identical reruns (threads 1/3/1)", same);
#else
        c.require("CLI available for rerun check", false);
#endif
    });

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
