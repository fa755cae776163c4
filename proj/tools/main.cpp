#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "qnd/config.hpp"
#include "qnd/errors.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPhysics = 3;

struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::int64_t seed = -1;
    long long trials = -1;
    int threads = -1;
    std::string out = "out";
    bool svg = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "INI config file (defaults are compiled in)");
    sub->add_option("--set", c.sets, "Override a config value, section.key=value (repeatable)");
    sub->add_option("--seed", c.seed, "Master seed");
    sub->add_option("--trials", c.trials, "Monte Carlo trials (per scan point)");
    sub->add_option("--threads", c.threads, "Worker threads, 0 = hardware concurrency");
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_flag("--svg", c.svg, "Also write SVG plots");
}

qnd::Config build_config(const Common& c) {
    qnd::Config cfg;
    if (!c.config.empty()) cfg = qnd::Config::parse_file(c.config);
    for (const auto& s : c.sets) cfg.apply_override(s);
    if (c.seed >= 0) cfg.set("run.seed", std::to_string(c.seed));
    if (c.trials >= 0) cfg.set("run.trials", std::to_string(c.trials));
    if (c.threads >= 0) cfg.set("run.threads", std::to_string(c.threads));
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collective-spin QND measurement simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", QND_VERSION);

    Common common;
    std::string samples, n_list, psi_list, m_list, manifest;
    bool empirical = false;

    auto* geom = app.add_subcommand("calibrate-geometry", "Mode spacings -> z_R, w0, kappa");
    auto* coup = app.add_subcommand("calibrate-coupling", "Sampled positions -> N/N_tot and 2g");
    coup->add_option("--samples", samples, "Number of sampled atom positions");
    auto* proj = app.add_subcommand("projection-scan", "Var(J_z) versus atom number");
    proj->add_option("--n", n_list, "Comma-separated atom numbers");
    auto* sq = app.add_subcommand("squeeze", "Two-measurement conditional squeezing pipeline");
    sq->add_flag("--empirical-weight", empirical, "Use Cov/Var instead of the model weight");
    auto* ba = app.add_subcommand("backaction-scan", "Variance versus inserted rotation angle");
    ba->add_option("--psi", psi_list, "Comma-separated angles (e.g. 0,0.25pi,pi/2)");
    auto* cs = app.add_subcommand("contrast-scan", "Fringe contrast versus probe photon number");
    cs->add_option("--photons", m_list, "Comma-separated cumulative photon numbers");
    auto* rn = app.add_subcommand("rotation-noise", "Added noise of the composite rotation sequences");
    auto* sb = app.add_subcommand("solve-budget", "Noise-budget closure and efficiency calibration");
    auto* rp = app.add_subcommand("replay", "Re-run a manifest");
    rp->add_option("manifest", manifest, "Manifest file")->required();
    rp->add_option("--out", common.out, "Output directory");
    rp->add_option("--threads", common.threads, "Worker threads");

    for (auto* s : {geom, coup, proj, sq, ba, cs, rn, sb}) add_common(s, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        qndcli::Invocation inv;
        qnd::Config cfg;
        if (rp->parsed()) {
            cfg = qnd::Config::parse_file(manifest);
            qnd::Config rest;
            for (const auto& [k, v] : cfg.values()) {
                if (k.rfind("manifest.arg.", 0) == 0)
                    inv.args[k.substr(13)] = v;
                else if (k == "manifest.command")
                    inv.command = v;
                else if (k.rfind("manifest.", 0) != 0)
                    rest.set(k, v, cfg.line_of(k));
            }
            if (inv.command.empty()) throw qnd::ConfigError("manifest lacks manifest.command");
            if (common.threads >= 0) rest.set("run.threads", std::to_string(common.threads));
            cfg = rest;
        } else {
            cfg = build_config(common);
            for (auto* s : app.get_subcommands()) inv.command = s->get_name();
            if (!samples.empty()) inv.args["samples"] = samples;
            if (!n_list.empty()) cfg.set("scan.projection_n", n_list);
            if (!psi_list.empty()) cfg.set("scan.backaction_psi", psi_list);
            if (!m_list.empty()) cfg.set("scan.contrast_photons", m_list);
            if (empirical) cfg.set("budget.empirical_weight", "true");
            inv.svg = common.svg;
        }
        inv.config = qnd::RunConfig::from_config(cfg);
        inv.out_dir = common.out;
        qndcli::run(inv, std::cout);
    } catch (const qnd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const qnd::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPhysics;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitPhysics;
    }
    return 0;
}
