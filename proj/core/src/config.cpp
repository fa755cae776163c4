#include "qnd/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "qnd/errors.hpp"
#include "qnd/rng.hpp"

namespace qnd {
namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // shortest representation that round-trips
    for (int prec = 1; prec <= 17; ++prec) {
        char t[64];
        std::snprintf(t, sizeof t, "%.*g", prec, v);
        if (std::strtod(t, nullptr) == v) return t;
    }
    return buf;
}

Config Config::parse(std::istream& in, const std::string& source) {
    Config cfg;
    cfg.source_ = source;
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        auto hash = s.find_first_of("#;");
        if (hash != std::string::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(source + ": unterminated section header", line);
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) throw ConfigError(source + ": empty section name", line);
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(source + ": expected 'key = value'", line);
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty()) throw ConfigError(source + ": empty key", line);
        if (section.empty()) throw ConfigError(source + ": key '" + key + "' outside any section", line);
        std::string full = section + "." + key;
        if (cfg.values_.count(full)) throw ConfigError(source + ": duplicate key '" + full + "'", line);
        cfg.set(full, value, line);
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in, path);
}

void Config::apply_override(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' must look like section.key=value");
    std::string key = trim(assignment.substr(0, eq));
    if (key.find('.') == std::string::npos) throw ConfigError("override key '" + key + "' needs a section prefix");
    set(key, trim(assignment.substr(eq + 1)), 0);
}

void Config::set(const std::string& key, const std::string& value, int line) {
    values_[key] = value;
    lines_[key] = line;
}

std::optional<std::string> Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

int Config::line_of(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(parse_angle(item));
    }
    return out;
}

namespace {

struct Field {
    const char* key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

double to_double(const std::string& v) {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (trim(v.substr(used)).size()) throw std::invalid_argument("trailing characters");
    return d;
}

bool to_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("expected a boolean");
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
}

#define QND_DOUBLE(KEY, EXPR) \
    Field { KEY, [](const RunConfig& c) { return format_double(c.EXPR); }, [](RunConfig& c, const std::string& v) { c.EXPR = to_double(v); } }

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        QND_DOUBLE("cavity.fsr", cavity.fsr),
        QND_DOUBLE("cavity.finesse", cavity.finesse),
        QND_DOUBLE("cavity.lambda_probe", cavity.lambda_probe),
        QND_DOUBLE("cavity.lambda_lattice", cavity.lambda_lattice),
        QND_DOUBLE("cavity.g0_peak", cavity.g0_peak),
        QND_DOUBLE("cavity.gamma_atom", cavity.gamma_atom),
        QND_DOUBLE("cavity.spacing_01", spacing_01),
        QND_DOUBLE("cavity.spacing_02", spacing_02),
        QND_DOUBLE("cavity.spacing_02_tolerance", spacing_02_tolerance),
        QND_DOUBLE("cavity.z_r", z_r_override),
        QND_DOUBLE("cloud.n_total", cloud.n_total),
        QND_DOUBLE("cloud.sigma_z", cloud.sigma_z),
        Field{"cloud.x_rms", [](const RunConfig& c) { return format_double(c.cloud.x_rms); },
              [](RunConfig& c, const std::string& v) { c.cloud.x_rms = c.cloud.y_rms = to_double(v); }},
        QND_DOUBLE("cloud.z_site_rms", cloud.z_site_rms),
        QND_DOUBLE("cloud.temp_radial", cloud.temp_radial),
        QND_DOUBLE("cloud.trap_depth", cloud.trap_depth),
        QND_DOUBLE("cloud.axial_offset", cloud.axial_offset),
        Field{"cloud.coupling_samples", [](const RunConfig& c) { return std::to_string(c.coupling_samples); },
              [](RunConfig& c, const std::string& v) { c.coupling_samples = static_cast<std::size_t>(to_double(v)); }},
        QND_DOUBLE("atoms.n_eff", n_eff),
        QND_DOUBLE("atoms.contrast_initial", contrast_initial),
        QND_DOUBLE("atoms.g_eff", g_eff),
        QND_DOUBLE("probe.span", sweep.span),
        Field{"probe.points", [](const RunConfig& c) { return std::to_string(c.sweep.points); },
              [](RunConfig& c, const std::string& v) { c.sweep.points = std::stoi(v); }},
        QND_DOUBLE("probe.duration", sweep.duration),
        QND_DOUBLE("probe.photons", sweep.photons),
        QND_DOUBLE("probe.detection_efficiency", sweep.detection_efficiency),
        QND_DOUBLE("probe.detuning_ac", sweep.detuning_ac),
        QND_DOUBLE("probe.scatter_fraction", impact.scatter_fraction),
        QND_DOUBLE("probe.k1", impact.k1),
        QND_DOUBLE("probe.k2", impact.k2),
        QND_DOUBLE("probe.raman_branch", impact.raman_branch),
        QND_DOUBLE("probe.q_total", impact.q_total),
        QND_DOUBLE("probe.technical_phi_var", impact.technical_phi_var),
        QND_DOUBLE("budget.var_diff_target", var_diff_target),
        QND_DOUBLE("budget.var_cond_target", var_cond_target),
        QND_DOUBLE("budget.readout_ratio", readout_ratio),
        QND_DOUBLE("budget.classical_ratio", classical_ratio),
        QND_DOUBLE("budget.technical_ratio", technical_ratio),
        Field{"budget.empirical_weight", [](const RunConfig& c) { return std::string(c.empirical_weight ? "true" : "false"); },
              [](RunConfig& c, const std::string& v) { c.empirical_weight = to_bool(v); }},
        QND_DOUBLE("budget.backaction_target_db", backaction_target_db),
        QND_DOUBLE("rotation.eps_common", rotation.eps_common_rms),
        QND_DOUBLE("rotation.eps_diff", rotation.eps_diff_rms),
        QND_DOUBLE("rotation.phase_jitter", rotation.phase_jitter_rms),
        QND_DOUBLE("rotation.detuning_slow", rotation.detuning_slow_rms),
        QND_DOUBLE("rotation.detuning_fast", rotation.detuning_fast_rms),
        QND_DOUBLE("rotation.phi0", rotation.phase_offsets[0]),
        QND_DOUBLE("rotation.phi1", rotation.phase_offsets[1]),
        QND_DOUBLE("rotation.phi2", rotation.phase_offsets[2]),
        QND_DOUBLE("rotation.phi3", rotation.phase_offsets[3]),
        QND_DOUBLE("rotation.rabi_frequency", rotation.rabi_frequency),
        QND_DOUBLE("rotation.n_ref", n_ref),
        Field{"rotation.in_experiments", [](const RunConfig& c) { return std::string(c.rotation_in_experiments ? "true" : "false"); },
              [](RunConfig& c, const std::string& v) { c.rotation_in_experiments = to_bool(v); }},
        Field{"scan.projection_n", [](const RunConfig& c) { return join(c.projection_n); },
              [](RunConfig& c, const std::string& v) { c.projection_n = parse_list(v); }},
        Field{"scan.projection_sequence", [](const RunConfig& c) { return c.projection_sequence; },
              [](RunConfig& c, const std::string& v) { c.projection_sequence = v; }},
        QND_DOUBLE("scan.projection_quadratic", projection_quadratic),
        QND_DOUBLE("scan.projection_floor", projection_floor),
        Field{"scan.backaction_psi", [](const RunConfig& c) { return join(c.backaction_psi); },
              [](RunConfig& c, const std::string& v) { c.backaction_psi = parse_list(v); }},
        Field{"scan.contrast_photons", [](const RunConfig& c) { return join(c.contrast_photons); },
              [](RunConfig& c, const std::string& v) { c.contrast_photons = parse_list(v); }},
        Field{"scan.contrast_phases", [](const RunConfig& c) { return std::to_string(c.contrast_phases); },
              [](RunConfig& c, const std::string& v) { c.contrast_phases = std::stoi(v); }},
        Field{"run.seed", [](const RunConfig& c) { return std::to_string(c.seed); },
              [](RunConfig& c, const std::string& v) { c.seed = std::stoull(v); }},
        Field{"run.trials", [](const RunConfig& c) { return std::to_string(c.trials); },
              [](RunConfig& c, const std::string& v) { c.trials = static_cast<std::size_t>(to_double(v)); }},
        Field{"run.threads", [](const RunConfig& c) { return std::to_string(c.threads); },
              [](RunConfig& c, const std::string& v) { c.threads = static_cast<unsigned>(std::stoul(v)); }},
    };
    return f;
}

#undef QND_DOUBLE

}  // namespace

RunConfig RunConfig::defaults() {
    RunConfig c;
    c.backaction_psi.clear();
    for (int i = 0; i <= 8; ++i) c.backaction_psi.push_back(kPi * i / 8);
    c.contrast_photons = {0, 1e5, 2e5, 3e5, 4e5, 5e5, 6e5};
    c.rotation.eps_common_rms = 3.0e-4;
    c.rotation.eps_diff_rms = 6.0e-5;
    c.rotation.phase_jitter_rms = 6.0e-5;
    c.rotation.detuning_slow_rms = 0.87;
    c.rotation.detuning_fast_rms = 0.84;
    c.rotation.phase_offsets = {0.0, 0.0, 0.01, 0.03};
    // Output of `qndsim solve-budget` with the values above (seed 20101).
    c.sweep.detection_efficiency = 0.5193;
    c.technical_ratio = 0.0808;
    c.classical_ratio = 0.0861;
    c.impact.q_total = 0.01954;
    c.finalize();
    return c;
}

void RunConfig::finalize() {
    double z_r = z_r_override;
    if (z_r <= 0) z_r = geometry_from_mode_spacings(cavity.fsr, spacing_01, cavity.lambda_probe).z_r;
    cavity = make_cavity(cavity.fsr, cavity.finesse, cavity.lambda_probe, cavity.lambda_lattice, cavity.g0_peak, z_r,
                         cavity.gamma_atom);
    impact.photons = sweep.photons;
}

void RunConfig::validate() const {
    cavity.validate();
    cloud.validate();
    sweep.validate();
    impact.validate();
    rotation.validate();
    if (!(n_eff > 0)) throw InvalidParameter("atoms.n_eff must be positive");
    if (!(contrast_initial > 0 && contrast_initial <= 1)) throw InvalidParameter("atoms.contrast_initial must lie in (0, 1]");
    if (!(g_eff > 0)) throw InvalidParameter("atoms.g_eff must be positive");
    if (readout_ratio < 0 || classical_ratio < 0 || technical_ratio < 0)
        throw InvalidParameter("budget ratios must be >= 0");
    if (trials < 2) throw InvalidParameter("run.trials must be >= 2");
    if (contrast_phases < 3) throw InvalidParameter("scan.contrast_phases must be >= 3");
}

std::string RunConfig::to_ini() const {
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields()) {
        std::string key = f.key;
        // Thread count never changes results; keeping it out makes hashes and
        // manifests identical across machines.
        if (key == "run.threads") continue;
        auto dot = key.find('.');
        std::string sec = key.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) out << '\n';
            out << '[' << sec << "]\n";
            section = sec;
        }
        out << key.substr(dot + 1) << " = " << f.get(*this) << '\n';
    }
    return out.str();
}

std::uint64_t RunConfig::hash() const { return fnv1a(to_ini()); }

RunConfig RunConfig::from_config(const Config& cfg) {
    RunConfig c = defaults();
    std::map<std::string, const Field*> index;
    for (const auto& f : fields()) index[f.key] = &f;
    for (const auto& [key, value] : cfg.values()) {
        auto it = index.find(key);
        if (it == index.end()) throw ConfigError("unknown key '" + key + "'", cfg.line_of(key));
        try {
            it->second->set(c, value);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("bad value '" + value + "' for '" + key + "': " + e.what(), cfg.line_of(key));
        }
    }
    try {
        c.finalize();
        c.validate();
    } catch (const InvalidParameter& e) {
        throw ConfigError(e.what());
    }
    return c;
}

}  // namespace qnd
