#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qnd/cavity.hpp"
#include "qnd/decoherence.hpp"
#include "qnd/sequence.hpp"
#include "qnd/spectroscopy.hpp"

namespace qnd {

// Flat "section.key = value" store read from an INI-style file.
class Config {
public:
    static Config parse(std::istream& in, const std::string& source = "<config>");
    static Config parse_file(const std::string& path);

    // "section.key=value" override from the command line.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value, int line = 0);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    int line_of(const std::string& key) const;
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    std::string source_;
};

struct RunConfig {
    // cavity
    CavityConfig cavity = default_cavity();
    double spacing_01 = 2257e6;
    double spacing_02 = 4515e6;
    double spacing_02_tolerance = 3e6;
    double z_r_override = 0.0;  // 0: derive z_r from spacing_01
    // ensemble
    AtomCloud cloud;
    std::size_t coupling_samples = 1000000;
    double n_eff = 7e5;
    double contrast_initial = 0.97;
    double g_eff = 253e3;
    // probe
    SweepConfig sweep;
    ProbeImpact impact;
    // budget
    double var_diff_target = 0.55;
    double var_cond_target = 0.324;
    double readout_ratio = 0.226;
    double classical_ratio = 0.0862;
    double technical_ratio = 0.0;  // c_t / P added to each J_z estimate
    bool empirical_weight = false;
    double backaction_target_db = 21.4;
    // rotations
    RotationNoiseModel rotation;
    bool rotation_in_experiments = false;
    double n_ref = 7e5;
    // scans
    std::vector<double> projection_n{1e4, 1e5, 7e5};
    std::string projection_sequence = "proj-b";
    double projection_quadratic = 0.0;  // injected a in a N^2, population^2
    double projection_floor = 0.0;      // injected readout variance, population^2
    std::vector<double> backaction_psi;
    std::vector<double> contrast_photons;
    int contrast_phases = 8;
    // run
    std::uint64_t seed = 20101;
    std::size_t trials = 10000;
    unsigned threads = 0;

    void validate() const;
    // Every field except run.threads as "section.key = value" lines in canonical order.
    std::string to_ini() const;
    std::uint64_t hash() const;

    static RunConfig defaults();
    // Rebuilds the derived cavity fields (kappa, z_r, w0) from the inputs.
    void finalize();
    // Unknown keys raise ConfigError with the offending line number.
    static RunConfig from_config(const Config& cfg);
};

std::vector<double> parse_list(const std::string& text);
std::string format_double(double v);

}  // namespace qnd
