#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "qnd/cavity.hpp"
#include "qnd/decoherence.hpp"
#include "qnd/rng.hpp"
#include "qnd/spectroscopy.hpp"
#include "qnd/spin.hpp"

namespace qnd {

struct RotationNoiseModel {
    double eps_common_rms = 0.0;     // common amplitude error, drawn once per trial
    double eps_diff_rms = 0.0;       // rms of the pulse-to-pulse difference
    double phase_jitter_rms = 0.0;   // rad, per pulse segment
    double detuning_slow_rms = 0.0;  // Hz, per trial
    double detuning_fast_rms = 0.0;  // Hz, per pulse segment
    std::array<double, 4> phase_offsets{};  // static phase errors indexed by pulse slot
    double rabi_frequency = 25e3;    // Hz; sets the axis tilt delta/rabi

    void validate() const;
    bool any() const;
};

enum class NoiseChannel { amplitude_common, amplitude_diff, phase, detuning_slow, detuning_fast };
inline constexpr std::array<NoiseChannel, 5> kNoiseChannels{
    NoiseChannel::amplitude_common, NoiseChannel::amplitude_diff, NoiseChannel::phase,
    NoiseChannel::detuning_slow, NoiseChannel::detuning_fast};
const char* channel_name(NoiseChannel c);

// Copy of the model with every stochastic channel except c switched off.
// Static phase offsets are kept.
RotationNoiseModel only_channel(const RotationNoiseModel& m, NoiseChannel c);

struct Pulse {
    Rotation rotation;
    int phase_slot = -1;  // index into phase_offsets, -1 for none
    bool amplitude_noise = true;
};
struct Measure {
    std::string label;
};
struct Wait {
    double duration = 0.0;  // s of free precession
};
using SequenceStep = std::variant<Pulse, Measure, Wait>;

struct PulseSequence {
    std::string name;
    std::vector<SequenceStep> steps;

    std::vector<std::string> labels() const;
    void validate() const;
};

// Text form, one step per line: "pulse psi=0.5pi phi=0 theta=0 slot=2",
// "measure label=N1", "wait duration=1e-3". Blank lines and '#' comments skipped.
PulseSequence parse_sequence(const std::string& name, const std::vector<std::string>& lines);
std::vector<std::string> format_sequence(const PulseSequence& seq);
double parse_angle(const std::string& text);

PulseSequence squeeze_sequence();
PulseSequence backaction_sequence(double psi);
PulseSequence fringe_sequence(double phase);
PulseSequence calibration_sequence();
// Named catalog: the six added-noise sequences plus the protocol sequences.
std::map<std::string, PulseSequence> standard_sequences();
PulseSequence catalog_sequence(const std::string& name);

struct ProbeSettings {
    CavityConfig cavity = default_cavity();
    double g_eff = 253e3;
    SweepConfig sweep;
    ProbeImpact impact;
    bool ideal_readout = false;  // report the true n_up instead of fitting a sweep
    bool decoherence = true;     // contrast loss and Raman loss
    bool backaction = true;
    double readout_var_hint = 0.0;  // extra population^2 used when conditioning the covariance
};

struct MeasurementRecord {
    std::string label;
    double n_up_true = 0.0;
    double jz_true = 0.0;
    double latitude = 0.0;
    double n_eff = 0.0;
    double contrast = 0.0;
    double splitting = 0.0;
    double sigma_splitting = 0.0;
    double n_up = 0.0;
    double sigma_n = 0.0;
    bool converged = true;
};

struct TrialRecord {
    std::vector<MeasurementRecord> measurements;
    double eps_common = 0.0;
    double detuning_slow = 0.0;
    bool fit_failed = false;
    CollectiveSpinState final_state;

    const MeasurementRecord& at(const std::string& label) const;
};

TrialRecord run_sequence(const PulseSequence& seq, const CollectiveSpinState& initial, const RotationNoiseModel& noise,
                         const ProbeSettings& probe, Rng& rng);

struct AddedNoise {
    std::map<NoiseChannel, double> rms;  // rad of latitude difference
    double total = 0.0;

    double db(double n_ref) const;                 // total
    double db(NoiseChannel c, double n_ref) const;
};

double added_noise_db(double rms, double n_ref);

// Leading-order formulas for the six added-noise catalog entries.
AddedNoise analytic_added_noise(const PulseSequence& seq, const RotationNoiseModel& noise);

struct McOptions {
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

// Std of the latitude difference between the first two measurements, with
// zero projection noise and ideal readout. Runs each channel alone plus all
// channels together.
AddedNoise mc_added_noise(const PulseSequence& seq, const RotationNoiseModel& noise, const McOptions& opt);
double mc_latitude_difference_rms(const PulseSequence& seq, const RotationNoiseModel& noise, const McOptions& opt);

// Sensitivity of the latitude difference to an azimuthal displacement present
// at the first measurement, with every pulse length scaled by (1 + eps).
// Returns d(dlat)/d(dphi) squared.
double quadrature_leakage(const PulseSequence& seq, double eps_length);

}  // namespace qnd
