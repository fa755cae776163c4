#include <cmath>

#include "qnd/errors.hpp"
#include "qnd/parallel.hpp"
#include "qnd/sequence.hpp"

namespace qnd {

double added_noise_db(double rms, double n_ref) {
    double v = rms * rms * n_ref;
    return v > 0 ? 10.0 * std::log10(v) : -INFINITY;
}

double AddedNoise::db(double n_ref) const { return added_noise_db(total, n_ref); }

double AddedNoise::db(NoiseChannel c, double n_ref) const {
    auto it = rms.find(c);
    return added_noise_db(it == rms.end() ? 0.0 : it->second, n_ref);
}

AddedNoise analytic_added_noise(const PulseSequence& seq, const RotationNoiseModel& noise) {
    noise.validate();
    const double pi = kPi;
    const double sc = noise.eps_common_rms;
    const double sd = noise.eps_diff_rms;
    const double s = sd / std::sqrt(2.0);  // per-pulse differential rms
    const double sp = noise.phase_jitter_rms;
    const double as = noise.detuning_slow_rms / noise.rabi_frequency;
    const double af = noise.detuning_fast_rms / noise.rabi_frequency;
    const double p2 = noise.phase_offsets[2];
    const double dp = noise.phase_offsets[3] - noise.phase_offsets[2];

    AddedNoise a;
    for (auto c : kNoiseChannels) a.rms[c] = 0.0;
    auto& r = a.rms;
    const std::string& n = seq.name;
    if (n == "aux-2pi") {
        r[NoiseChannel::detuning_fast] = 2 * std::sqrt(2.0) * af;
    } else if (n == "aux-pi-pair-y") {
        r[NoiseChannel::detuning_slow] = 4 * as;
        r[NoiseChannel::detuning_fast] = 2 * std::sqrt(2.0) * af;
    } else if (n == "aux-pi-pair-x-opposed") {
        r[NoiseChannel::amplitude_diff] = pi * sd;
    } else if (n == "aux-pi-pair-x") {
        r[NoiseChannel::amplitude_common] = 2 * pi * sc;
        r[NoiseChannel::amplitude_diff] = pi * sd;
    } else if (n == "proj-a") {
        // (pi^2/2) e_a (e_b + e_c) + pi e_c (phi3 - phi2) for the three pulse errors
        r[NoiseChannel::amplitude_common] = std::sqrt(2 * std::pow(pi, 4) * std::pow(sc, 4) + pi * pi * dp * dp * sc * sc);
        r[NoiseChannel::amplitude_diff] = std::sqrt(std::pow(pi, 4) * std::pow(s, 4) / 2 + pi * pi * dp * dp * s * s);
        r[NoiseChannel::phase] = 2 * std::sqrt(2.0) * sp;
        r[NoiseChannel::detuning_slow] = 2 * as;
        r[NoiseChannel::detuning_fast] = 2 * std::sqrt(3.0) * af;
    } else if (n == "proj-b") {
        r[NoiseChannel::amplitude_common] = 0.5 * pi * p2 * p2 * sc;
        r[NoiseChannel::amplitude_diff] = pi * sd;
        r[NoiseChannel::detuning_slow] = std::sqrt(4 * p2 * p2 * as * as + 32 * std::pow(as, 4));
        r[NoiseChannel::detuning_fast] = std::sqrt(4 * p2 * p2 * af * af + 12 * std::pow(af, 4));
    } else {
        throw UnsupportedSequence("no added-noise formula for sequence '" + n + "'");
    }
    double sum = 0;
    for (auto& [c, v] : r) sum += v * v;
    a.total = std::sqrt(sum);
    return a;
}

double mc_latitude_difference_rms(const PulseSequence& seq, const RotationNoiseModel& noise, const McOptions& opt) {
    auto labels = seq.labels();
    if (labels.size() < 2) throw UnsupportedSequence("sequence '" + seq.name + "' needs two measurements");
    if (opt.trials < 2) throw InvalidParameter("mc_added_noise: need at least 2 trials");
    ProbeSettings probe;
    probe.ideal_readout = true;
    probe.decoherence = false;
    probe.backaction = false;
    // No fluctuation: projection noise is excluded.
    const CollectiveSpinState start = prepare_css(1e6, -Vec3::UnitZ(), 1.0);
    auto diffs = parallel_map(opt.trials, opt.threads, [&](std::size_t i) {
        Rng rng = trial_rng(opt.seed, i, "rotation-noise/" + seq.name);
        auto rec = run_sequence(seq, start, noise, probe, rng);
        return rec.at(labels[1]).latitude - rec.at(labels[0]).latitude;
    });
    double mean = 0;
    for (double d : diffs) mean += d;
    mean /= diffs.size();
    double var = 0;
    for (double d : diffs) var += (d - mean) * (d - mean);
    return std::sqrt(var / (diffs.size() - 1));
}

AddedNoise mc_added_noise(const PulseSequence& seq, const RotationNoiseModel& noise, const McOptions& opt) {
    noise.validate();
    AddedNoise a;
    for (auto c : kNoiseChannels) a.rms[c] = mc_latitude_difference_rms(seq, only_channel(noise, c), opt);
    a.total = mc_latitude_difference_rms(seq, noise, opt);
    return a;
}

double quadrature_leakage(const PulseSequence& seq, double eps_length) {
    auto run = [&](double dphi) {
        CollectiveSpinState s = prepare_css(1e6, -Vec3::UnitZ(), 1.0);
        int seen = 0;
        double lat1 = 0;
        for (const auto& step : seq.steps) {
            if (const auto* p = std::get_if<Pulse>(&step)) {
                Rotation r = p->rotation;
                r.psi *= 1.0 + eps_length;
                s = rotate(s, r);
            } else if (std::holds_alternative<Measure>(step)) {
                if (seen == 0) {
                    lat1 = s.latitude();
                    s.fluct += dphi * tangent_frame(s.mean_dir).east;
                } else {
                    return s.latitude() - lat1;
                }
                ++seen;
            }
        }
        throw UnsupportedSequence("sequence '" + seq.name + "' needs two measurements");
    };
    const double h = 1e-6;
    double d = (run(h) - run(-h)) / (2 * h);
    return d * d;
}

}  // namespace qnd
