#include "qnd/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <cctype>
#include <sstream>

#include "qnd/errors.hpp"

namespace qnd {

void RotationNoiseModel::validate() const {
    if (eps_common_rms < 0 || eps_diff_rms < 0 || phase_jitter_rms < 0 || detuning_slow_rms < 0 ||
        detuning_fast_rms < 0)
        throw InvalidParameter("rotation noise: rms values must be >= 0");
    if (!(rabi_frequency > 0)) throw InvalidParameter("rotation noise: rabi frequency must be positive");
}

bool RotationNoiseModel::any() const {
    return eps_common_rms > 0 || eps_diff_rms > 0 || phase_jitter_rms > 0 || detuning_slow_rms > 0 ||
           detuning_fast_rms > 0 || std::any_of(phase_offsets.begin(), phase_offsets.end(), [](double p) { return p != 0; });
}

const char* channel_name(NoiseChannel c) {
    switch (c) {
        case NoiseChannel::amplitude_common: return "amplitude_common";
        case NoiseChannel::amplitude_diff: return "amplitude_diff";
        case NoiseChannel::phase: return "phase";
        case NoiseChannel::detuning_slow: return "detuning_slow";
        case NoiseChannel::detuning_fast: return "detuning_fast";
    }
    return "?";
}

RotationNoiseModel only_channel(const RotationNoiseModel& m, NoiseChannel c) {
    RotationNoiseModel out;
    out.phase_offsets = m.phase_offsets;
    out.rabi_frequency = m.rabi_frequency;
    switch (c) {
        case NoiseChannel::amplitude_common: out.eps_common_rms = m.eps_common_rms; break;
        case NoiseChannel::amplitude_diff: out.eps_diff_rms = m.eps_diff_rms; break;
        case NoiseChannel::phase: out.phase_jitter_rms = m.phase_jitter_rms; break;
        case NoiseChannel::detuning_slow: out.detuning_slow_rms = m.detuning_slow_rms; break;
        case NoiseChannel::detuning_fast: out.detuning_fast_rms = m.detuning_fast_rms; break;
    }
    return out;
}

std::vector<std::string> PulseSequence::labels() const {
    std::vector<std::string> out;
    for (const auto& s : steps)
        if (const auto* m = std::get_if<Measure>(&s)) out.push_back(m->label);
    return out;
}

void PulseSequence::validate() const {
    std::set<std::string> seen;
    for (const auto& l : labels()) {
        if (l.empty()) throw InvalidParameter("sequence '" + name + "': empty measurement label");
        if (!seen.insert(l).second) throw InvalidParameter("sequence '" + name + "': duplicate label " + l);
    }
    for (const auto& s : steps) {
        if (const auto* p = std::get_if<Pulse>(&s); p && (p->phase_slot < -1 || p->phase_slot > 3))
            throw InvalidParameter("sequence '" + name + "': phase slot must be -1..3");
        if (const auto* w = std::get_if<Wait>(&s); w && w->duration < 0)
            throw InvalidParameter("sequence '" + name + "': negative wait");
    }
}

double parse_angle(const std::string& text) {
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw InvalidParameter("empty angle");
    try {
        auto pos = t.find("pi");
        if (pos == std::string::npos) {
            std::size_t used = 0;
            double v = std::stod(t, &used);
            if (used != t.size()) throw InvalidParameter("bad angle '" + text + "'");
            return v;
        }
        std::string pre = t.substr(0, pos), post = t.substr(pos + 2);
        if (!pre.empty() && pre.back() == '*') pre.pop_back();
        double mult = pre.empty() ? 1.0 : pre == "-" ? -1.0 : pre == "+" ? 1.0 : std::stod(pre);
        double div = 1.0;
        if (!post.empty()) {
            if (post[0] != '/') throw InvalidParameter("bad angle '" + text + "'");
            div = std::stod(post.substr(1));
        }
        return mult * kPi / div;
    } catch (const std::logic_error&) {
        throw InvalidParameter("bad angle '" + text + "'");
    }
}

PulseSequence parse_sequence(const std::string& name, const std::vector<std::string>& lines) {
    PulseSequence seq{name, {}};
    for (const auto& raw : lines) {
        std::string line = raw.substr(0, raw.find('#'));
        std::istringstream in(line);
        std::string kind;
        if (!(in >> kind)) continue;
        std::map<std::string, std::string> kv;
        std::string tok;
        while (in >> tok) {
            auto eq = tok.find('=');
            if (eq == std::string::npos) throw InvalidParameter("sequence step token '" + tok + "' lacks '='");
            kv[tok.substr(0, eq)] = tok.substr(eq + 1);
        }
        auto take = [&](const std::string& k, const std::string& def) {
            auto it = kv.find(k);
            std::string v = it == kv.end() ? def : it->second;
            if (it != kv.end()) kv.erase(it);
            return v;
        };
        if (kind == "pulse") {
            Pulse p;
            p.rotation.psi = parse_angle(take("psi", ""));
            p.rotation.phi_axis = parse_angle(take("phi", "0"));
            p.rotation.theta_axis = parse_angle(take("theta", "0"));
            p.phase_slot = std::stoi(take("slot", "-1"));
            p.amplitude_noise = take("amplitude_noise", "1") != "0";
            seq.steps.emplace_back(p);
        } else if (kind == "measure") {
            seq.steps.emplace_back(Measure{take("label", "")});
        } else if (kind == "wait") {
            seq.steps.emplace_back(Wait{std::stod(take("duration", "0"))});
        } else {
            throw InvalidParameter("unknown sequence step '" + kind + "'");
        }
        if (!kv.empty()) throw InvalidParameter("unknown key '" + kv.begin()->first + "' in " + kind + " step");
    }
    seq.validate();
    return seq;
}

std::vector<std::string> format_sequence(const PulseSequence& seq) {
    std::vector<std::string> out;
    for (const auto& s : seq.steps) {
        std::ostringstream o;
        o.precision(17);
        if (const auto* p = std::get_if<Pulse>(&s)) {
            o << "pulse psi=" << p->rotation.psi << " phi=" << p->rotation.phi_axis << " theta=" << p->rotation.theta_axis;
            if (p->phase_slot >= 0) o << " slot=" << p->phase_slot;
            if (!p->amplitude_noise) o << " amplitude_noise=0";
        } else if (const auto* m = std::get_if<Measure>(&s)) {
            o << "measure label=" << m->label;
        } else {
            o << "wait duration=" << std::get<Wait>(s).duration;
        }
        out.push_back(o.str());
    }
    return out;
}

namespace {

constexpr double kHalfPi = kPi / 2;

Pulse pulse(double psi, double phi, int slot = -1) { return Pulse{Rotation{psi, phi, 0.0}, slot, true}; }
Measure measure(std::string l) { return Measure{std::move(l)}; }

}  // namespace

PulseSequence squeeze_sequence() {
    return {"squeeze",
            {pulse(kHalfPi, 0), measure("up1"), pulse(kPi, 0), measure("down1"), measure("down2"), pulse(kPi, 0),
             measure("up2")}};
}

PulseSequence backaction_sequence(double psi) {
    // Rotation about the mean spin direction (-y after the pi pulse).
    return {"backaction",
            {pulse(kHalfPi, 0), measure("up1"), pulse(kPi, 0), measure("down1"), pulse(psi, -kHalfPi),
             measure("down2"), pulse(kPi, 0), measure("up2")}};
}

PulseSequence fringe_sequence(double phase) {
    return {"fringe",
            {pulse(kHalfPi, 0), measure("up1"), pulse(kPi, 0), measure("down1"), pulse(kHalfPi, phase),
             measure("final")}};
}

PulseSequence calibration_sequence() {
    return {"calibration", {pulse(kHalfPi, 0), measure("N1"), measure("N2")}};
}

std::map<std::string, PulseSequence> standard_sequences() {
    std::map<std::string, PulseSequence> cat;
    auto add = [&](PulseSequence s) { cat.emplace(s.name, std::move(s)); };
    add({"aux-2pi", {pulse(kHalfPi, 0), measure("N1"), pulse(2 * kPi, kHalfPi), measure("N2")}});
    add({"aux-pi-pair-y",
         {pulse(kHalfPi, 0), measure("N1"), pulse(kPi, kHalfPi), pulse(kPi, -kHalfPi), measure("N2")}});
    add({"aux-pi-pair-x-opposed", {pulse(kHalfPi, 0), measure("N1"), pulse(kPi, 0), pulse(kPi, -kPi), measure("N2")}});
    add({"aux-pi-pair-x", {pulse(kHalfPi, 0), measure("N1"), pulse(kPi, 0), pulse(kPi, 0), measure("N2")}});
    add({"proj-a",
         {pulse(kHalfPi, 0), pulse(kHalfPi, kHalfPi, 2), measure("N1"), pulse(kPi, kHalfPi, 3), measure("N2")}});
    add({"proj-b", {pulse(kHalfPi, 0), measure("N1"), pulse(kPi, kPi, 2), measure("N2")}});
    add(squeeze_sequence());
    add(backaction_sequence(kHalfPi));
    add(fringe_sequence(0.0));
    add(calibration_sequence());
    return cat;
}

PulseSequence catalog_sequence(const std::string& name) {
    auto cat = standard_sequences();
    auto it = cat.find(name);
    if (it == cat.end()) throw UnsupportedSequence("unknown sequence '" + name + "'");
    return it->second;
}

const MeasurementRecord& TrialRecord::at(const std::string& label) const {
    for (const auto& m : measurements)
        if (m.label == label) return m;
    throw InvalidParameter("no measurement labelled '" + label + "'");
}

TrialRecord run_sequence(const PulseSequence& seq, const CollectiveSpinState& initial, const RotationNoiseModel& noise,
                         const ProbeSettings& probe, Rng& rng) {
    TrialRecord rec;
    CollectiveSpinState state = initial;
    rec.eps_common = gauss(rng, noise.eps_common_rms);
    rec.detuning_slow = gauss(rng, noise.detuning_slow_rms);
    const double eta_sd = noise.eps_diff_rms / std::sqrt(2.0);

    for (const auto& step : seq.steps) {
        if (const auto* p = std::get_if<Pulse>(&step)) {
            double scale = 1.0;
            if (p->amplitude_noise) scale += rec.eps_common + gauss(rng, eta_sd);
            double psi = p->rotation.psi;
            int segments = std::max(1, static_cast<int>(std::ceil(std::abs(psi) / kPi - 1e-9)));
            double offset = p->phase_slot >= 0 ? noise.phase_offsets[p->phase_slot] : 0.0;
            for (int k = 0; k < segments; ++k) {
                double phi = p->rotation.phi_axis + offset + gauss(rng, noise.phase_jitter_rms);
                double tilt = (rec.detuning_slow + gauss(rng, noise.detuning_fast_rms)) / noise.rabi_frequency;
                state = rotate(state, Rotation{psi * scale / segments, phi, p->rotation.theta_axis + tilt});
            }
        } else if (const auto* w = std::get_if<Wait>(&step)) {
            double detuning = rec.detuning_slow + gauss(rng, noise.detuning_fast_rms);
            state = rotate(state, Rotation{2 * kPi * detuning * w->duration, 0.0, kHalfPi});
        } else {
            const auto& label = std::get<Measure>(step).label;
            auto pops = populations(state);
            MeasurementRecord m;
            m.label = label;
            m.n_up_true = pops.n_up;
            m.jz_true = state.jz();
            m.latitude = state.latitude();
            m.n_eff = state.n_eff;
            m.contrast = state.contrast;
            double photons = probe.sweep.photons;
            if (probe.ideal_readout) {
                m.n_up = pops.n_up;
                m.splitting = dressed_modes(pops.n_up, probe.g_eff, probe.sweep.detuning_ac, probe.cavity).splitting();
            } else {
                auto trace = synthesize_sweep(pops.n_up, probe.g_eff, probe.sweep, probe.cavity, rng);
                SplittingFit fit;
                try {
                    fit = fit_splitting(trace);
                } catch (const FitError&) {
                    fit.converged = false;
                }
                m.converged = fit.converged;
                m.splitting = fit.splitting;
                m.sigma_splitting = fit.sigma_splitting;
                if (fit.converged) {
                    auto est = population_from_splitting(fit, probe.g_eff);
                    m.n_up = est.n_up;
                    m.sigma_n = est.sigma_n;
                } else {
                    m.n_up = std::nan("");
                    rec.fit_failed = true;
                }
            }
            rec.measurements.push_back(m);

            if (photons > 0 && (probe.decoherence || probe.backaction)) {
                state = condition_on_jz(state, m.sigma_n * m.sigma_n + probe.readout_var_hint);
                ProbeImpact impact = probe.impact;
                impact.photons = photons;
                if (probe.decoherence) state = apply_probe_decoherence(state, impact, rng);
                if (probe.backaction)
                    state = backaction_kick(state, photons, impact.q_total, rng, impact.technical_phi_var);
            }
        }
    }
    rec.final_state = state;
    return rec;
}

}  // namespace qnd
