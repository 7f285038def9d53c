// Scenario file loader.
//
// Sectioned key=value text; '#' and ';' start comments.  Unknown sections or
// keys are rejected with the offending name and line number.  The format is
// documented in README.md.
#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "psd/errors.hpp"
#include "psd/mechanics.hpp"
#include "psd/simulator.hpp"

namespace psd {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] inline void fail(const std::string& name, int line, const std::string& msg) {
    throw scenario_error(name + ":" + std::to_string(line) + ": " + msg);
}

inline double parse_number(const std::string& value, const std::string& key,
                           const std::string& name, int line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        fail(name, line, "invalid number for key '" + key + "': " + value);
    }
    if (used != value.size())
        fail(name, line, "trailing characters in value for key '" + key + "': " + value);
    return v;
}

inline bool parse_bool(const std::string& value, const std::string& key,
                       const std::string& name, int line) {
    if (value == "true" || value == "on" || value == "1") return true;
    if (value == "false" || value == "off" || value == "0") return false;
    fail(name, line, "invalid boolean for key '" + key + "': " + value);
}

} // namespace detail

/// Parse a scenario from a stream; `name` labels error messages.
inline Scenario parse_scenario(std::istream& in, const std::string& name) {
    // known key sets per section
    static const std::map<std::string, std::set<std::string>> known = {
        {"actuator", {"spring_k_s", "cap_c_s", "loss_tan", "coupling_k2", "series_r_s"}},
        {"plant", {"mass", "quality", "damping"}},
        {"opamp", {"ideal", "a0_db", "pole_hz"}},
        {"network", {"kind", "r3", "c0", "rx", "cx"}},
        {"negcap", {"r0", "r1", "r2"}},
        {"excitation", {"tone", "noise_rms"}},
        {"drift", {"target", "shape", "change", "start", "span"}},
        {"control", {"enabled", "acquire", "force_threshold", "converge_ratio", "step_frac",
                     "phi0", "phi1"}},
        {"tune", {"objective", "f0", "band_lo", "band_hi"}},
        {"run", {"duration", "epoch_length", "sample_rate", "seed", "sweep_lo", "sweep_hi",
                 "sweep_step"}},
    };

    Scenario sc;
    bool opamp_ideal = false;
    double a0_db = 105.0;
    double pole_hz = 100.0;
    double quality = 0.0;
    double damping = 0.0;
    bool have_phi0 = false;
    bool have_phi1 = false;
    sc.acquire = true;

    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                detail::fail(name, lineno, "malformed section header: " + line);
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!known.count(section))
                detail::fail(name, lineno, "unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            detail::fail(name, lineno, "expected key=value, got: " + line);
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (section.empty())
            detail::fail(name, lineno, "key '" + key + "' outside any section");
        if (!known.at(section).count(key))
            detail::fail(name, lineno, "unknown key '" + key + "' in section [" + section + "]");
        if (value.empty())
            detail::fail(name, lineno, "empty value for key '" + key + "'");

        const auto num = [&] { return detail::parse_number(value, key, name, lineno); };
        const auto flag = [&] { return detail::parse_bool(value, key, name, lineno); };

        if (section == "actuator") {
            if (key == "spring_k_s") sc.actuator.spring_k_s = num();
            else if (key == "cap_c_s") sc.actuator.cap_c_s = num();
            else if (key == "loss_tan") sc.actuator.loss_tan = num();
            else if (key == "coupling_k2") sc.actuator.coupling_k2 = num();
            else sc.actuator.series_r_s = num();
        } else if (section == "plant") {
            if (key == "mass") sc.plant.mass_M = num();
            else if (key == "quality") quality = num();
            else damping = num();
        } else if (section == "opamp") {
            if (key == "ideal") opamp_ideal = flag();
            else if (key == "a0_db") a0_db = num();
            else pole_hz = num();
        } else if (section == "network") {
            if (key == "kind") {
                if (value == "narrow") sc.negcap.network.kind = ReferenceNetwork::Kind::narrow;
                else if (value == "broad") sc.negcap.network.kind = ReferenceNetwork::Kind::broad;
                else detail::fail(name, lineno, "network kind must be narrow or broad: " + value);
            } else if (key == "r3") sc.negcap.network.r3 = num();
            else if (key == "c0") sc.negcap.network.c0 = num();
            else if (key == "rx") sc.negcap.network.rx = num();
            else sc.negcap.network.cx = num();
        } else if (section == "negcap") {
            if (key == "r0") sc.negcap.r0 = num();
            else if (key == "r1") sc.negcap.r1 = num();
            else sc.negcap.r2 = num();
        } else if (section == "excitation") {
            if (key == "tone") {
                // freq:amplitude[:phase]
                Tone tone;
                std::istringstream ts(value);
                std::string part;
                int idx = 0;
                while (std::getline(ts, part, ':')) {
                    const double v = detail::parse_number(detail::trim(part), key, name, lineno);
                    if (idx == 0) tone.frequency_hz = v;
                    else if (idx == 1) tone.amplitude = v;
                    else if (idx == 2) tone.phase_rad = v;
                    else detail::fail(name, lineno, "tone takes freq:amplitude[:phase]");
                    ++idx;
                }
                if (idx < 2)
                    detail::fail(name, lineno, "tone takes freq:amplitude[:phase]");
                sc.excitation.tones.push_back(tone);
            } else {
                sc.excitation.noise_rms = num();
            }
        } else if (section == "drift") {
            if (key == "target") {
                if (value == "none") sc.drift.target = DriftProfile::Target::none;
                else if (value == "cap_c_s") sc.drift.target = DriftProfile::Target::cap_c_s;
                else if (value == "series_r_s") sc.drift.target = DriftProfile::Target::series_r_s;
                else detail::fail(name, lineno, "drift target must be none, cap_c_s, or series_r_s");
            } else if (key == "shape") {
                if (value == "linear") sc.drift.shape = DriftProfile::Shape::linear;
                else if (value == "exponential") sc.drift.shape = DriftProfile::Shape::exponential;
                else detail::fail(name, lineno, "drift shape must be linear or exponential");
            } else if (key == "change") sc.drift.relative_change = num();
            else if (key == "start") sc.drift.start_s = num();
            else sc.drift.span_s = num();
        } else if (section == "control") {
            if (key == "enabled") sc.control_enabled = flag();
            else if (key == "acquire") sc.acquire = flag();
            else if (key == "force_threshold") sc.force_threshold_n = num();
            else if (key == "converge_ratio") sc.converge_ratio = num();
            else if (key == "step_frac") sc.step_frac = num();
            else if (key == "phi0") { sc.phi0_override = num(); have_phi0 = true; }
            else { sc.phi1_override = num(); have_phi1 = true; }
        } else if (section == "tune") {
            if (key == "objective") {
                if (value == "none") sc.tune_at_start = TuneObjective::none;
                else if (value == "keff") sc.tune_at_start = TuneObjective::keff;
                else if (value == "tr") sc.tune_at_start = TuneObjective::tr;
                else if (value == "band") sc.tune_at_start = TuneObjective::band;
                else detail::fail(name, lineno, "tune objective must be none, keff, tr, or band");
            } else if (key == "f0") sc.tune_f0_hz = num();
            else if (key == "band_lo") sc.band_lo_hz = num();
            else sc.band_hi_hz = num();
        } else { // run
            if (key == "duration") sc.duration_s = num();
            else if (key == "epoch_length") sc.epoch_length = static_cast<std::size_t>(num());
            else if (key == "sample_rate") sc.sample_rate_hz = num();
            else if (key == "seed") sc.seed = static_cast<std::uint64_t>(num());
            else if (key == "sweep_lo") sc.sweep_lo_hz = num();
            else if (key == "sweep_hi") sc.sweep_hi_hz = num();
            else sc.sweep_step_hz = num();
        }
    }

    if (have_phi0 != have_phi1)
        throw scenario_error(name + ": phi0 and phi1 must be given together");
    sc.have_threshold_override = have_phi0;
    if (!opamp_ideal)
        sc.negcap.opamp = OpAmpModel{from_db(a0_db), pole_hz};
    sc.excitation.seed = sc.seed;
    sc.plant.spring_K = sc.actuator.spring_k_s;
    if (damping > 0.0)
        sc.plant.damping_B = damping;
    else if (quality > 0.0 && sc.actuator.spring_k_s > 0.0 && sc.plant.mass_M > 0.0)
        sc.plant.damping_B = damping_from_quality(sc.actuator.spring_k_s, sc.plant.mass_M, quality);
    else
        throw scenario_error(name + ": [plant] needs mass and quality (or damping)");

    try {
        sc.validate();
    } catch (const std::exception& e) {
        throw scenario_error(name + ": " + e.what());
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw scenario_error(path + ": cannot open scenario file");
    return parse_scenario(in, path);
}

} // namespace psd
