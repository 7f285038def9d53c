// Couples plant, actuator, circuit, and controller into steady-state
// frequency-domain epochs.
//
// Every epoch is treated as harmonic: the incident motion is decomposed into
// bins, each bin is pushed through the complex transfer with the effective
// spring constant of the instant, and the transmitted force and shunt
// voltage are reassembled into time series for the controller.  The plant
// settles within a few cycles at Q ~ 11, so a 0.256 s epoch is quasi-static.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "psd/actuator.hpp"
#include "psd/common.hpp"
#include "psd/controller.hpp"
#include "psd/errors.hpp"
#include "psd/mechanics.hpp"
#include "psd/negcap.hpp"
#include "psd/signal.hpp"

namespace psd {

/// Scripted drift of one actuator parameter (heating experiment analogue).
struct DriftProfile {
    enum class Target { none, cap_c_s, series_r_s };
    enum class Shape { linear, exponential };
    Target target = Target::none;
    Shape shape = Shape::linear;
    double relative_change = 0.0; ///< total change at the end of the span
    double start_s = 0.0;
    double span_s = 1.0;
};

/// Drifted copy of the actuator at time t.  Identity before start; the final
/// value holds after start+span.  The exponential shape is normalized so the
/// full relative change is reached at the end of the span.
inline ActuatorParams apply_drift(const ActuatorParams& params, const DriftProfile& profile, double t) {
    if (t < 0.0)
        throw std::invalid_argument("apply_drift: t must be non-negative");
    if (profile.target == DriftProfile::Target::none || profile.relative_change == 0.0)
        return params;
    if (profile.span_s <= 0.0)
        throw std::invalid_argument("apply_drift: span must be positive");
    double tau = (t - profile.start_s) / profile.span_s;
    tau = std::clamp(tau, 0.0, 1.0);
    double progress = tau;
    if (profile.shape == DriftProfile::Shape::exponential)
        progress = (1.0 - std::exp(-3.0 * tau)) / (1.0 - std::exp(-3.0));
    const double factor = 1.0 + profile.relative_change * progress;
    ActuatorParams out = params;
    if (profile.target == DriftProfile::Target::cap_c_s)
        out.cap_c_s *= factor;
    else
        out.series_r_s *= factor;
    return out;
}

/// What the tune-at-start step minimizes.
enum class TuneObjective {
    none,
    keff, ///< |K_eff(2 pi f0)|
    tr,   ///< |u2/u1|(2 pi f0)
    band  ///< max delta L over [band_lo, band_hi]
};

/// Full experiment description; filled by the scenario loader.
struct Scenario {
    ActuatorParams actuator;
    NegCapParams negcap;
    MechanicalPlant plant;
    ExcitationSpec excitation;
    DriftProfile drift;

    bool control_enabled = false;
    bool acquire = true;            ///< run acquisition scans before tracking
    double duration_s = 60.0;
    std::size_t epoch_length = 4096;
    double sample_rate_hz = 16000.0;
    std::uint64_t seed = 1;

    double force_threshold_n = 0.0; ///< dominant-component floor [N]
    double converge_ratio = 1e-2;
    double step_frac = 0.002;
    bool have_threshold_override = false;
    double phi0_override = 0.0;
    double phi1_override = 0.0;

    TuneObjective tune_at_start = TuneObjective::none;
    double tune_f0_hz = 2000.0;
    double band_lo_hz = 1000.0;
    double band_hi_hz = 2000.0;

    double sweep_lo_hz = 550.0;
    double sweep_hi_hz = 3000.0;
    double sweep_step_hz = 5.0;

    void validate() const {
        actuator.validate();
        negcap.validate();
        if (plant.mass_M <= 0.0 || plant.damping_B <= 0.0)
            throw std::invalid_argument("Scenario: invalid plant");
        if (duration_s <= 0.0 || sample_rate_hz <= 0.0)
            throw std::invalid_argument("Scenario: invalid timing");
        if (epoch_length < 2 || (epoch_length & (epoch_length - 1)) != 0)
            throw std::invalid_argument("Scenario: epoch length must be a power of two");
    }
};

/// Harmonic response of the full chain at one frequency, unit incident
/// amplitude.
struct SteadyState {
    Complex u2_over_u1;
    Complex force_n;
    Complex voltage_v;
    Complex delta_l_m;
    EffectiveSpring spring;
};

inline SteadyState steady_state_response(double omega, const ActuatorParams& act,
                                         const NegCapParams& circuit, const MechanicalPlant& plant) {
    if (omega <= 0.0)
        throw std::invalid_argument("steady_state_response: omega must be positive");
    try {
        const Complex z_shunt = negcap_impedance(circuit, omega);
        const Complex z_act = actuator_impedance_exact(omega, act.cap_c_s, act.loss_tan);
        SteadyState out;
        out.spring = effective_spring_constant(z_shunt, z_act, act.spring_k_s, act.coupling_k2);
        MechanicalPlant loaded = plant;
        loaded.spring_K = out.spring.k_eff;
        out.u2_over_u1 = transfer_complex(omega, loaded);
        out.delta_l_m = out.u2_over_u1 - 1.0; // unit incident amplitude
        out.force_n = out.spring.k_eff * out.delta_l_m;
        out.voltage_v = shunt_voltage(out.force_n, omega, z_shunt, act);
        return out;
    } catch (const pole_error& e) {
        throw pole_error(std::string(e.what()) + " at f=" + std::to_string(hz_of(omega)) + " Hz");
    }
}

/// Transfer of the plant with the shunt disconnected (open circuit), where
/// the actuator stiffens to K_S / (1 - k^2).
inline Complex free_transfer(double omega, const ActuatorParams& act, const MechanicalPlant& plant) {
    MechanicalPlant open = plant;
    open.spring_K = act.spring_k_s / (1.0 - act.coupling_k2);
    return transfer_complex(omega, open);
}

/// Free vs shunted transmissibility with the circuit state frozen.
inline std::vector<TransmissibilityPoint> transmissibility_sweep(const Scenario& scenario,
                                                                 const std::vector<double>& freq_grid_hz) {
    if (freq_grid_hz.empty())
        throw std::domain_error("transmissibility_sweep: empty grid");
    std::vector<TransmissibilityPoint> out;
    out.reserve(freq_grid_hz.size());
    for (const double f : freq_grid_hz) {
        if (f <= 0.0)
            throw std::invalid_argument("transmissibility_sweep: non-positive frequency");
        const double omega = rad_per_s(f);
        TransmissibilityPoint p;
        p.frequency_hz = f;
        p.tr_free_db = to_db(std::abs(free_transfer(omega, scenario.actuator, scenario.plant)));
        const SteadyState ss = steady_state_response(omega, scenario.actuator, scenario.negcap, scenario.plant);
        p.tr_shunted_db = to_db(std::abs(ss.u2_over_u1));
        p.delta_l_db = p.tr_shunted_db - p.tr_free_db;
        out.push_back(p);
    }
    return out;
}

namespace detail {

struct ZoomResult {
    double r0 = 0.0;
    double r1 = 0.0;
    double value = 0.0;
    bool boundary_warning = false;
};

/// Grid search (41x41, +-span) followed by shrinking-grid refinement.  A
/// minimum landing on the outer boundary widens the search once per round.
template <class ObjectiveFn>
ZoomResult zoom_minimize(const ObjectiveFn& objective, double r0_center, double r1_center,
                         double span, int coarse_points = 41, int rounds = 6) {
    ZoomResult best;
    best.value = std::numeric_limits<double>::infinity();
    double c0 = r0_center;
    double c1 = r1_center;
    int points = coarse_points;
    for (int round = 0; round < rounds; ++round) {
        int best_i = -1;
        int best_j = -1;
        for (int i = 0; i < points; ++i) {
            const double r0 = c0 * (1.0 - span + 2.0 * span * i / (points - 1));
            for (int j = 0; j < points; ++j) {
                const double r1 = c1 * (1.0 - span + 2.0 * span * j / (points - 1));
                if (r0 <= 0.0 || r1 <= 0.0) continue;
                double v = std::numeric_limits<double>::infinity();
                try {
                    v = objective(r0, r1);
                } catch (const pole_error&) {
                } catch (const instability_error&) {
                } catch (const singularity_error&) {
                }
                if (v < best.value) {
                    best.value = v;
                    best.r0 = r0;
                    best.r1 = r1;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        const bool on_edge = best_i == 0 || best_i == points - 1 || best_j == 0 || best_j == points - 1;
        if (on_edge && round == 0) {
            best.boundary_warning = true;
            span *= 2.0;
            continue;
        }
        c0 = best.r0;
        c1 = best.r1;
        span *= 0.2;
        points = 21;
    }
    return best;
}

} // namespace detail

/// Ground-truth minimizer of |K_eff(omega0)| over (R0, R1).
struct OracleResult {
    double r0_min = 0.0;
    double r1_min = 0.0;
    double k_eff_ratio = 0.0;
    bool boundary_warning = false;
};

inline OracleResult tune_optimal_oracle(const Scenario& scenario, double omega0) {
    scenario.validate();
    const auto objective = [&](double r0, double r1) {
        NegCapParams circuit = scenario.negcap;
        circuit.r0 = r0;
        circuit.r1 = r1;
        const Complex z_shunt = negcap_impedance(circuit, omega0);
        const Complex z_act = actuator_impedance_exact(omega0, scenario.actuator.cap_c_s,
                                                       scenario.actuator.loss_tan);
        return effective_spring_constant(z_shunt, z_act, scenario.actuator.spring_k_s,
                                         scenario.actuator.coupling_k2).magnitude_ratio;
    };
    const auto z = detail::zoom_minimize(objective, scenario.negcap.r0, scenario.negcap.r1, 0.2);
    OracleResult out;
    out.r0_min = z.r0;
    out.r1_min = z.r1;
    out.k_eff_ratio = z.value;
    out.boundary_warning = z.boundary_warning;
    return out;
}

/// Minimize |u2/u1| itself at f0 (the fine-tuning step that also cancels the
/// viscous bypass, which a pure |K_eff| minimum cannot).
inline OracleResult tune_transmissibility(const Scenario& scenario, double f0_hz) {
    scenario.validate();
    const double omega = rad_per_s(f0_hz);
    const auto objective = [&](double r0, double r1) {
        NegCapParams circuit = scenario.negcap;
        circuit.r0 = r0;
        circuit.r1 = r1;
        return std::abs(steady_state_response(omega, scenario.actuator, circuit, scenario.plant).u2_over_u1);
    };
    const auto z = detail::zoom_minimize(objective, scenario.negcap.r0, scenario.negcap.r1, 0.2);
    return {z.r0, z.r1, z.value, z.boundary_warning};
}

/// Minimax suppression tuning over a frequency band (25 Hz grid).
inline OracleResult tune_band(const Scenario& scenario, double f_lo_hz, double f_hi_hz) {
    scenario.validate();
    if (f_hi_hz <= f_lo_hz)
        throw std::invalid_argument("tune_band: empty band");
    std::vector<double> grid;
    for (double f = f_lo_hz; f <= f_hi_hz + 1e-9; f += 25.0) grid.push_back(f);
    const auto objective = [&](double r0, double r1) {
        Scenario s = scenario;
        s.negcap.r0 = r0;
        s.negcap.r1 = r1;
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& p : transmissibility_sweep(s, grid))
            worst = std::max(worst, p.delta_l_db);
        return worst;
    };
    const auto z = detail::zoom_minimize(objective, scenario.negcap.r0, scenario.negcap.r1, 0.4, 25);
    return {z.r0, z.r1, z.value, z.boundary_warning};
}

/// Apply the scenario's tune-at-start step in place.
inline void tune_scenario(Scenario& scenario) {
    switch (scenario.tune_at_start) {
    case TuneObjective::none:
        return;
    case TuneObjective::keff: {
        const auto r = tune_optimal_oracle(scenario, rad_per_s(scenario.tune_f0_hz));
        scenario.negcap.r0 = r.r0_min;
        scenario.negcap.r1 = r.r1_min;
        return;
    }
    case TuneObjective::tr: {
        const auto r = tune_transmissibility(scenario, scenario.tune_f0_hz);
        scenario.negcap.r0 = r.r0_min;
        scenario.negcap.r1 = r.r1_min;
        return;
    }
    case TuneObjective::band: {
        const auto r = tune_band(scenario, scenario.band_lo_hz, scenario.band_hi_hz);
        scenario.negcap.r0 = r.r0_min;
        scenario.negcap.r1 = r.r1_min;
        return;
    }
    }
}

struct SimLogRow {
    double time_s = 0.0;
    double r0 = 0.0;
    double r1 = 0.0;
    double k_eff_ratio = 0.0;
    double arg_k_eff = 0.0;
    double delta_l_tr_db = 0.0;
    double dominant_hz = 0.0;
    bool converged = false;
};

struct SimLog {
    std::vector<SimLogRow> rows;
};

/// Per-epoch frequency-domain snapshot (kept for the first and last epoch).
struct EpochSpectra {
    std::size_t epoch = 0;
    double time_s = 0.0;
    SpectrumFrame excitation;
    SpectrumFrame force;
    SpectrumFrame voltage;
};

struct AdaptiveRun {
    SimLog log;
    EpochSpectra first_epoch;
    EpochSpectra last_epoch;
    double final_r0 = 0.0;
    double final_r1 = 0.0;
};

/// Closed-loop (or open-loop, when control is disabled) epoch simulation.
/// Deterministic for a fixed scenario; pole crossings abort with the epoch
/// index in the message.
inline AdaptiveRun run_adaptive_scenario(const Scenario& scenario_in) {
    Scenario scenario = scenario_in;
    scenario.validate();
    tune_scenario(scenario);

    const double epoch_s = static_cast<double>(scenario.epoch_length) / scenario.sample_rate_hz;
    const auto epochs = static_cast<std::size_t>(std::ceil(scenario.duration_s / epoch_s));

    ControlState init;
    init.r0 = scenario.negcap.r0;
    init.r1 = scenario.negcap.r1;
    init.step_dr0 = scenario.step_frac * init.r0;
    init.step_dr1 = scenario.step_frac * init.r1;
    init.force_norm = scenario.actuator.spring_k_s; // unit incident amplitude
    if (scenario.have_threshold_override) {
        init.phi0 = scenario.phi0_override;
        init.phi1 = scenario.phi1_override;
    }
    AdaptiveTuner::Config cfg;
    cfg.acquire = scenario.acquire;
    cfg.step_frac = scenario.step_frac;
    cfg.force_threshold_n = scenario.force_threshold_n;
    cfg.converge_ratio = scenario.converge_ratio;
    cfg.thresholds_fixed = scenario.have_threshold_override;
    AdaptiveTuner tuner(init, cfg);

    AdaptiveRun run;
    run.log.rows.reserve(epochs);
    NegCapParams circuit = scenario.negcap;

    for (std::size_t e = 0; e < epochs; ++e) {
        const double t = static_cast<double>(e) * epoch_s;
        const ActuatorParams act = apply_drift(scenario.actuator, scenario.drift, t);
        if (scenario.control_enabled) {
            circuit.r0 = tuner.r0();
            circuit.r1 = tuner.r1();
        }

        ExcitationSpec epoch_spec = scenario.excitation;
        epoch_spec.seed = scenario.seed + e; // fresh noise every epoch
        const TimeSeries u1 = synthesize(epoch_spec, scenario.sample_rate_hz, epoch_s);
        const SpectrumFrame u1_frame = spectrum(u1);

        SpectrumFrame f_frame = u1_frame;
        SpectrumFrame v_frame = u1_frame;
        try {
            for (std::size_t k = 0; k < u1_frame.bins.size(); ++k) {
                if (k == 0 || std::abs(u1_frame.bins[k]) == 0.0) {
                    f_frame.bins[k] = 0.0;
                    v_frame.bins[k] = 0.0;
                    continue;
                }
                const double omega = rad_per_s(u1_frame.bin_frequencies_hz[k]);
                const SteadyState ss = steady_state_response(omega, act, circuit, scenario.plant);
                f_frame.bins[k] = ss.force_n * u1_frame.bins[k];
                v_frame.bins[k] = ss.voltage_v * u1_frame.bins[k];
            }
        } catch (const pole_error& err) {
            throw pole_error(std::string(err.what()) + " (epoch " + std::to_string(e) + ")");
        }
        const TimeSeries force_ts = inverse_spectrum(f_frame);
        const TimeSeries volt_ts = inverse_spectrum(v_frame);

        SimLogRow row;
        row.time_s = t;
        row.r0 = circuit.r0;
        row.r1 = circuit.r1;
        // isolation efficiency is logged at the driven frequency, so the row
        // tracks the excitation's dominant bin rather than whichever noise
        // bin happens to lead the suppressed force spectrum
        const PhaseEstimate dom = dominant_component(u1_frame, 0.0);
        row.dominant_hz = dom.frequency_hz;
        const double omega_d = rad_per_s(dom.frequency_hz);
        const SteadyState at_dom = steady_state_response(omega_d, act, circuit, scenario.plant);
        row.k_eff_ratio = at_dom.spring.magnitude_ratio;
        row.arg_k_eff = at_dom.spring.argument;
        row.delta_l_tr_db = to_db(std::abs(at_dom.u2_over_u1)) -
                            to_db(std::abs(free_transfer(omega_d, act, scenario.plant)));

        if (scenario.control_enabled)
            tuner.step(force_ts, volt_ts);
        row.converged = tuner.converged();
        run.log.rows.push_back(row);

        if (e == 0 || e == epochs - 1) {
            EpochSpectra snap;
            snap.epoch = e;
            snap.time_s = t;
            snap.excitation = u1_frame;
            snap.force = f_frame;
            snap.voltage = v_frame;
            if (e == 0)
                run.first_epoch = snap;
            else
                run.last_epoch = snap;
        }
    }
    run.final_r0 = scenario.control_enabled ? tuner.r0() : circuit.r0;
    run.final_r1 = scenario.control_enabled ? tuner.r1() : circuit.r1;
    return run;
}

} // namespace psd
