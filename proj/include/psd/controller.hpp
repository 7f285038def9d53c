// Adaptive tuner for the negative capacitor.
//
// The tuner watches the phase phi ~ arg K_eff = arg F - arg V and walks the
// two adjustable resistors with fixed increments:
//
//     R0: increase for phi < phi0 or phi >= phi0 + pi, decrease between
//     R1: increase for phi < phi1, decrease otherwise
//
// with all comparisons wrapped into (phi0 - pi, phi0 + pi].  The thresholds
// are calibrated by probing arg K_eff at four axis points around the current
// operating point.  For broadband excitation the phase is read at the
// dominant bin of the transmitted-force spectrum.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "psd/common.hpp"
#include "psd/errors.hpp"
#include "psd/signal.hpp"

namespace psd {

struct ControlState {
    double r0 = 0.0;           ///< [Ohm]
    double r1 = 0.0;           ///< [Ohm]
    double step_dr0 = 0.0;     ///< current increment [Ohm]
    double step_dr1 = 0.0;
    double phi0 = 0.0;         ///< R0 branch threshold, (-pi, pi]
    double phi1 = 0.0;         ///< R1 branch threshold, (-pi, pi]
    int iteration = 0;
    bool converged = false;

    // step adaptation: halve on branch-sign reversal (floor = init/64),
    // re-expand by 1.5 while the sign persists (cap = init)
    bool adapt_steps = true;
    double step_dr0_init = 0.0; ///< 0 means "take from step_dr0 on first use"
    double step_dr1_init = 0.0;
    int last_sign_r0 = 0;
    int last_sign_r1 = 0;

    // resistor clamp range; inactive when hi <= lo
    double r0_lo = 0.0, r0_hi = 0.0;
    double r1_lo = 0.0, r1_hi = 0.0;
    bool clamped = false;

    // convergence bookkeeping
    double force_norm = 1.0;   ///< normalizes force amplitude to a |K_eff|/K_S proxy
    int below_count = 0;
    bool below_threshold = false; ///< last broadband step saw no usable component
    double last_phi = 0.0;
    double last_dominant_hz = 0.0;
};

struct PhaseEstimate {
    double phi = 0.0;            ///< (-pi, pi]
    double frequency_hz = 0.0;
    double force_amplitude = 0.0;
    bool valid = false;
};

/// arg K_eff ~ arg F - arg V, wrapped to (-pi, pi].
inline double estimate_arg_keff(Complex force_phasor, Complex voltage_phasor) {
    if (std::abs(force_phasor) == 0.0 || std::abs(voltage_phasor) == 0.0)
        throw std::invalid_argument("estimate_arg_keff: zero phasor");
    return wrap_phase(std::arg(force_phasor) - std::arg(voltage_phasor));
}

namespace detail {

inline double adapt_step(double step, double init, int sign, int& last_sign) {
    if (last_sign != 0) {
        if (sign == last_sign)
            step = std::min(step * 1.5, init);
        else
            step = std::max(step * 0.5, init / 64.0);
    }
    last_sign = sign;
    return step;
}

inline double clamp_resistor(double r, double lo, double hi, bool& clipped) {
    if (hi <= lo) return r;
    if (r < lo) { clipped = true; return lo; }
    if (r > hi) { clipped = true; return hi; }
    return r;
}

} // namespace detail

/// One update of both resistors from a wrapped phase reading.  Boundary
/// ties (phi equal to a threshold) take the decrease branch.
inline ControlState iterate_law(ControlState state, double phi) {
    if (state.r0 <= 0.0 || state.r1 <= 0.0 || state.step_dr0 <= 0.0 || state.step_dr1 <= 0.0)
        throw std::invalid_argument("iterate_law: invalid control state");
    if (state.step_dr0_init <= 0.0) state.step_dr0_init = state.step_dr0;
    if (state.step_dr1_init <= 0.0) state.step_dr1_init = state.step_dr1;

    const double psi0 = wrap_phase(phi - state.phi0);
    const double psi1 = wrap_phase(phi - state.phi1);
    const int sign0 = (psi0 >= 0.0 && psi0 < pi) ? -1 : +1;
    const int sign1 = (psi1 >= 0.0 && psi1 < pi) ? -1 : +1;

    if (state.adapt_steps) {
        state.step_dr0 = detail::adapt_step(state.step_dr0, state.step_dr0_init, sign0, state.last_sign_r0);
        state.step_dr1 = detail::adapt_step(state.step_dr1, state.step_dr1_init, sign1, state.last_sign_r1);
    } else {
        state.last_sign_r0 = sign0;
        state.last_sign_r1 = sign1;
    }

    bool clipped = false;
    state.r0 = detail::clamp_resistor(state.r0 + sign0 * state.step_dr0, state.r0_lo, state.r0_hi, clipped);
    state.r1 = detail::clamp_resistor(state.r1 + sign1 * state.step_dr1, state.r1_lo, state.r1_hi, clipped);
    state.clamped = clipped;
    state.last_phi = phi;
    state.iteration += 1;
    return state;
}

namespace detail {

/// Boundary phase separating the decrease half-plane (containing phase_plus)
/// from the increase half-plane (containing phase_minus).  Works for the
/// antipodal case, where the circular mean degenerates.
inline double half_plane_boundary(double phase_plus, double phase_minus) {
    const double cand = wrap_phase(phase_plus + 0.5 * wrap_phase(phase_minus - phase_plus));
    const double rel = wrap_phase(phase_plus - cand);
    return (rel >= 0.0 && rel < pi) ? cand : wrap_phase(cand + pi);
}

inline double wrap_2pi(double phi) {
    double w = std::fmod(phi, 2.0 * pi);
    if (w <= 0.0) w += 2.0 * pi;
    return w;
}

inline std::pair<double, double> thresholds_from_axis_phases(double a0p, double a1p,
                                                             double a0m, double a1m) {
    // counter-clockwise winding check over the probe cycle
    const double total = wrap_2pi(a1p - a0p) + wrap_2pi(a0m - a1p) +
                         wrap_2pi(a1m - a0m) + wrap_2pi(a0p - a1m);
    if (std::abs(total - 2.0 * pi) > 1e-9)
        throw calibration_error("calibrate_thresholds: phase not cyclically monotone around the probe circle");
    return {half_plane_boundary(a0p, a0m), half_plane_boundary(a1p, a1m)};
}

} // namespace detail

struct Thresholds {
    double phi0 = 0.0;
    double phi1 = 0.0;
};

/// Probe arg K_eff at the four axis points (+-dR0, 0), (0, +-dR1) with
/// dR = radius_fraction * center, and place each threshold between the
/// opposing readings so that iterate_law steps toward the center.
inline Thresholds calibrate_thresholds(const std::function<double(double, double)>& plant_probe,
                                       double r0_center, double r1_center,
                                       double radius_fraction) {
    if (radius_fraction <= 0.0)
        throw std::invalid_argument("calibrate_thresholds: radius_fraction must be positive");
    if (r0_center <= 0.0 || r1_center <= 0.0)
        throw std::invalid_argument("calibrate_thresholds: centers must be positive");
    const double a0p = plant_probe(r0_center * (1.0 + radius_fraction), r1_center);
    const double a1p = plant_probe(r0_center, r1_center * (1.0 + radius_fraction));
    const double a0m = plant_probe(r0_center * (1.0 - radius_fraction), r1_center);
    const double a1m = plant_probe(r0_center, r1_center * (1.0 - radius_fraction));
    const auto [phi0, phi1] = detail::thresholds_from_axis_phases(a0p, a1p, a0m, a1m);
    return {phi0, phi1};
}

/// Largest-amplitude harmonic bin (DC excluded); amplitude ties resolve to
/// the lowest frequency.  Returns an invalid estimate below the threshold.
inline PhaseEstimate dominant_component(const SpectrumFrame& frame, double threshold_n) {
    if (frame.bins.size() < 2)
        throw std::domain_error("dominant_component: empty spectrum");
    std::size_t best = 1;
    double best_amp = std::abs(frame.bins[1]);
    for (std::size_t k = 2; k < frame.bins.size(); ++k) {
        const double amp = std::abs(frame.bins[k]);
        if (amp > best_amp) {
            best = k;
            best_amp = amp;
        }
    }
    PhaseEstimate est;
    est.frequency_hz = frame.bin_frequencies_hz[best];
    est.force_amplitude = best_amp;
    est.valid = best_amp >= threshold_n && best_amp > 0.0;
    if (est.valid) est.phi = wrap_phase(std::arg(frame.bins[best]));
    return est;
}

/// One broadband control update: FFT both series, read the phase at the
/// dominant force bin, apply iterate_law.  No-op (flagged) below threshold.
inline ControlState broadband_step(const TimeSeries& force_series, const TimeSeries& voltage_series,
                                   ControlState state, double threshold_n) {
    if (force_series.samples.size() != voltage_series.samples.size() ||
        force_series.sample_rate_hz != voltage_series.sample_rate_hz)
        throw std::domain_error("broadband_step: series shape mismatch");
    const SpectrumFrame f_frame = spectrum(force_series);
    const PhaseEstimate est = dominant_component(f_frame, threshold_n);
    if (!est.valid) {
        state.below_threshold = true;
        return state;
    }
    const SpectrumFrame v_frame = spectrum(voltage_series);
    const BinLookup f_bin = phasor_at(f_frame, est.frequency_hz);
    const BinLookup v_bin = phasor_at(v_frame, est.frequency_hz);
    if (std::abs(v_bin.phasor) == 0.0) {
        state.below_threshold = true;
        return state;
    }
    const double phi = estimate_arg_keff(f_bin.phasor, v_bin.phasor);
    state = iterate_law(state, phi);
    state.below_threshold = false;
    state.last_dominant_hz = est.frequency_hz;
    return state;
}

/// Sticky three-in-a-row convergence test on the normalized force amplitude.
/// A below-measurement-threshold probe counts as suppressed.
inline bool has_converged(ControlState& state, double k_eff_ratio_threshold,
                          const PhaseEstimate& probe) {
    const double norm = state.force_norm > 0.0 ? state.force_norm : 1.0;
    const bool quiet = !probe.valid || probe.force_amplitude / norm < k_eff_ratio_threshold;
    state.below_count = quiet ? state.below_count + 1 : 0;
    state.converged = state.below_count >= 3;
    return state.converged;
}

/// Epoch-driven tuning sequencer.
///
/// Cold starts first localize the amplitude minimum with coordinate scans
/// (the plain phase law cannot cross the circuit's stability pole, which
/// sits only a few percent below the matched R0), then calibrate the
/// thresholds on a small circle and hand over to the phase law.  Scenarios
/// that begin near the optimum skip straight to calibration.
class AdaptiveTuner {
public:
    struct Config {
        bool acquire = true;       ///< run the coordinate scans first
        double scan_span = 0.15;   ///< relative half-width of the coarse scans
        int scan_r0_points = 21;
        int scan_r1_points = 11;
        double refine_span = 0.03; ///< relative half-width of the fine R0 scan
        int refine_points = 13;
        double calib_radius = 0.02;
        double step_frac = 0.002;  ///< tracking step as a fraction of the found optimum
        double force_threshold_n = 0.0;
        double converge_ratio = 1e-2;
        bool thresholds_fixed = false; ///< keep the phi0/phi1 already in the state
    };

    AdaptiveTuner(ControlState initial, Config cfg) : st_(initial), cfg_(cfg) {
        if (st_.r0 <= 0.0 || st_.r1 <= 0.0)
            throw std::invalid_argument("AdaptiveTuner: initial resistances must be positive");
        if (cfg_.acquire) {
            begin_scan(Mode::scan_r0, st_.r0, cfg_.scan_span, cfg_.scan_r0_points);
        } else if (cfg_.thresholds_fixed) {
            enter_track();
        } else {
            begin_calibration();
        }
    }

    double r0() const { return st_.r0; }
    double r1() const { return st_.r1; }
    const ControlState& state() const { return st_; }
    bool converged() const { return st_.converged; }
    bool tracking() const { return mode_ == Mode::track; }

    /// Consume one epoch measured at the currently applied (r0, r1).
    void step(const TimeSeries& force_series, const TimeSeries& voltage_series) {
        const SpectrumFrame f_frame = spectrum(force_series);
        const PhaseEstimate est = dominant_component(f_frame, cfg_.force_threshold_n);
        if (est.valid) st_.last_dominant_hz = est.frequency_hz;

        switch (mode_) {
        case Mode::scan_r0:
        case Mode::scan_r1:
        case Mode::refine_r0:
        case Mode::refine_r1:
            record_scan_point(est.force_amplitude);
            break;
        case Mode::calibrate:
            record_calibration_point(f_frame, voltage_series, est);
            break;
        case Mode::track:
            st_ = broadband_step(force_series, voltage_series, st_, cfg_.force_threshold_n);
            has_converged(st_, cfg_.converge_ratio, est);
            break;
        }
    }

private:
    enum class Mode { scan_r0, scan_r1, refine_r0, refine_r1, calibrate, track };

    void begin_scan(Mode mode, double center, double span, int points) {
        mode_ = mode;
        scan_values_.clear();
        for (int i = 0; i < points; ++i) {
            const double frac = points > 1 ? static_cast<double>(i) / (points - 1) : 0.5;
            scan_values_.push_back(center * (1.0 - span + 2.0 * span * frac));
        }
        scan_index_ = 0;
        scan_best_index_ = 0;
        scan_best_amp_ = std::numeric_limits<double>::infinity();
        apply_scan_value(scan_values_.front());
    }

    void apply_scan_value(double value) {
        if (mode_ == Mode::scan_r1 || mode_ == Mode::refine_r1)
            st_.r1 = value;
        else
            st_.r0 = value;
    }

    void record_scan_point(double amplitude) {
        if (amplitude < scan_best_amp_) {
            scan_best_amp_ = amplitude;
            scan_best_index_ = scan_index_;
        }
        scan_index_ += 1;
        if (scan_index_ < scan_values_.size()) {
            apply_scan_value(scan_values_[scan_index_]);
            return;
        }
        apply_scan_value(scan_values_[scan_best_index_]);
        switch (mode_) {
        case Mode::scan_r0:
            begin_scan(Mode::scan_r1, st_.r1, cfg_.scan_span, cfg_.scan_r1_points);
            break;
        case Mode::scan_r1:
            begin_scan(Mode::refine_r0, st_.r0, cfg_.refine_span, cfg_.refine_points);
            break;
        case Mode::refine_r0:
            begin_scan(Mode::refine_r1, st_.r1, cfg_.refine_span, cfg_.refine_points);
            break;
        default:
            if (cfg_.thresholds_fixed)
                enter_track();
            else
                begin_calibration();
            break;
        }
    }

    void begin_calibration() {
        mode_ = Mode::calibrate;
        calib_center_r0_ = st_.r0;
        calib_center_r1_ = st_.r1;
        calib_phases_.clear();
        calib_index_ = 0;
        apply_calibration_point();
    }

    void apply_calibration_point() {
        const double rho = cfg_.calib_radius;
        st_.r0 = calib_center_r0_;
        st_.r1 = calib_center_r1_;
        switch (calib_index_) {
        case 0: st_.r0 = calib_center_r0_ * (1.0 + rho); break;
        case 1: st_.r1 = calib_center_r1_ * (1.0 + rho); break;
        case 2: st_.r0 = calib_center_r0_ * (1.0 - rho); break;
        default: st_.r1 = calib_center_r1_ * (1.0 - rho); break;
        }
    }

    void record_calibration_point(const SpectrumFrame& f_frame, const TimeSeries& voltage_series,
                                  const PhaseEstimate& est) {
        if (!est.valid)
            throw calibration_error("AdaptiveTuner: force below threshold during calibration");
        const SpectrumFrame v_frame = spectrum(voltage_series);
        const Complex f = phasor_at(f_frame, est.frequency_hz).phasor;
        const Complex v = phasor_at(v_frame, est.frequency_hz).phasor;
        calib_phases_.push_back(estimate_arg_keff(f, v));
        calib_index_ += 1;
        if (calib_index_ < 4) {
            apply_calibration_point();
            return;
        }
        const auto [phi0, phi1] = detail::thresholds_from_axis_phases(
            calib_phases_[0], calib_phases_[1], calib_phases_[2], calib_phases_[3]);
        st_.r0 = calib_center_r0_;
        st_.r1 = calib_center_r1_;
        st_.phi0 = phi0;
        st_.phi1 = phi1;
        enter_track();
    }

    void enter_track() {
        mode_ = Mode::track;
        st_.step_dr0 = cfg_.step_frac * st_.r0;
        st_.step_dr1 = cfg_.step_frac * st_.r1;
        st_.step_dr0_init = st_.step_dr0;
        st_.step_dr1_init = st_.step_dr1;
        st_.last_sign_r0 = 0;
        st_.last_sign_r1 = 0;
    }

    ControlState st_;
    Config cfg_;
    Mode mode_ = Mode::track;

    std::vector<double> scan_values_;
    std::size_t scan_index_ = 0;
    std::size_t scan_best_index_ = 0;
    double scan_best_amp_ = 0.0;

    double calib_center_r0_ = 0.0;
    double calib_center_r1_ = 0.0;
    std::vector<double> calib_phases_;
    std::size_t calib_index_ = 0;
};

} // namespace psd
