// Negative-capacitance shunt circuit.
//
// An inverting op-amp stage with feedback resistors R0, R2 mirrors a
// reference RC network Z1 into a negated, scaled terminal impedance
//
//     Z = R1 + (R0 + R2 + A_u R2) / (R0 + R2 - A_u R0) * Z1
//       ~ R1 - (R2/R0) Z1            (ideal op-amp)
//
// so that Z can be trimmed to -Z_S of the actuator at the working frequency.
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "psd/common.hpp"
#include "psd/errors.hpp"

namespace psd {

/// One-pole op-amp gain model A_u(w) = A0 / (1 + j w / (2 pi f1)).
struct OpAmpModel {
    double dc_gain_a0 = 0.0; ///< linear DC gain [-]
    double pole_f1_hz = 0.0; ///< open-loop pole [Hz]
};

inline Complex opamp_gain(double omega, const OpAmpModel& model) {
    if (model.dc_gain_a0 <= 1.0 || model.pole_f1_hz <= 0.0)
        throw std::invalid_argument("opamp_gain: invalid op-amp model");
    if (omega < 0.0)
        throw std::invalid_argument("opamp_gain: omega must be non-negative");
    return model.dc_gain_a0 / Complex(1.0, omega / (2.0 * pi * model.pole_f1_hz));
}

/// Reference network of the negative capacitor.
///
/// narrow: R3 parallel C0, Z1 = R3 / (1 + j w C0 R3).
/// broad:  R3 parallel C0 parallel (RX in series with CX); the extra branch
///         shapes the loss term over a wide band and opens (reduces to the
///         narrow form) as CX -> 0.
struct ReferenceNetwork {
    enum class Kind { narrow, broad };
    Kind kind = Kind::narrow;
    double r3 = 0.0; ///< [Ohm]
    double c0 = 0.0; ///< [F]
    double rx = 0.0; ///< broad only [Ohm]
    double cx = 0.0; ///< broad only [F]

    void validate() const {
        if (r3 <= 0.0 || c0 <= 0.0)
            throw std::invalid_argument("ReferenceNetwork: R3 and C0 must be positive");
        if (kind == Kind::broad && (rx <= 0.0 || cx <= 0.0))
            throw std::invalid_argument("ReferenceNetwork: RX and CX must be positive");
    }
};

inline Complex z1_impedance(const ReferenceNetwork& net, double omega) {
    net.validate();
    if (omega <= 0.0)
        throw std::invalid_argument("z1_impedance: omega must be positive");
    const Complex jw(0.0, omega);
    Complex admittance = 1.0 / net.r3 + jw * net.c0;
    if (net.kind == ReferenceNetwork::Kind::broad)
        admittance += jw * net.cx / (1.0 + jw * net.rx * net.cx);
    return 1.0 / admittance;
}

/// Full circuit parameters.  An absent opamp means the ideal (infinite gain)
/// limit.
struct NegCapParams {
    double r0 = 0.0; ///< mirror-ratio resistor [Ohm], adjustable
    double r1 = 0.0; ///< series trim resistor [Ohm], adjustable
    double r2 = 0.0; ///< fixed feedback resistor [Ohm]
    ReferenceNetwork network;
    std::optional<OpAmpModel> opamp; ///< nullopt = ideal

    void validate() const {
        if (r0 <= 0.0 || r1 <= 0.0 || r2 <= 0.0)
            throw std::invalid_argument("NegCapParams: R0, R1, R2 must be positive");
        network.validate();
    }
};

/// Terminal impedance of the negative capacitor at omega.
inline Complex negcap_impedance(const NegCapParams& params, double omega) {
    params.validate();
    const Complex z1 = z1_impedance(params.network, omega);
    if (!params.opamp)
        return params.r1 - (params.r2 / params.r0) * z1;
    const Complex au = opamp_gain(omega, *params.opamp);
    const Complex den = params.r0 + params.r2 - au * params.r0;
    if (std::abs(den) < 1e-9 * params.r0 * std::abs(au))
        throw instability_error("negcap_impedance: feedback denominator vanished");
    return params.r1 + (params.r0 + params.r2 + au * params.r2) / den * z1;
}

/// Resistor pair that matches the ideal circuit to the series-RC actuator
/// model at omega0:
///
///     R0 = w0^2 C0 C_S R2 R3^2 / (1 + w0^2 C0^2 R3^2)
///     R1 = 1 / (w0^2 C0 C_S R3) - R_S
struct DesignedResistors {
    double r0 = 0.0;
    double r1 = 0.0;
};

inline DesignedResistors design_resistors(double omega0, double cap_c_s, double series_r_s,
                                          double r2, double r3, double c0) {
    if (omega0 <= 0.0 || cap_c_s <= 0.0 || series_r_s < 0.0 || r2 <= 0.0 || r3 <= 0.0 || c0 <= 0.0)
        throw std::invalid_argument("design_resistors: invalid inputs");
    const double w2 = omega0 * omega0;
    DesignedResistors out;
    out.r0 = w2 * c0 * cap_c_s * r2 * r3 * r3 / (1.0 + w2 * c0 * c0 * r3 * r3);
    out.r1 = 1.0 / (w2 * c0 * cap_c_s * r3) - series_r_s;
    if (out.r1 <= 0.0)
        throw std::domain_error("design_resistors: infeasible, R_S too large at this frequency");
    return out;
}

/// Relative impedance mismatch (Z + Z_S) / Z_S; zero at the matched point.
inline Complex matching_error(Complex z_negcap, Complex z_actuator) {
    if (std::abs(z_actuator) == 0.0)
        throw std::invalid_argument("matching_error: z_actuator must be nonzero");
    return (z_negcap + z_actuator) / z_actuator;
}

/// Volt-ohm characteristic of the electronically adjustable resistor
/// (LED + photoresistor): R(v) = r_min + (r_max - r_min) exp(-v / v_ref),
/// strictly decreasing on [v_lo, v_hi].
struct AdjustableResistorCurve {
    double r_min = 0.0;
    double r_max = 0.0;
    double v_ref = 1.0;
    double v_lo = 0.0;
    double v_hi = 10.0;

    void validate() const {
        if (!(0.0 < r_min && r_min < r_max) || v_ref <= 0.0 || v_hi <= v_lo)
            throw std::invalid_argument("AdjustableResistorCurve: invalid curve");
    }
};

/// Out-of-range control voltages are clamped; *clamped reports it when given.
inline double resistance_from_control_voltage(double v_c, const AdjustableResistorCurve& curve,
                                              bool* clamped = nullptr) {
    curve.validate();
    bool clip = false;
    if (v_c < curve.v_lo) { v_c = curve.v_lo; clip = true; }
    if (v_c > curve.v_hi) { v_c = curve.v_hi; clip = true; }
    if (clamped) *clamped = clip;
    return curve.r_min + (curve.r_max - curve.r_min) * std::exp(-v_c / curve.v_ref);
}

/// Inverse of resistance_from_control_voltage on the curve's range.
inline double control_voltage_for_resistance(double r, const AdjustableResistorCurve& curve) {
    curve.validate();
    if (r <= curve.r_min || r > curve.r_max + 1e-12 * curve.r_max)
        throw std::domain_error("control_voltage_for_resistance: resistance outside the curve range");
    return -curve.v_ref * std::log((r - curve.r_min) / (curve.r_max - curve.r_min));
}

} // namespace psd
