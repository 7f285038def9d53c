// Piezoelectric stack actuator used as the spring of the isolation plant.
//
// Constitutive relations of the clamped stack (charge Q, force F, voltage V,
// elongation dl, short-circuit stiffness K_S, clamped capacitance C_S,
// charge sensitivity d):
//
//     Q  = d F + C_S V
//     dl = F / K_S + d V
//
// When the electrodes see an external impedance Z, the mechanical stiffness
// becomes
//
//     K_eff = K_S (1 + Z_S / Z) / (1 - k^2 + Z_S / Z),   k^2 = d^2 K_S / C_S,
//
// where Z_S is the internal (lossy) impedance of the actuator capacitance.
#pragma once

#include <cmath>
#include <stdexcept>

#include "psd/common.hpp"
#include "psd/errors.hpp"

namespace psd {

/// Electromechanical parameters of the stack.
struct ActuatorParams {
    double spring_k_s = 0.0; ///< short-circuit stiffness [N/m]
    double cap_c_s = 0.0;    ///< clamped capacitance [F]
    double loss_tan = 0.0;   ///< dielectric loss tangent [-]
    double coupling_k2 = 0.0;///< effective coupling factor k^2 [-]
    double series_r_s = 0.0; ///< series loss resistance of the two-element model [Ohm]

    /// Charge sensitivity d = sqrt(k^2 C_S / K_S) [C/N].
    double piezo_d() const { return std::sqrt(coupling_k2 * cap_c_s / spring_k_s); }

    /// Lossy capacitance C_S (1 - j tan delta) consistent with impedance_exact.
    Complex complex_capacitance() const {
        return cap_c_s * Complex(1.0, -loss_tan);
    }

    void validate() const {
        if (spring_k_s <= 0.0 || cap_c_s <= 0.0)
            throw std::invalid_argument("ActuatorParams: K_S and C_S must be positive");
        if (loss_tan < 0.0 || series_r_s < 0.0)
            throw std::invalid_argument("ActuatorParams: losses must be non-negative");
        if (coupling_k2 <= 0.0 || coupling_k2 >= 1.0)
            throw std::invalid_argument("ActuatorParams: k^2 must lie in (0, 1)");
    }
};

/// Exact internal impedance of the lossy capacitance,
///
///     Z_S = (tan delta - j) / (w C_S (1 + tan^2 delta)).
inline Complex actuator_impedance_exact(double omega, double cap_c_s, double loss_tan) {
    if (omega <= 0.0 || cap_c_s <= 0.0)
        throw std::invalid_argument("actuator_impedance_exact: omega and C_S must be positive");
    const double denom = omega * cap_c_s * (1.0 + loss_tan * loss_tan);
    return Complex(loss_tan, -1.0) / denom;
}

/// Two-element approximation Z_S ~ R_S + 1/(j w C_S).
inline Complex actuator_impedance_series(double omega, double series_r_s, double cap_c_s) {
    if (omega <= 0.0 || cap_c_s <= 0.0)
        throw std::invalid_argument("actuator_impedance_series: omega and C_S must be positive");
    return Complex(series_r_s, -1.0 / (omega * cap_c_s));
}

/// Effective spring constant of the actuator loaded by z_shunt.
struct EffectiveSpring {
    Complex k_eff;           ///< complex stiffness [N/m]
    double magnitude_ratio;  ///< |K_eff| / K_S
    double argument;         ///< arg K_eff in (-pi, pi]
};

/// Evaluate K_eff = K_S (1 + Z_S/Z) / (1 - k^2 + Z_S/Z).
///
/// The operating point Z = -Z_S / (1 - k^2) is a pole of this expression;
/// approaching it closer than a relative distance of 1e-9 throws pole_error.
inline EffectiveSpring effective_spring_constant(Complex z_shunt, Complex z_actuator,
                                                 double spring_k_s, double coupling_k2) {
    if (spring_k_s <= 0.0)
        throw std::invalid_argument("effective_spring_constant: K_S must be positive");
    if (coupling_k2 <= 0.0 || coupling_k2 >= 1.0)
        throw std::invalid_argument("effective_spring_constant: k^2 must lie in (0, 1)");
    if (std::abs(z_shunt) == 0.0)
        throw singularity_error("effective_spring_constant: shunt impedance is zero");
    const Complex ratio = z_actuator / z_shunt;
    const Complex den = (1.0 - coupling_k2) + ratio;
    if (std::abs(den) < 1e-9 * (1.0 + std::abs(ratio)))
        throw pole_error("effective_spring_constant: operating point at the stability pole");
    EffectiveSpring out;
    out.k_eff = spring_k_s * (1.0 + ratio) / den;
    out.magnitude_ratio = std::abs(out.k_eff) / spring_k_s;
    out.argument = std::arg(out.k_eff);
    return out;
}

/// First-order stiffness left over from a shunt mismatch.  With
/// Z = -Z_S + dZ near the matched point,
///
///     K_eff ~ K_S dZ / (k^2 Z_S),
///
/// so the normalized stiffness responds with gain 1/k^2 to the relative
/// impedance error dZ/Z_S.  Valid only for |dZ| << |Z_S|; the exact and the
/// approximate stiffness drift apart once |dZ/Z_S| approaches k^2.
inline Complex sensitivity_approx(Complex delta_z, Complex z_actuator,
                                  double spring_k_s, double coupling_k2) {
    if (coupling_k2 <= 0.0 || coupling_k2 >= 1.0)
        throw std::invalid_argument("sensitivity_approx: k^2 must lie in (0, 1)");
    if (std::abs(z_actuator) == 0.0)
        throw std::invalid_argument("sensitivity_approx: z_actuator must be nonzero");
    return spring_k_s * delta_z / (coupling_k2 * z_actuator);
}

/// Estimated suppression from the stiffness ratio alone,
///
///     dL ~ 10 log10 |K_eff / K_S|   [dB].
///
/// Good far from resonance while |K_eff|/K_S stays above the viscous floor.
inline double suppression_estimate(double magnitude_ratio) {
    if (magnitude_ratio <= 0.0)
        throw std::invalid_argument("suppression_estimate: ratio must be positive");
    return 10.0 * std::log10(magnitude_ratio);
}

/// Voltage across the actuator electrodes while a harmonic force phasor F
/// drives the stack loaded by z_shunt:
///
///     V = -d F / (C_S (1 + C / C_Sc)),   C = 1 / (j w z_shunt),
///
/// with C_Sc the lossy capacitance forming the divider with the shunt and the
/// real C_S scaling the coupling, so that F / elongation reproduces the
/// effective spring constant exactly; the lossless limit is the familiar
/// -d F / (C + C_S).
inline Complex shunt_voltage(Complex force, double omega, Complex z_shunt,
                             const ActuatorParams& act) {
    if (omega <= 0.0)
        throw std::invalid_argument("shunt_voltage: omega must be positive");
    if (std::abs(z_shunt) == 0.0)
        throw singularity_error("shunt_voltage: shunt impedance is zero");
    const Complex c_shunt = 1.0 / (Complex(0.0, omega) * z_shunt);
    const Complex den = act.cap_c_s * (1.0 + c_shunt / act.complex_capacitance());
    if (std::abs(den) < 1e-12 * act.cap_c_s)
        throw pole_error("shunt_voltage: total capacitance vanished");
    return -act.piezo_d() * force / den;
}

/// Elongation of the stack under a force and electrode voltage phasor,
/// dl = F/K_S + d V.
inline Complex elongation(Complex force, Complex voltage, const ActuatorParams& act) {
    return force / act.spring_k_s + act.piezo_d() * voltage;
}

} // namespace psd
