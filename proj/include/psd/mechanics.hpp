// One degree of freedom vibration isolation plant.
//
// A mass M rests on a spring K (possibly complex-valued when the spring is an
// electrically shunted actuator) with viscous damping B acting in parallel.
// The base moves with displacement u1, the mass with u2:
//
//     M u2'' + B u2' + K u2 = B u1' + K u1
//
// Transmissibility is the magnitude of the displacement transfer u2/u1.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "psd/common.hpp"
#include "psd/errors.hpp"

namespace psd {

/// Lumped plant parameters. spring_K may be complex (lossy or active spring).
struct MechanicalPlant {
    double mass_M = 0.0;    ///< suspended mass [kg]
    double damping_B = 0.0; ///< viscous damping [N s/m]
    Complex spring_K;       ///< spring constant [N/m]
};

/// Undamped natural frequency omega0 = sqrt(K/M) [rad/s].
inline double resonance_frequency(double spring_K, double mass_M) {
    if (spring_K <= 0.0 || mass_M <= 0.0)
        throw std::invalid_argument("resonance_frequency: K and M must be positive");
    return std::sqrt(spring_K / mass_M);
}

/// Damping coefficient from a quality factor: B = sqrt(K M) / Q [N s/m].
inline double damping_from_quality(double spring_K, double mass_M, double quality_Q) {
    if (spring_K <= 0.0 || mass_M <= 0.0 || quality_Q <= 0.0)
        throw std::invalid_argument("damping_from_quality: arguments must be positive");
    return std::sqrt(spring_K * mass_M) / quality_Q;
}

/// Closed-form transmissibility of the real-valued plant,
///
///     TR(w) = w0 sqrt( (w^2 + Q^2 w0^2) / (w^2 w0^2 + Q^2 (w0^2 - w^2)^2) ).
///
/// TR(0) = 1, TR(w0) = sqrt(1 + Q^2).
inline double transmissibility_real(double omega, double omega0, double quality_Q) {
    if (omega0 <= 0.0 || quality_Q <= 0.0)
        throw std::invalid_argument("transmissibility_real: omega0 and Q must be positive");
    if (omega < 0.0)
        throw std::invalid_argument("transmissibility_real: omega must be non-negative");
    if (omega == 0.0) return 1.0;
    const double w2 = omega * omega;
    const double w02 = omega0 * omega0;
    const double q2 = quality_Q * quality_Q;
    const double num = w2 + q2 * w02;
    const double den = w2 * w02 + q2 * (w02 - w2) * (w02 - w2);
    return omega0 * std::sqrt(num / den);
}

/// Complex displacement transfer u2/u1 at angular frequency omega,
///
///     T(w) = (j w B + K) / (K - M w^2 + j w B).
///
/// Valid for complex spring constants; throws when the denominator vanishes.
inline Complex transfer_complex(double omega, const MechanicalPlant& plant) {
    if (plant.mass_M <= 0.0 || plant.damping_B < 0.0)
        throw std::invalid_argument("transfer_complex: invalid plant parameters");
    const Complex jwb(0.0, omega * plant.damping_B);
    const Complex num = jwb + plant.spring_K;
    const Complex den = plant.spring_K - plant.mass_M * omega * omega + jwb;
    const double scale = std::abs(plant.spring_K) + plant.mass_M * omega * omega;
    if (std::abs(den) < 1e-14 * (scale > 0.0 ? scale : 1.0))
        throw singularity_error("transfer_complex: transfer denominator vanished at omega=" +
                                std::to_string(omega));
    return num / den;
}

/// Suppression level in dB between two transmissibility magnitudes,
/// positive when the shunt amplifies, negative when it isolates:
///
///     dL = 20 (log10 TR_shunted - log10 TR_reference).
inline double suppression_level(double tr_reference, double tr_shunted) {
    if (tr_reference <= 0.0 || tr_shunted <= 0.0)
        throw std::invalid_argument("suppression_level: transmissibilities must be positive");
    return 20.0 * (std::log10(tr_shunted) - std::log10(tr_reference));
}

/// One sampled point of a transmissibility sweep.
struct TransmissibilityPoint {
    double frequency_hz = 0.0;
    double tr_free_db = 0.0;    ///< shunt disconnected
    double tr_shunted_db = 0.0; ///< negative capacitor connected
    double delta_l_db = 0.0;    ///< tr_shunted_db - tr_free_db
};

} // namespace psd
