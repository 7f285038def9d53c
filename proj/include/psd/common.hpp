// Small shared helpers: complex alias, angle wrapping, decibel conversions.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace psd {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Wrap an angle into (-pi, pi].
inline double wrap_phase(double phi) {
    double w = std::remainder(phi, 2.0 * pi);
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

/// Amplitude ratio to decibels.
inline double to_db(double ratio) { return 20.0 * std::log10(ratio); }

/// Decibels to amplitude ratio.
inline double from_db(double db) { return std::pow(10.0, db / 20.0); }

inline double rad_per_s(double hz) { return 2.0 * pi * hz; }
inline double hz_of(double omega) { return omega / (2.0 * pi); }

} // namespace psd
