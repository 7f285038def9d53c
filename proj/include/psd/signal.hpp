// Excitation synthesis and spectral analysis.
//
// Spectral convention: one-sided spectrum with peak-amplitude scaling.  A
// cosine a*cos(2 pi f t + phi) at a bin-centered frequency shows up as the
// phasor a*exp(j phi) in that bin; the DC bin holds the mean value.  The
// Hann window is the periodic form 0.5*(1 - cos(2 pi n/N)) and its coherent
// gain of exactly 0.5 is compensated in the emitted bins.
//
// Noise is white Gaussian from std::mt19937_64 through an explicit
// Box-Muller transform, so a seed yields the same samples on any platform.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "psd/common.hpp"
#include "psd/errors.hpp"

namespace psd {

/// Uniformly sampled real signal.
struct TimeSeries {
    double sample_rate_hz = 0.0;
    std::vector<double> samples;
};

/// One-sided spectrum, bins.size() == padded_length/2 + 1.
struct SpectrumFrame {
    double sample_rate_hz = 0.0;
    std::size_t time_length = 0; ///< padded length the bins refer to
    std::vector<double> bin_frequencies_hz;
    std::vector<Complex> bins; ///< peak-amplitude phasors
};

struct Tone {
    double frequency_hz = 0.0;
    double amplitude = 0.0;
    double phase_rad = 0.0;
};

struct ExcitationSpec {
    std::vector<Tone> tones;
    double noise_rms = 0.0;
    std::uint64_t seed = 0;
};

namespace detail {

/// In-place radix-2 FFT; data.size() must be a power of two.
inline void fft_radix2(std::vector<Complex>& data, bool inverse) {
    const std::size_t n = data.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_radix2: length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j |= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * pi / static_cast<double>(len);
        const Complex wn(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex a = data[i + k];
                const Complex b = data[i + k + len / 2] * w;
                data[i + k] = a + b;
                data[i + k + len / 2] = a - b;
                w *= wn;
            }
        }
    }
    if (inverse)
        for (auto& v : data) v /= static_cast<double>(n);
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

/// Standard-normal deviates with a platform-independent layout.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * pi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * pi * u2);
    }

private:
    double uniform() {
        // 53-bit mantissa in [0, 1)
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace detail

enum class Window { none, hann };

/// Tones plus seeded white Gaussian noise; bit-identical for identical inputs.
inline TimeSeries synthesize(const ExcitationSpec& spec, double sample_rate_hz, double duration_s) {
    if (sample_rate_hz <= 0.0)
        throw std::invalid_argument("synthesize: sample rate must be positive");
    const auto n = static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    if (n < 2)
        throw std::invalid_argument("synthesize: need at least two samples");
    for (const auto& tone : spec.tones) {
        if (tone.frequency_hz >= 0.5 * sample_rate_hz)
            throw std::domain_error("synthesize: tone above Nyquist");
        if (tone.amplitude < 0.0)
            throw std::invalid_argument("synthesize: negative tone amplitude");
    }
    TimeSeries out;
    out.sample_rate_hz = sample_rate_hz;
    out.samples.assign(n, 0.0);
    const double dt = 1.0 / sample_rate_hz;
    for (const auto& tone : spec.tones) {
        const double w = 2.0 * pi * tone.frequency_hz;
        for (std::size_t i = 0; i < n; ++i)
            out.samples[i] += tone.amplitude * std::cos(w * static_cast<double>(i) * dt + tone.phase_rad);
    }
    if (spec.noise_rms > 0.0) {
        detail::GaussianSource gauss(spec.seed);
        for (std::size_t i = 0; i < n; ++i)
            out.samples[i] += spec.noise_rms * gauss();
    }
    return out;
}

/// One-sided spectrum with peak-amplitude scaling; series shorter than a
/// power of two are zero-padded.
inline SpectrumFrame spectrum(const TimeSeries& series, Window window = Window::none) {
    if (series.samples.empty() || series.sample_rate_hz <= 0.0)
        throw std::invalid_argument("spectrum: empty series");
    const std::size_t n = detail::next_pow2(series.samples.size());
    std::vector<Complex> data(n, Complex(0.0, 0.0));
    if (window == Window::none) {
        for (std::size_t i = 0; i < series.samples.size(); ++i)
            data[i] = series.samples[i];
    } else {
        const std::size_t m = series.samples.size();
        for (std::size_t i = 0; i < m; ++i) {
            const double w = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(m)));
            data[i] = series.samples[i] * w;
        }
    }
    detail::fft_radix2(data, false);

    SpectrumFrame frame;
    frame.sample_rate_hz = series.sample_rate_hz;
    frame.time_length = n;
    const std::size_t bins = n / 2 + 1;
    frame.bin_frequencies_hz.resize(bins);
    frame.bins.resize(bins);
    const double df = series.sample_rate_hz / static_cast<double>(n);
    const double gain = (window == Window::hann) ? 0.5 : 1.0;
    for (std::size_t k = 0; k < bins; ++k) {
        frame.bin_frequencies_hz[k] = df * static_cast<double>(k);
        const double scale = (k == 0 || k == n / 2) ? 1.0 : 2.0;
        frame.bins[k] = data[k] * (scale / (gain * static_cast<double>(n)));
    }
    return frame;
}

/// Rebuild the (padded-length) real series from a one-sided frame.
inline TimeSeries inverse_spectrum(const SpectrumFrame& frame) {
    const std::size_t n = frame.time_length;
    if (n == 0 || frame.bins.size() != n / 2 + 1)
        throw std::invalid_argument("inverse_spectrum: inconsistent frame");
    std::vector<Complex> data(n);
    for (std::size_t k = 0; k < frame.bins.size(); ++k) {
        const double scale = (k == 0 || k == n / 2) ? 1.0 : 2.0;
        data[k] = frame.bins[k] * (static_cast<double>(n) / scale);
        if (k > 0 && k < n / 2)
            data[n - k] = std::conj(data[k]);
    }
    detail::fft_radix2(data, true);
    TimeSeries out;
    out.sample_rate_hz = frame.sample_rate_hz;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = data[i].real();
    return out;
}

/// Nearest-bin lookup; ties between bins resolve to the lower bin.
struct BinLookup {
    Complex phasor;
    std::size_t bin = 0;
    double offset_bins = 0.0; ///< requested frequency minus bin center, in bins
};

inline BinLookup phasor_at(const SpectrumFrame& frame, double frequency_hz) {
    if (frame.bins.empty())
        throw std::invalid_argument("phasor_at: empty frame");
    const double df = frame.sample_rate_hz / static_cast<double>(frame.time_length);
    if (frequency_hz < 0.0 || frequency_hz > frame.bin_frequencies_hz.back())
        throw std::domain_error("phasor_at: frequency outside the frame range");
    const double pos = frequency_hz / df;
    auto bin = static_cast<std::size_t>(std::floor(pos + 0.5));
    if (pos + 0.5 == std::floor(pos + 0.5) && bin > 0) bin -= 1; // midpoint: lower bin
    if (bin >= frame.bins.size()) bin = frame.bins.size() - 1;
    BinLookup out;
    out.bin = bin;
    out.phasor = frame.bins[bin];
    out.offset_bins = pos - static_cast<double>(bin);
    return out;
}

} // namespace psd
