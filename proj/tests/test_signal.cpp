#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "psd/signal.hpp"

using namespace psd;

namespace {
constexpr double rate = 16000.0;
constexpr double epoch_s = 4096.0 / rate;
} // namespace

TEST_CASE("synthesis basics") {
    ExcitationSpec quiet;
    const TimeSeries zero = synthesize(quiet, rate, epoch_s);
    CHECK(zero.samples.size() == 4096);
    for (const double v : zero.samples) CHECK(v == 0.0);

    ExcitationSpec bad;
    bad.tones.push_back({9000.0, 1.0, 0.0});
    CHECK_THROWS_AS(synthesize(bad, rate, epoch_s), std::domain_error);
}

TEST_CASE("determinism of the noise generator") {
    ExcitationSpec spec;
    spec.noise_rms = 0.5;
    spec.seed = 424242;
    const TimeSeries a = synthesize(spec, rate, epoch_s);
    const TimeSeries b = synthesize(spec, rate, epoch_s);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);

    spec.seed = 424243;
    const TimeSeries c = synthesize(spec, rate, epoch_s);
    bool any_different = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        if (a.samples[i] != c.samples[i]) any_different = true;
    CHECK(any_different);
}

TEST_CASE("bin-centered tone recovers peak amplitude and phase") {
    ExcitationSpec spec;
    spec.tones.push_back({2000.0, 1.0, 0.7}); // bin 512 of 4096 at 16 kHz
    const TimeSeries ts = synthesize(spec, rate, epoch_s);
    const SpectrumFrame frame = spectrum(ts);
    REQUIRE(frame.bins.size() == 2049);
    const BinLookup look = phasor_at(frame, 2000.0);
    CHECK(look.bin == 512);
    CHECK(std::abs(look.phasor) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(std::arg(look.phasor) == doctest::Approx(0.7).epsilon(1e-6));
}

TEST_CASE("constant series and unit impulse") {
    TimeSeries constant{rate, std::vector<double>(1024, 3.25)};
    const SpectrumFrame cf = spectrum(constant);
    CHECK(std::abs(cf.bins[0] - Complex(3.25, 0.0)) < 1e-9);
    for (std::size_t k = 1; k < cf.bins.size(); ++k) CHECK(std::abs(cf.bins[k]) < 1e-9);

    TimeSeries impulse{rate, std::vector<double>(1024, 0.0)};
    impulse.samples[0] = 1.0;
    const SpectrumFrame imp = spectrum(impulse);
    for (std::size_t k = 1; k + 1 < imp.bins.size(); ++k)
        CHECK(std::abs(imp.bins[k]) == doctest::Approx(2.0 / 1024.0).epsilon(1e-9));
}

TEST_CASE("hann window compensation recovers a bin-centered tone") {
    ExcitationSpec spec;
    spec.tones.push_back({1500.0, 2.0, -0.3});
    const TimeSeries ts = synthesize(spec, rate, epoch_s);
    const SpectrumFrame frame = spectrum(ts, Window::hann);
    const BinLookup look = phasor_at(frame, 1500.0);
    CHECK(std::abs(look.phasor) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("round trip through the inverse transform") {
    ExcitationSpec spec;
    spec.tones.push_back({900.0, 1.0, 0.1});
    spec.tones.push_back({2200.0, 0.4, -1.2});
    spec.noise_rms = 0.3;
    spec.seed = 99;
    const TimeSeries ts = synthesize(spec, rate, epoch_s);
    const TimeSeries back = inverse_spectrum(spectrum(ts));
    REQUIRE(back.samples.size() == ts.samples.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < ts.samples.size(); ++i)
        worst = std::max(worst, std::abs(back.samples[i] - ts.samples[i]));
    CHECK(worst < 1e-9);
}

TEST_CASE("parseval consistency") {
    ExcitationSpec spec;
    spec.tones.push_back({1200.0, 0.8, 0.0});
    spec.noise_rms = 0.2;
    spec.seed = 5;
    const TimeSeries ts = synthesize(spec, rate, epoch_s);
    const SpectrumFrame frame = spectrum(ts);
    double time_energy = 0.0;
    for (const double v : ts.samples) time_energy += v * v;
    const std::size_t n = frame.time_length;
    double freq_energy = std::norm(frame.bins[0]) + std::norm(frame.bins[n / 2]);
    for (std::size_t k = 1; k < n / 2; ++k) freq_energy += 0.5 * std::norm(frame.bins[k]);
    freq_energy *= static_cast<double>(n);
    CHECK(std::abs(time_energy - freq_energy) / time_energy < 1e-9);
}

TEST_CASE("linearity of the transform") {
    ExcitationSpec sx;
    sx.tones.push_back({700.0, 1.0, 0.2});
    sx.noise_rms = 0.1;
    sx.seed = 1;
    ExcitationSpec sy;
    sy.tones.push_back({1900.0, 0.5, -0.4});
    sy.noise_rms = 0.2;
    sy.seed = 2;
    const TimeSeries x = synthesize(sx, rate, epoch_s);
    const TimeSeries y = synthesize(sy, rate, epoch_s);
    TimeSeries mix{rate, std::vector<double>(x.samples.size())};
    const double a = 2.5;
    const double b = -0.75;
    for (std::size_t i = 0; i < mix.samples.size(); ++i)
        mix.samples[i] = a * x.samples[i] + b * y.samples[i];
    const SpectrumFrame fx = spectrum(x);
    const SpectrumFrame fy = spectrum(y);
    const SpectrumFrame fm = spectrum(mix);
    for (std::size_t k = 0; k < fm.bins.size(); ++k)
        CHECK(std::abs(fm.bins[k] - (a * fx.bins[k] + b * fy.bins[k])) < 1e-9);
}

TEST_CASE("non power-of-two input is zero padded") {
    TimeSeries ts{rate, std::vector<double>(3000, 0.0)};
    ts.samples[100] = 1.0;
    const SpectrumFrame frame = spectrum(ts);
    CHECK(frame.time_length == 4096);
    CHECK(frame.bins.size() == 2049);
    const TimeSeries back = inverse_spectrum(frame);
    CHECK(back.samples.size() == 4096);
    CHECK(back.samples[100] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("phasor lookup conventions") {
    ExcitationSpec spec;
    spec.tones.push_back({2000.0, 1.0, 0.0});
    const SpectrumFrame frame = spectrum(synthesize(spec, rate, epoch_s));
    const double df = rate / 4096.0;

    // exact bin
    CHECK(phasor_at(frame, 512.0 * df).bin == 512);

    // midpoint resolves to the lower bin with offset 0.5
    const BinLookup mid = phasor_at(frame, 512.5 * df);
    CHECK(mid.bin == 512);
    CHECK(mid.offset_bins == doctest::Approx(0.5));

    CHECK_THROWS_AS(phasor_at(frame, 9000.0), std::domain_error);
}
