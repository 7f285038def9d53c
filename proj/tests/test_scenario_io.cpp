#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>
#include <string>

#include "psd/scenario_io.hpp"

using namespace psd;

namespace {

const std::string minimal =
    "[actuator]\n"
    "spring_k_s = 7.11e7\n"
    "cap_c_s = 6.602e-6\n"
    "loss_tan = 0.0963\n"
    "coupling_k2 = 0.064\n"
    "series_r_s = 1.150\n"
    "[plant]\n"
    "mass = 1.67\n"
    "quality = 11.3\n"
    "[network]\n"
    "kind = narrow\n"
    "r3 = 27.84\n"
    "c0 = 4.686e-6\n"
    "[negcap]\n"
    "r0 = 2410\n"
    "r1 = 6.93\n"
    "r2 = 2400\n";

Scenario parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in, "test");
}

} // namespace

TEST_CASE("minimal scenario gets documented defaults") {
    const Scenario sc = parse(minimal);
    CHECK(sc.actuator.spring_k_s == doctest::Approx(7.11e7));
    CHECK(sc.negcap.r2 == doctest::Approx(2400.0));
    CHECK(sc.epoch_length == 4096);
    CHECK(sc.sample_rate_hz == doctest::Approx(16000.0));
    CHECK(sc.duration_s == doctest::Approx(60.0));
    CHECK(!sc.control_enabled);
    CHECK(sc.acquire);
    CHECK(sc.tune_at_start == TuneObjective::none);
    CHECK(sc.converge_ratio == doctest::Approx(1e-2));
    // finite-gain op-amp by default, 105 dB / 100 Hz
    REQUIRE(sc.negcap.opamp.has_value());
    CHECK(sc.negcap.opamp->dc_gain_a0 == doctest::Approx(177827.941).epsilon(1e-6));
    CHECK(sc.negcap.opamp->pole_f1_hz == doctest::Approx(100.0));
    // plant damping derived from the quality factor
    CHECK(sc.plant.damping_B == doctest::Approx(964.3).epsilon(1e-3));
    CHECK(sc.plant.spring_K.real() == doctest::Approx(7.11e7));
}

TEST_CASE("shipped reference scenario parses to the fitted values") {
    const Scenario sc = load_scenario(std::string(PSD_SCENARIO_DIR) + "/narrow_2khz.ini");
    CHECK(sc.actuator.spring_k_s == doctest::Approx(7.11e7));
    CHECK(sc.actuator.cap_c_s == doctest::Approx(6.602e-6));
    CHECK(sc.actuator.coupling_k2 == doctest::Approx(0.064));
    CHECK(sc.negcap.network.r3 == doctest::Approx(27.84));
    CHECK(sc.negcap.network.c0 == doctest::Approx(4.686e-6));
    CHECK(sc.negcap.r2 == doctest::Approx(2400.0));
    CHECK(sc.tune_at_start == TuneObjective::tr);
    CHECK(sc.tune_f0_hz == doctest::Approx(2000.0));
}

TEST_CASE("all shipped scenarios load") {
    for (const char* name :
         {"narrow_2khz", "broad_band", "drift_static", "drift_adaptive", "fig8_tone_1",
          "fig8_tone_2", "fig8_tone_3", "fig8_tone_4", "fig8_tone_5"}) {
        CHECK_NOTHROW(load_scenario(std::string(PSD_SCENARIO_DIR) + "/" + name + ".ini"));
    }
}

TEST_CASE("unknown keys and sections are rejected with position") {
    try {
        parse(minimal + "[negcap]\nbogus_key = 1\n");
        FAIL("expected scenario_error");
    } catch (const scenario_error& e) {
        const std::string what = e.what();
        CHECK(what.find("bogus_key") != std::string::npos);
        CHECK(what.find("test:19") != std::string::npos);
    }
    CHECK_THROWS_AS(parse("[warp_drive]\nx = 1\n" + minimal), scenario_error);
}

TEST_CASE("malformed lines are rejected") {
    CHECK_THROWS_AS(parse(minimal + "[run]\nduration\n"), scenario_error);
    CHECK_THROWS_AS(parse(minimal + "[run]\nduration = ten\n"), scenario_error);
    CHECK_THROWS_AS(parse("spring_k_s = 1\n"), scenario_error); // key before any section
    CHECK_THROWS_AS(parse(minimal + "[run\nduration = 1\n"), scenario_error);
}

TEST_CASE("tones and drift parse") {
    const Scenario sc = parse(minimal +
                              "[excitation]\n"
                              "tone = 2000:1.5:0.25\n"
                              "tone = 900:0.5\n"
                              "noise_rms = 0.01\n"
                              "[drift]\n"
                              "target = cap_c_s\n"
                              "shape = exponential\n"
                              "change = 0.02\n"
                              "start = 10\n"
                              "span = 120\n");
    REQUIRE(sc.excitation.tones.size() == 2);
    CHECK(sc.excitation.tones[0].frequency_hz == doctest::Approx(2000.0));
    CHECK(sc.excitation.tones[0].amplitude == doctest::Approx(1.5));
    CHECK(sc.excitation.tones[0].phase_rad == doctest::Approx(0.25));
    CHECK(sc.excitation.tones[1].phase_rad == doctest::Approx(0.0));
    CHECK(sc.excitation.noise_rms == doctest::Approx(0.01));
    CHECK(sc.drift.target == DriftProfile::Target::cap_c_s);
    CHECK(sc.drift.shape == DriftProfile::Shape::exponential);

    CHECK_THROWS_AS(parse(minimal + "[excitation]\ntone = 2000\n"), scenario_error);
    CHECK_THROWS_AS(parse(minimal + "[drift]\ntarget = sideways\n"), scenario_error);
}

TEST_CASE("threshold overrides must come as a pair") {
    CHECK_THROWS_AS(parse(minimal + "[control]\nphi0 = 0.5\n"), scenario_error);
    const Scenario sc = parse(minimal + "[control]\nphi0 = 0.5\nphi1 = -0.25\n");
    CHECK(sc.have_threshold_override);
    CHECK(sc.phi0_override == doctest::Approx(0.5));
    CHECK(sc.phi1_override == doctest::Approx(-0.25));
}

TEST_CASE("ideal op-amp and seed plumbing") {
    const Scenario sc = parse(minimal + "[opamp]\nideal = true\n[run]\nseed = 99\n");
    CHECK(!sc.negcap.opamp.has_value());
    CHECK(sc.seed == 99);
    CHECK(sc.excitation.seed == 99);
}

TEST_CASE("missing plant data is an error") {
    const std::string no_plant =
        "[actuator]\n"
        "spring_k_s = 7.11e7\n"
        "cap_c_s = 6.602e-6\n"
        "coupling_k2 = 0.064\n"
        "[network]\n"
        "kind = narrow\n"
        "r3 = 27.84\n"
        "c0 = 4.686e-6\n"
        "[negcap]\n"
        "r0 = 2410\n"
        "r1 = 6.93\n"
        "r2 = 2400\n";
    CHECK_THROWS_AS(parse(no_plant), scenario_error);
}
