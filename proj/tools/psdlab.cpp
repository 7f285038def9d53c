// psdlab: scenario runner for the shunt-damping laboratory.
//
// Subcommands:
//   sweep      frozen-circuit transmissibility sweep  -> tr_sweep.csv
//   tune       resistor tuning + matching report      -> stdout
//   adapt      closed-loop epoch simulation           -> timeline.csv, spectra.csv
//   drift      alias of adapt for drift experiments   -> timeline.csv, spectra.csv
//   calibrate  threshold calibration report           -> stdout

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "psd/csv.hpp"
#include "psd/scenario_io.hpp"
#include "psd/simulator.hpp"

namespace {

struct Options {
    std::string scenario_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool have_seed = false;
    bool quiet = false;
};

psd::Scenario load(const Options& opt) {
    psd::Scenario sc = psd::load_scenario(opt.scenario_path);
    if (opt.have_seed) {
        sc.seed = opt.seed;
        sc.excitation.seed = opt.seed;
    }
    return sc;
}

std::string out_path(const Options& opt, const std::string& file) {
    std::filesystem::create_directories(opt.out_dir);
    return (std::filesystem::path(opt.out_dir) / file).string();
}

void info(const Options& opt, const std::string& msg) {
    if (!opt.quiet) std::cout << msg << "\n";
}

int run_sweep(const Options& opt) {
    psd::Scenario sc = load(opt);
    psd::tune_scenario(sc);
    if (sc.sweep_hi_hz > 3000.0)
        std::cerr << "warning: sweep extends beyond the 3 kHz model fit range\n";
    std::vector<double> grid;
    for (double f = sc.sweep_lo_hz; f <= sc.sweep_hi_hz + 1e-9; f += sc.sweep_step_hz)
        grid.push_back(f);
    const auto points = psd::transmissibility_sweep(sc, grid);
    std::vector<std::vector<double>> rows;
    rows.reserve(points.size());
    for (const auto& p : points)
        rows.push_back({p.frequency_hz, p.tr_free_db, p.tr_shunted_db, p.delta_l_db});
    const std::string path = out_path(opt, "tr_sweep.csv");
    psd::emit_csv(rows, {{"freq_hz", "tr_db_free", "tr_db_shunted", "delta_l_tr_db"}}, path);
    info(opt, "wrote " + path + " (" + std::to_string(rows.size()) + " rows)");
    return 0;
}

int run_tune(const Options& opt) {
    psd::Scenario sc = load(opt);
    psd::OracleResult result;
    const char* what = "";
    switch (sc.tune_at_start) {
    case psd::TuneObjective::band:
        result = psd::tune_band(sc, sc.band_lo_hz, sc.band_hi_hz);
        what = "band minimax delta_l_tr_db";
        break;
    case psd::TuneObjective::tr:
        result = psd::tune_transmissibility(sc, sc.tune_f0_hz);
        what = "|u2/u1| at f0";
        break;
    default:
        result = psd::tune_optimal_oracle(sc, psd::rad_per_s(sc.tune_f0_hz));
        what = "|K_eff|/K_S at f0";
        break;
    }
    sc.negcap.r0 = result.r0_min;
    sc.negcap.r1 = result.r1_min;
    const double omega0 = psd::rad_per_s(sc.tune_f0_hz);
    const psd::Complex z = psd::negcap_impedance(sc.negcap, omega0);
    const psd::Complex zs = psd::actuator_impedance_exact(omega0, sc.actuator.cap_c_s, sc.actuator.loss_tan);
    const psd::Complex mismatch = psd::matching_error(z, zs);
    std::printf("tuned r0 = %.9g ohm\n", result.r0_min);
    std::printf("tuned r1 = %.9g ohm\n", result.r1_min);
    std::printf("objective (%s) = %.9g\n", what, result.k_eff_ratio);
    std::printf("matching error at f0: |dZ/Z_S| = %.9g, arg = %.9g rad\n",
                std::abs(mismatch), std::arg(mismatch));
    if (result.boundary_warning)
        std::cerr << "warning: search hit the initial grid boundary and was widened\n";
    return 0;
}

int run_adapt(const Options& opt) {
    psd::Scenario sc = load(opt);
    const psd::AdaptiveRun run = psd::run_adaptive_scenario(sc);
    std::vector<std::vector<double>> rows;
    rows.reserve(run.log.rows.size());
    for (const auto& r : run.log.rows)
        rows.push_back({r.time_s, r.r0, r.r1, r.k_eff_ratio, r.arg_k_eff, r.delta_l_tr_db,
                        r.dominant_hz, r.converged ? 1.0 : 0.0});
    const std::string timeline = out_path(opt, "timeline.csv");
    psd::emit_csv(rows,
                  {{"time_s", "r0_ohm", "r1_ohm", "k_eff_ratio", "arg_k_eff_rad",
                    "delta_l_tr_db", "dominant_hz", "converged"}},
                  timeline);

    std::vector<std::vector<double>> spectra;
    for (const auto* snap : {&run.first_epoch, &run.last_epoch}) {
        for (std::size_t k = 0; k < snap->force.bins.size(); ++k)
            spectra.push_back({static_cast<double>(snap->epoch), snap->time_s,
                               snap->force.bin_frequencies_hz[k],
                               std::abs(snap->excitation.bins[k]),
                               std::abs(snap->force.bins[k]),
                               std::abs(snap->voltage.bins[k])});
    }
    const std::string spectra_path = out_path(opt, "spectra.csv");
    psd::emit_csv(spectra,
                  {{"epoch", "time_s", "freq_hz", "excitation_m", "force_n", "voltage_v"}},
                  spectra_path);
    info(opt, "wrote " + timeline + " and " + spectra_path);
    info(opt, "final r0 = " + psd::format_csv_value(run.final_r0) +
                  " ohm, r1 = " + psd::format_csv_value(run.final_r1) + " ohm");
    return 0;
}

int run_calibrate(const Options& opt) {
    psd::Scenario sc = load(opt);
    psd::tune_scenario(sc);
    const double omega = psd::rad_per_s(sc.tune_f0_hz);
    const auto probe = [&](double r0, double r1) {
        psd::NegCapParams circuit = sc.negcap;
        circuit.r0 = r0;
        circuit.r1 = r1;
        return psd::steady_state_response(omega, sc.actuator, circuit, sc.plant).spring.argument;
    };
    const psd::Thresholds th = psd::calibrate_thresholds(probe, sc.negcap.r0, sc.negcap.r1, 0.02);
    std::printf("phi0 = %.9g rad\n", th.phi0);
    std::printf("phi1 = %.9g rad\n", th.phi1);
    std::printf("center r0 = %.9g ohm, r1 = %.9g ohm, f0 = %.9g Hz\n",
                sc.negcap.r0, sc.negcap.r1, sc.tune_f0_hz);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"piezoelectric shunt damping laboratory"};
    app.require_subcommand(1);

    Options opt;
    std::string mode;
    for (const char* name : {"sweep", "tune", "adapt", "drift", "calibrate"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--scenario", opt.scenario_path, "scenario file")->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", opt.seed, "override the scenario seed")
            ->each([&](const std::string&) { opt.have_seed = true; });
        sub->add_flag("--quiet", opt.quiet, "suppress progress output");
        sub->callback([&mode, name] { mode = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (mode == "sweep") return run_sweep(opt);
        if (mode == "tune") return run_tune(opt);
        if (mode == "adapt" || mode == "drift") return run_adapt(opt);
        return run_calibrate(opt);
    } catch (const psd::scenario_error& e) {
        std::cerr << "scenario error: " << e.what() << "\n";
        return 2;
    } catch (const psd::pole_error& e) {
        std::cerr << "instability: " << e.what() << "\n";
        return 3;
    } catch (const psd::instability_error& e) {
        std::cerr << "instability: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
