#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const std::string cli = PSD_CLI_PATH;
const std::string scenarios = PSD_SCENARIO_DIR;

int run_cli(const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("psdlab_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// short open-loop scenario so the adapt path stays fast
void write_quick_scenario(const fs::path& p) {
    std::ofstream out(p);
    out << "[actuator]\n"
           "spring_k_s = 7.11e7\ncap_c_s = 6.602e-6\nloss_tan = 0.0963\n"
           "coupling_k2 = 0.064\nseries_r_s = 1.150\n"
           "[plant]\nmass = 1.67\nquality = 11.3\n"
           "[network]\nkind = narrow\nr3 = 27.84\nc0 = 4.686e-6\n"
           "[negcap]\nr0 = 2410\nr1 = 6.93\nr2 = 2400\n"
           "[excitation]\ntone = 2000:1.0:0\nnoise_rms = 0.002\n"
           "[run]\nduration = 1\nseed = 4242\n";
}

} // namespace

TEST_CASE("sweep writes the documented schema and is deterministic") {
    const fs::path dir = fresh_dir("sweep");
    const std::string cmd = "sweep --scenario " + scenarios + "/narrow_2khz.ini --out " +
                            dir.string() + " --quiet";
    REQUIRE(run_cli(cmd) == 0);
    const fs::path csv = dir / "tr_sweep.csv";
    REQUIRE(fs::exists(csv));

    const std::string text = slurp(csv);
    CHECK(text.rfind("freq_hz,tr_db_free,tr_db_shunted,delta_l_tr_db\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos); // LF only

    // golden first data row: the free column is pure plant physics
    std::istringstream lines(text);
    std::string header;
    std::string first;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(first.rfind("550,", 0) == 0);

    const std::string again = slurp(csv);
    const fs::path dir2 = fresh_dir("sweep2");
    REQUIRE(run_cli("sweep --scenario " + scenarios + "/narrow_2khz.ini --out " + dir2.string() +
                    " --quiet") == 0);
    CHECK(slurp(dir2 / "tr_sweep.csv") == again);
}

TEST_CASE("adapt writes timeline and spectra") {
    const fs::path dir = fresh_dir("adapt");
    const fs::path scen = dir / "quick.ini";
    write_quick_scenario(scen);
    REQUIRE(run_cli("adapt --scenario " + scen.string() + " --out " + dir.string() + " --quiet") == 0);

    const std::string timeline = slurp(dir / "timeline.csv");
    CHECK(timeline.rfind("time_s,r0_ohm,r1_ohm,k_eff_ratio,arg_k_eff_rad,delta_l_tr_db,"
                         "dominant_hz,converged\n", 0) == 0);
    const std::string spectra = slurp(dir / "spectra.csv");
    CHECK(spectra.rfind("epoch,time_s,freq_hz,excitation_m,force_n,voltage_v\n", 0) == 0);

    // drift is an alias over the same outputs
    const fs::path dir2 = fresh_dir("drift_alias");
    REQUIRE(run_cli("drift --scenario " + scen.string() + " --out " + dir2.string() + " --quiet") == 0);
    CHECK(slurp(dir2 / "timeline.csv") == timeline);
}

TEST_CASE("seed override changes the noise, quiet run stays reproducible") {
    const fs::path dir = fresh_dir("seed");
    const fs::path scen = dir / "quick.ini";
    write_quick_scenario(scen);
    REQUIRE(run_cli("adapt --scenario " + scen.string() + " --out " + dir.string() + " --quiet") == 0);
    const std::string base = slurp(dir / "spectra.csv");
    REQUIRE(run_cli("adapt --scenario " + scen.string() + " --out " + dir.string() +
                    " --seed 777 --quiet") == 0);
    CHECK(slurp(dir / "spectra.csv") != base);
}

TEST_CASE("tune and calibrate run clean") {
    const fs::path dir = fresh_dir("tune");
    CHECK(run_cli("tune --scenario " + scenarios + "/narrow_2khz.ini --out " + dir.string() +
                  " --quiet") == 0);
    CHECK(run_cli("calibrate --scenario " + scenarios + "/narrow_2khz.ini --out " + dir.string() +
                  " --quiet") == 0);
}

TEST_CASE("scenario problems exit with status 2") {
    const fs::path dir = fresh_dir("bad");
    const fs::path bad = dir / "bad.ini";
    std::ofstream(bad) << "[actuator]\nnot_a_key = 1\n";
    CHECK(run_cli("sweep --scenario " + bad.string() + " --out " + dir.string()) == 2);
    CHECK(run_cli("sweep --scenario " + dir.string() + "/missing.ini --out " + dir.string()) == 2);
}

TEST_CASE("9 significant digit formatting") {
    const fs::path dir = fresh_dir("fmt");
    const fs::path scen = dir / "quick.ini";
    write_quick_scenario(scen);
    REQUIRE(run_cli("adapt --scenario " + scen.string() + " --out " + dir.string() + " --quiet") == 0);
    std::ifstream in(dir / "timeline.csv");
    std::string header;
    std::string row;
    std::getline(in, header);
    REQUIRE(std::getline(in, row));
    // no field carries more than 9 significant digits
    std::istringstream fields(row);
    std::string field;
    while (std::getline(fields, field, ',')) {
        std::string mantissa = field.substr(0, field.find('e'));
        std::string digits;
        for (const char c : mantissa)
            if (c >= '0' && c <= '9') digits += c;
        const auto first_sig = digits.find_first_not_of('0');
        const std::size_t significant =
            first_sig == std::string::npos ? 0 : digits.size() - first_sig;
        CHECK(significant <= 9);
    }
}
