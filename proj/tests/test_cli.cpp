#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

std::string cli_path() {
#ifdef METRIQ_CLI_PATH
    return METRIQ_CLI_PATH;
#else
    const char* env = std::getenv("METRIQ_CLI_PATH");
    return env ? std::string(env) : std::string("./metriq");
#endif
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Scratch directory shared by all cases in this binary, removed at exit.
const fs::path& scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("metriq_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct ScratchCleaner {
    ~ScratchCleaner() {
        std::error_code ec;
        fs::remove_all(scratch(), ec);
    }
} cleaner;

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

fs::path harmonic_observable() {
    const fs::path p = scratch() / "harmonic.json";
    write_file(p, R"({"chart":"cartesian","terms":[[0.5,2,0],[0.5,0,2]]})");
    return p;
}

fs::path zero_observable() {
    const fs::path p = scratch() / "zero.json";
    write_file(p, R"({"chart":"cartesian","terms":[]})");
    return p;
}

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    static int counter = 0;
    const fs::path outf = scratch() / ("stdout_" + std::to_string(counter) + ".txt");
    const fs::path errf = scratch() / ("stderr_" + std::to_string(counter) + ".txt");
    ++counter;
    std::string cmd = env_prefix.empty() ? std::string() : env_prefix + " ";
    cmd += "\"" + cli_path() + "\" " + args + " > \"" + outf.string() + "\" 2> \"" +
           errf.string() + "\"";
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.code = (rc >= 0 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(outf);
    r.err = slurp(errf);
    return r;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string& header) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    header = line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        rows.push_back(row);
    }
    return rows;
}

} // namespace

TEST_CASE("verify core passes on defaults and reports its rows") {
    const RunResult r = run_cli("verify --suite core");
    INFO(r.out << r.err);
    CHECK(r.code == 0);
    CHECK(contains(r.out, "[PASS] core/resolution-of-unity"));
    CHECK(contains(r.out, "[PASS] core/kernel-closed-form"));
    CHECK(!contains(r.out, "[FAIL]"));
    CHECK(contains(r.out, "rows passed"));
}

TEST_CASE("verify core flags the under-truncation demo without crashing") {
    const RunResult r = run_cli("verify --suite core --fock-dim 8");
    INFO(r.out << r.err);
    CHECK(r.code == 1);
    CHECK(contains(r.out, "[FAIL] core/resolution-of-unity"));
    // Rows are still reported, not replaced by an exception dump.
    CHECK(contains(r.out, "rows passed"));
}

TEST_CASE("verify spin passes and writes a JSON report on request") {
    const fs::path rep = scratch() / "spin_report.json";
    const RunResult r = run_cli("verify --suite spin --out \"" + rep.string() + "\"");
    INFO(r.out << r.err);
    CHECK(r.code == 0);
    const Json j = Json::parse(slurp(rep));
    CHECK(j.at("suite") == "spin");
    CHECK(j.at("failures") == 0);
    CHECK(j.at("rows").is_array());
    CHECK(j.at("manifest").at("config_hash").get<std::string>().size() == 16);
}

TEST_CASE("unknown chart id exits 2 with a ChartMismatch payload") {
    const RunResult r = run_cli("metric --chart nope --points /nonexistent.csv");
    INFO(r.out << r.err);
    CHECK(r.code == 2);
    const Json j = Json::parse(r.out);
    CHECK(j.at("error") == "ChartMismatch");
}

TEST_CASE("a hopeless diffusion budget exits 3 with VarianceBlowup") {
    const fs::path obs = zero_observable();
    const RunResult r = run_cli("propagate --method wiener --observable \"" + obs.string() +
                                "\" --from 0,0 --to 0.1,0 --T 1 --nu 1e6");
    INFO(r.out << r.err);
    CHECK(r.code == 3);
    const Json j = Json::parse(r.out);
    CHECK(j.at("error") == "VarianceBlowup");
}

TEST_CASE("quantize emits the operator with admissibility and a manifest") {
    const fs::path obs = harmonic_observable();
    const fs::path out = scratch() / "quantized.json";
    const std::string args =
        "quantize --observable \"" + obs.string() + "\" --out \"" + out.string() + "\"";
    const RunResult r = run_cli(args);
    INFO(r.out << r.err);
    REQUIRE(r.code == 0);
    const std::string first = slurp(out);
    const Json j = Json::parse(first);
    CHECK(j.at("operator").at("dim") == 64);
    CHECK(j.at("admissibility").at("square_integrable_weighted") == true);
    CHECK(j.at("admissibility").contains("growth_class"));
    // Ground entry of the quantized harmonic observable sits near (1+0)/1.
    const double e00 = j.at("operator").at("entries").at(0).at(0).get<double>();
    CHECK(std::abs(e00 - 1.0) < 1e-3);
    CHECK(j.at("quadrature").at("radius_clipped") == true); // degree-2 wants 14 sigmas
    const std::string hash = j.at("manifest").at("config_hash").get<std::string>();
    CHECK(hash.size() == 16);
    CHECK(hash.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(j.at("manifest").at("seed") == 42);

    // Reruns of the same manifest are byte-identical.
    const RunResult r2 = run_cli(args);
    REQUIRE(r2.code == 0);
    CHECK(slurp(out) == first);
}

TEST_CASE("spectrum reports converged oscillator levels") {
    const fs::path obs = harmonic_observable();
    const RunResult r = run_cli("spectrum --observable \"" + obs.string() + "\" --levels 3");
    INFO(r.out << r.err);
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    const auto levels = j.at("levels").get<std::vector<double>>();
    REQUIRE(levels.size() == 3);
    CHECK(std::abs(levels[0] - 1.0) < 1e-4);
    CHECK(levels[1] > levels[0]);
    CHECK(j.at("convergence").get<double>() < 1e-3);
}

TEST_CASE("bohr-sommerfeld prints the oscillator ladder as CSV") {
    const fs::path obs = harmonic_observable();
    const RunResult r =
        run_cli("bohr-sommerfeld --observable \"" + obs.string() + "\" --levels 3");
    INFO(r.out << r.err);
    REQUIRE(r.code == 0);
    std::string header;
    const auto rows = parse_csv(r.out, header);
    CHECK(header == "n,E_n,area_residual");
    REQUIRE(rows.size() == 3);
    CHECK(std::abs(rows[0][1] - 0.5) < 1e-9);
    CHECK(std::abs(rows[2][1] - 2.5) < 1e-9);
    CHECK(std::abs(rows[1][2]) < 1e-7);
}

TEST_CASE("symbols writes a CSV grid with sidecar manifest and plot data") {
    const fs::path obs = harmonic_observable();
    const fs::path out = scratch() / "symbols.csv";
    const RunResult r = run_cli("symbols --observable \"" + obs.string() +
                                "\" --grid 3 --range 1 --emit-plot-data --out \"" +
                                out.string() + "\"");
    INFO(r.out << r.err);
    REQUIRE(r.code == 0);
    std::string header;
    const auto rows = parse_csv(slurp(out), header);
    CHECK(header == "p,q,lower,upper,gap");
    REQUIRE(rows.size() == 9);
    for (const auto& row : rows) CHECK(std::abs(row[4] - 1.0) < 1e-6); // gap = hbar
    const Json side = Json::parse(slurp(out.string() + ".manifest.json"));
    CHECK(side.at("config_hash").get<std::string>().size() == 16);
    CHECK(fs::exists(out.string() + ".dat"));
}

TEST_CASE("metric tabulates geometry rows in the requested chart") {
    const fs::path pts = scratch() / "points.csv";
    write_file(pts, "c1,c2\n0.0,0.0\n0.5,-0.25\n");
    const RunResult r = run_cli("metric --chart cartesian --points \"" + pts.string() + "\"");
    INFO(r.out << r.err);
    REQUIRE(r.code == 0);
    std::string header;
    const auto rows = parse_csv(r.out, header);
    CHECK(header == "c1,c2,g11,g12,g22,theta1,theta2,omega");
    REQUIRE(rows.size() == 2);
    CHECK(std::abs(rows[0][2] - 1.0) < 1e-6); // g11 = hbar/omega
    CHECK(std::abs(rows[0][4] - 1.0) < 1e-6); // g22 = hbar*omega
    CHECK(std::abs(rows[1][5] - 0.0) < 1e-6); // theta = (0, p)
    CHECK(std::abs(rows[1][6] - 0.5) < 1e-6);
    CHECK(std::abs(rows[1][7] - 1.0) < 1e-6); // omega density
}

TEST_CASE("spin-check reports roundoff-size defects") {
    const RunResult r = run_cli("spin-check --spin 0.5 --nodes 16");
    INFO(r.out << r.err);
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(j.at("casimir_defect").get<double>() < 1e-12);
    CHECK(j.at("resolution_defect").get<double>() < 1e-10);
    CHECK(j.at("metric_roundness").get<double>() < 1e-4);
}

TEST_CASE("METRIQ_SEED overrides the seed flag") {
    const fs::path obs = zero_observable();
    const std::string base = "propagate --method wiener --observable \"" + obs.string() +
                             "\" --from 0,0 --to 0.2,0.1 --T 0.3 --nu 8 --samples 2000 "
                             "--steps 32 --batches 4";
    const RunResult flag7 = run_cli(base + " --seed 7");
    const RunResult env7 = run_cli(base + " --seed 8", "METRIQ_SEED=7");
    const RunResult flag8 = run_cli(base + " --seed 8");
    REQUIRE(flag7.code == 0);
    REQUIRE(env7.code == 0);
    REQUIRE(flag8.code == 0);
    const Json a = Json::parse(flag7.out), b = Json::parse(env7.out),
               c = Json::parse(flag8.out);
    CHECK(a.at("re").get<double>() == b.at("re").get<double>());
    CHECK(a.at("im").get<double>() == b.at("im").get<double>());
    CHECK(a.at("re").get<double>() != c.at("re").get<double>());

    const RunResult bad = run_cli("spin-check --spin 0.5 --nodes 8", "METRIQ_SEED=abc");
    CHECK(bad.code == 2);
    CHECK(contains(bad.out, "InvalidParameter"));
}

TEST_CASE("config files merge under explicit flags") {
    const fs::path obs = harmonic_observable();
    const fs::path cfg = scratch() / "config.json";
    write_file(cfg, R"({"hbar": 0.5, "fock_dim": 32})");
    const std::string base =
        "bohr-sommerfeld --observable \"" + obs.string() + "\" --levels 1 --config ";

    const RunResult from_cfg = run_cli(base + "\"" + cfg.string() + "\"");
    REQUIRE(from_cfg.code == 0);
    std::string header;
    auto rows = parse_csv(from_cfg.out, header);
    REQUIRE(rows.size() == 1);
    CHECK(std::abs(rows[0][1] - 0.25) < 1e-9); // hbar 0.5 from the file

    const RunResult flag_wins = run_cli(base + "\"" + cfg.string() + "\" --hbar 1");
    REQUIRE(flag_wins.code == 0);
    rows = parse_csv(flag_wins.out, header);
    REQUIRE(rows.size() == 1);
    CHECK(std::abs(rows[0][1] - 0.5) < 1e-9); // explicit flag beats the file

    const RunResult missing = run_cli(base + "/no/such/config.json");
    CHECK(missing.code == 2);
}

TEST_CASE("usage errors exit 2 and the version flag exits 0") {
    CHECK(run_cli("frobnicate").code == 2);
    CHECK(run_cli("verify").code == 2); // missing required --suite
    const RunResult v = run_cli("--version");
    CHECK(v.code == 0);
    CHECK(contains(v.out, "metriq 1.0.0"));
}
