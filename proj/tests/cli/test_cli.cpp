// End-to-end tests of the command-line tool: exit-code contract, file
// outputs, golden demo table, determinism.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "revkin/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = REVKIN_CLI_PATH;
const fs::path kDemoDir = REVKIN_DEMO_DIR;

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("revkin_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run(const std::string& args) {
    const fs::path out = scratch_dir() / "stdout.txt";
    const fs::path err = scratch_dir() / "stderr.txt";
    const std::string cmd =
        kCli + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = revkin::io::read_text(out);
    result.err = revkin::io::read_text(err);
    return result;
}

std::string demo_config() { return (kDemoDir / "config.json").string(); }

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream stream(path);
    stream << text;
}

}  // namespace

TEST_CASE("simulate reproduces the golden demo table") {
    const fs::path out = scratch_dir() / "tacs.csv";
    const RunResult r =
        run("simulate --config " + demo_config() + " --grid log:0.25,60,16 --out " + out.string());
    CHECK(r.exit_code == 0);
    const std::string fresh = revkin::io::read_text(out);
    const std::string golden = revkin::io::read_text(kDemoDir / "tacs_golden.csv");
    CHECK(fresh == golden);
    CHECK(fs::exists(out.string() + ".manifest.json"));
    const auto manifest = nlohmann::json::parse(revkin::io::read_text(out.string() + ".manifest.json"));
    CHECK(manifest["command"] == "simulate");
    CHECK(manifest.contains("wall_time_s"));
}

TEST_CASE("simulate rejects bad grids and missing whole blood") {
    const fs::path out = scratch_dir() / "x.csv";
    CHECK(run("simulate --config " + demo_config() + " --grid list:0,1,2 --out " + out.string())
              .exit_code == 2);
    CHECK(run("simulate --config " + demo_config() + " --grid log:0.25,60 --out " + out.string())
              .exit_code == 2);
    const RunResult vb = run("simulate --config " + demo_config() +
                             " --grid log:0.25,60,16 --vb 0.05 --out " + out.string());
    CHECK(vb.exit_code == 2);
    CHECK(vb.err.find("MissingWholeBlood") != std::string::npos);
}

TEST_CASE("simulate rejects schema violations") {
    const fs::path bad = scratch_dir() / "bad.json";
    write_file(bad, R"({"regions": []})");
    CHECK(run("simulate --config " + bad.string() + " --grid log:1,10,4 --out " +
              (scratch_dir() / "y.csv").string())
              .exit_code == 2);
}

TEST_CASE("fit on a simulated table converges and resolves the sample bound") {
    const fs::path tacs = scratch_dir() / "fit_tacs.csv";
    REQUIRE(run("simulate --config " + demo_config() + " --grid log:0.25,60,16 --out " +
                tacs.string())
                .exit_code == 0);

    const fs::path result = scratch_dir() / "fit.json";
    const RunResult r = run("fit --tacs " + tacs.string() + " --p 4 --warm " + demo_config() +
                            " --starts 1 --seed 1 --iters 400 --out " + result.string());
    CHECK(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(revkin::io::read_text(result));
    CHECK(doc["converged"] == true);
    // Noiseless self-consistent data: sse at the certificate level.
    double sum_y2 = 0.0;
    const revkin::TacTable table = revkin::io::read_tac_table(tacs);
    for (const auto& curve : table.curves) {
        for (double v : curve.values) sum_y2 += v * v;
    }
    CHECK(doc["sse"].get<double>() <= 1e-16 * sum_y2);
    CHECK(fs::exists(scratch_dir() / "fit.trace.csv"));
    CHECK(fs::exists(scratch_dir() / "fit.curves.csv"));

    // One sample short of the bound: exit 4.
    const fs::path short_tacs = scratch_dir() / "short.csv";
    REQUIRE(run("simulate --config " + demo_config() + " --grid log:0.25,60,15 --out " +
                short_tacs.string())
                .exit_code == 0);
    CHECK(run("fit --tacs " + short_tacs.string() + " --p 4 --out " +
              (scratch_dir() / "short_fit.json").string())
              .exit_code == 4);
}

TEST_CASE("fit with whole-blood samples reports the resolved scale") {
    const revkin::Configuration config =
        revkin::io::read_configuration(kDemoDir / "config.json");
    const revkin::AttenuationBiexp f(0.6, -0.05, -0.8);
    std::vector<revkin::WbSample> wb;
    for (double s : {1.0, 5.0, 20.0, 50.0}) {
        wb.push_back({s, revkin::eval_cp(config.input(), s) / revkin::eval_attenuation(f, s)});
    }
    const fs::path wb_path = scratch_dir() / "wb.csv";
    revkin::io::write_wb_samples(wb, wb_path);

    const fs::path tacs = scratch_dir() / "scale_tacs.csv";
    REQUIRE(run("simulate --config " + demo_config() + " --grid log:0.25,60,16 --out " +
                tacs.string())
                .exit_code == 0);
    const fs::path result = scratch_dir() / "scale_fit.json";
    const RunResult r = run("fit --tacs " + tacs.string() + " --p 4 --warm " + demo_config() +
                            " --starts 1 --iters 300 --cwb " + wb_path.string() + " --out " +
                            result.string());
    CHECK(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(revkin::io::read_text(result));
    REQUIRE(doc.contains("scale"));
    CHECK(std::fabs(doc["scale"]["zeta"].get<double>() - 1.0) <= 1e-6);
    CHECK(std::fabs(doc["scale"]["f"]["a"].get<double>() - 0.6) <= 1e-5);
}

TEST_CASE("fit is byte-deterministic for a fixed seed") {
    const fs::path tacs = scratch_dir() / "det_tacs.csv";
    REQUIRE(run("simulate --config " + demo_config() + " --grid log:0.25,60,16 --out " +
                tacs.string())
                .exit_code == 0);
    const fs::path a = scratch_dir() / "det_a.json";
    const fs::path b = scratch_dir() / "det_b.json";
    const std::string base =
        "fit --tacs " + tacs.string() + " --p 4 --starts 1 --seed 7 --iters 30 --out ";
    const int code_a = run(base + a.string()).exit_code;
    const int code_b = run(base + b.string()).exit_code;
    CHECK(code_a == code_b);
    CHECK(revkin::io::read_text(a) == revkin::io::read_text(b));
}

TEST_CASE("check gates on the witness condition") {
    CHECK(run("check --config " + demo_config() + " --out " +
              (scratch_dir() / "check.json").string())
              .exit_code == 0);

    // Two regions cannot provide three witnesses.
    const fs::path two = scratch_dir() / "two.json";
    write_file(two, R"({
      "input": {"terms": [{"lambda": 1.0, "mu": -0.1}, {"lambda": 0.5, "mu": -0.9}]},
      "regions": [
        {"id": "a", "K1": 0.5, "k2": 0.4, "k3": 0.3, "k4": 0.1},
        {"id": "b", "K1": 0.6, "k2": 0.5, "k3": 0.2, "k4": 0.05}
      ]})");
    CHECK(run("check --config " + two.string() + " --out " +
              (scratch_dir() / "check2.json").string())
              .exit_code == 1);

    const fs::path dup = scratch_dir() / "dup.json";
    write_file(dup, R"({
      "input": {"terms": [{"lambda": 1.0, "mu": -0.1}]},
      "regions": [
        {"id": "a", "K1": 0.5, "k2": 0.4, "k3": 0.3, "k4": 0.1},
        {"id": "a", "K1": 0.6, "k2": 0.5, "k3": 0.2, "k4": 0.05}
      ]})");
    CHECK(run("check --config " + dup.string() + " --out " +
              (scratch_dir() / "check3.json").string())
              .exit_code == 2);
}

TEST_CASE("oracle-compare judges deviation against the gate") {
    CHECK(run("oracle-compare --config " + demo_config() +
              " --grid log:0.25,60,16 --step 1e-3 --out " +
              (scratch_dir() / "oracle.csv").string())
              .exit_code == 0);
    // A very coarse step blows the 1e-6 gate (error scales like step^4).
    CHECK(run("oracle-compare --config " + demo_config() +
              " --grid log:0.25,60,16 --step 0.5 --out " +
              (scratch_dir() / "oracle_coarse.csv").string())
              .exit_code == 1);

    // Zero uptake: deviations are identically zero.
    const fs::path zero = scratch_dir() / "zero.json";
    write_file(zero, R"({
      "input": {"terms": [{"lambda": 1.0, "mu": -0.1}]},
      "regions": [{"id": "a", "K1": 0.0, "k2": 0.4, "k3": 0.3, "k4": 0.1}]})");
    const RunResult r = run("oracle-compare --config " + zero.string() +
                            " --grid log:1,10,5 --step 1e-2 --out " +
                            (scratch_dir() / "oracle_zero.csv").string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("deviation 0") != std::string::npos);
}

TEST_CASE("verify smoke run writes its report and histogram") {
    const fs::path out = scratch_dir() / "verify.json";
    const RunResult r = run("verify --config " + demo_config() +
                            " --grid log:0.25,60,16 --p 4 --starts 2 --iters 40 --seed 0 --out " +
                            out.string());
    // Few short starts rarely converge; the claim then holds vacuously.
    CHECK(r.exit_code == 0);
    const auto doc = nlohmann::json::parse(revkin::io::read_text(out));
    CHECK(doc["n_starts"] == 2);
    CHECK(doc["hypothesis_ok"] == true);
    CHECK(fs::exists(scratch_dir() / "verify.zeta_hist.csv"));
    CHECK(run("verify --config " + demo_config() +
              " --grid log:0.25,60,8 --p 4 --starts 1 --out " +
              (scratch_dir() / "verify_short.json").string())
              .exit_code == 4);
}

TEST_CASE("degenerate model parameters are model errors") {
    const fs::path degenerate = scratch_dir() / "degenerate.json";
    write_file(degenerate, R"({
      "input": {"terms": [{"lambda": 1.0, "mu": -0.1}]},
      "regions": [{"id": "a", "K1": 1.0, "k2": 2.0, "k3": 0.0, "k4": 2.0}]})");
    const RunResult r = run("simulate --config " + degenerate.string() +
                            " --grid log:1,10,4 --out " + (scratch_dir() / "deg.csv").string());
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("degenerate") != std::string::npos);
}

TEST_CASE("unknown flags and missing subcommands are input errors") {
    CHECK(run("simulate --config nope.json --grid log:1,2,3").exit_code == 2);  // missing --out
    CHECK(run("frobnicate").exit_code == 2);
}
