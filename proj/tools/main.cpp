// Command-line front end: simulate tissue curves, run joint fits, check the
// identifiability hypotheses, run the uniqueness-verification experiment and
// compare the closed form against the RK4 reference.
//
// Exit codes: 0 ok, 1 check failed, 2 input error, 3 model error,
// 4 insufficient samples, 5 no convergence.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "revkin/estimation.hpp"
#include "revkin/identifiability.hpp"
#include "revkin/io.hpp"
#include "revkin/model.hpp"
#include "revkin/oracle.hpp"
#include "revkin/polyexp.hpp"
#include "revkin/version.hpp"

namespace {

using nlohmann::ordered_json;
using namespace revkin;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitModel = 3;
constexpr int kExitSamples = 4;
constexpr int kExitConvergence = 5;

std::vector<double> parse_grid(const std::string& spec) {
    const auto bad = [&](const std::string& why) {
        throw ValidationError("grid spec \"" + spec + "\": " + why);
    };
    const auto split = [](const std::string& text) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream stream(text);
        while (std::getline(stream, item, ',')) out.push_back(item);
        return out;
    };
    const auto to_double = [&](const std::string& text) -> double {
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) bad("bad number \"" + text + "\"");
            return v;
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            bad("bad number \"" + text + "\"");
            return 0.0;
        }
    };
    if (spec.rfind("log:", 0) == 0) {
        const auto parts = split(spec.substr(4));
        if (parts.size() != 3) bad("expected log:start,end,count");
        const double start = to_double(parts[0]);
        const double end = to_double(parts[1]);
        const long count = std::lround(to_double(parts[2]));
        if (!(start > 0.0)) bad("start must be positive");
        if (!(end > start)) bad("end must exceed start");
        if (count < 2) bad("count must be at least 2");
        std::vector<double> grid;
        grid.reserve(count);
        const double lo = std::log(start);
        const double hi = std::log(end);
        for (long i = 0; i < count; ++i) {
            grid.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                             static_cast<double>(count - 1)));
        }
        return grid;
    }
    if (spec.rfind("list:", 0) == 0) {
        const auto parts = split(spec.substr(5));
        if (parts.empty()) bad("expected list:t1,t2,...");
        std::vector<double> grid;
        double prev = 0.0;
        for (const auto& part : parts) {
            const double t = to_double(part);
            if (!(t > prev)) bad("times must be strictly increasing and positive");
            grid.push_back(t);
            prev = t;
        }
        return grid;
    }
    bad("expected log:start,end,count or list:t1,t2,...");
    return {};
}

class ManifestWriter {
public:
    ManifestWriter(std::string command, std::filesystem::path primary_out)
        : command_(std::move(command)),
          out_(std::move(primary_out)),
          t0_(std::chrono::steady_clock::now()) {}

    void add_input(const std::string& key, const std::string& value) { inputs_[key] = value; }
    void add_option(const std::string& key, const ordered_json& value) { options_[key] = value; }
    void set_seed(std::uint64_t seed) { seed_ = seed; }

    void write() const {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        ordered_json manifest{{"command", command_}, {"version", kVersion},
                              {"inputs", inputs_},   {"options", options_},
                              {"seed", seed_},       {"wall_time_s", wall}};
        io::write_text_atomic(manifest.dump(2) + "\n", out_.string() + ".manifest.json");
    }

private:
    std::string command_;
    std::filesystem::path out_;
    ordered_json inputs_ = ordered_json::object();
    ordered_json options_ = ordered_json::object();
    std::uint64_t seed_ = 0;
    std::chrono::steady_clock::time_point t0_;
};

// Whole-blood values aligned with a simulation grid, from a sidecar CSV.
std::vector<double> align_wb_with_grid(const std::vector<WbSample>& samples,
                                       const std::vector<double>& grid) {
    if (samples.size() != grid.size()) {
        throw ValidationError("whole-blood file must sample exactly the simulation grid (" +
                              std::to_string(grid.size()) + " times)");
    }
    std::vector<double> values;
    values.reserve(grid.size());
    for (std::size_t l = 0; l < grid.size(); ++l) {
        const double dt = std::fabs(samples[l].time - grid[l]);
        if (dt > 1e-12 * std::max(1.0, grid[l])) {
            throw ValidationError("whole-blood time " + io::format_double(samples[l].time) +
                                  " does not match grid time " + io::format_double(grid[l]));
        }
        values.push_back(samples[l].value);
    }
    return values;
}

struct SimulateArgs {
    std::string config_path;
    std::string grid_spec;
    std::string out_path;
    std::optional<double> vb;
    std::string cwb_path;
    double noise_frac = 0.0;
    std::uint64_t noise_seed = 0;
};

int run_simulate(const SimulateArgs& args) {
    ManifestWriter manifest("simulate", args.out_path);
    manifest.add_input("config", args.config_path);
    manifest.add_option("grid", args.grid_spec);
    manifest.set_seed(args.noise_seed);

    if (args.vb.has_value() && args.cwb_path.empty()) {
        std::cerr << "MissingWholeBlood: --vb requires --cwb with whole-blood samples\n";
        return kExitInput;
    }
    const Configuration config = io::read_configuration(args.config_path);
    const std::vector<double> grid = parse_grid(args.grid_spec);

    std::optional<MixingModel> mixing;
    std::optional<std::vector<double>> cwb;
    if (args.vb.has_value()) {
        mixing = MixingModel(*args.vb);
        manifest.add_option("vb", *args.vb);
        manifest.add_input("cwb", args.cwb_path);
        cwb = align_wb_with_grid(io::read_wb_samples(args.cwb_path), grid);
    }

    TacTable table = simulate_tacs(config, grid, mixing, cwb);
    if (args.noise_frac > 0.0) {
        manifest.add_option("noise_frac", args.noise_frac);
        table = add_gaussian_noise(table, args.noise_frac, args.noise_seed);
    }
    io::write_tac_table(table, args.out_path);
    if (!table.wb_samples.empty()) {
        io::write_wb_samples(table.wb_samples,
                             std::filesystem::path(args.out_path).replace_extension(".cwb.csv"));
    }
    manifest.write();
    std::cout << "wrote " << table.curves.size() << "x" << table.n_times() << " table to "
              << args.out_path << "\n";
    return kExitOk;
}

struct FitArgs {
    std::string tacs_path;
    std::string out_path;
    std::string warm_path;
    std::string cwb_path;
    FitOptions options;
};

int run_fit(const FitArgs& args) {
    ManifestWriter manifest("fit", args.out_path);
    manifest.add_input("tacs", args.tacs_path);
    manifest.add_option("p", args.options.p);
    manifest.add_option("starts", args.options.n_starts);
    manifest.add_option("iters", args.options.max_iters);
    manifest.add_option("residual_tol", args.options.residual_tol);
    manifest.add_option("param_tol", args.options.param_tol);
    manifest.set_seed(args.options.seed);

    const TacTable tacs = io::read_tac_table(args.tacs_path);
    std::vector<Configuration> warm_starts;
    if (!args.warm_path.empty()) {
        manifest.add_input("warm", args.warm_path);
        warm_starts.push_back(io::read_configuration(args.warm_path));
    }

    const FitResult result = fit_joint(tacs, args.options, warm_starts);

    ordered_json out = ordered_json::parse(io::fit_result_to_json(result));
    if (!args.cwb_path.empty()) {
        manifest.add_input("cwb", args.cwb_path);
        const ScaleResolution scale = resolve_scale(result, io::read_wb_samples(args.cwb_path));
        out["scale"] = {{"zeta", scale.zeta},
                        {"f", {{"a", scale.f.a}, {"b", scale.f.b}, {"c", scale.f.c}}}};
    }
    io::write_text_atomic(out.dump(2) + "\n", args.out_path);
    io::write_text_atomic(io::fit_trace_to_csv(result.trace),
                          std::filesystem::path(args.out_path).replace_extension(".trace.csv"));
    const TacTable fitted = simulate_tacs(result.config, tacs.time_grid);
    io::write_tac_table(fitted,
                        std::filesystem::path(args.out_path).replace_extension(".curves.csv"));
    manifest.write();

    std::cout << "fit sse = " << io::format_double(result.sse) << " (start " << result.start_index
              << ", " << result.iterations << " iterations, converged = "
              << (result.converged ? "true" : "false") << ")\n";
    return result.converged ? kExitOk : kExitConvergence;
}

int run_check(const std::string& config_path, const std::string& out_path, double tol) {
    ManifestWriter manifest("check", out_path);
    manifest.add_input("config", config_path);
    manifest.add_option("tol", tol);

    const Configuration config = io::read_configuration(config_path);
    const RichnessReport witness_report = check_assumption_A(config, tol);
    const RichnessReport richness_report = check_region_richness(config, tol);

    ordered_json out{
        {"assumption_A", ordered_json::parse(io::richness_report_to_json(witness_report))},
        {"region_richness", ordered_json::parse(io::richness_report_to_json(richness_report))}};
    io::write_text_atomic(out.dump(2) + "\n", out_path);
    manifest.write();

    std::cout << "assumption_A satisfied: " << (witness_report.satisfied ? "true" : "false")
              << ", region_richness satisfied: " << (richness_report.satisfied ? "true" : "false")
              << "\n";
    return witness_report.satisfied ? kExitOk : kExitCheckFailed;
}

struct VerifyArgs {
    std::string config_path;
    std::string grid_spec;
    std::string out_path;
    double eq_tol = 1e-3;
    FitOptions options;
};

std::string zeta_histogram_csv(const std::vector<double>& zetas) {
    std::string out = "bin_lo,bin_hi,count\n";
    if (zetas.empty()) return out;
    double lo = zetas[0];
    double hi = zetas[0];
    for (double z : zetas) {
        lo = std::min(lo, z);
        hi = std::max(hi, z);
    }
    const int bins = 20;
    const double width = (hi > lo) ? (hi - lo) / bins : 1.0;
    std::vector<int> counts(bins, 0);
    for (double z : zetas) {
        int b = static_cast<int>((z - lo) / width);
        b = std::clamp(b, 0, bins - 1);
        ++counts[b];
    }
    for (int b = 0; b < bins; ++b) {
        out += io::format_double(lo + b * width);
        out += ',';
        out += io::format_double(lo + (b + 1) * width);
        out += ',';
        out += std::to_string(counts[b]);
        out += '\n';
    }
    return out;
}

int run_verify(const VerifyArgs& args) {
    ManifestWriter manifest("verify", args.out_path);
    manifest.add_input("config", args.config_path);
    manifest.add_option("grid", args.grid_spec);
    manifest.add_option("p", args.options.p);
    manifest.add_option("starts", args.options.n_starts);
    manifest.add_option("iters", args.options.max_iters);
    manifest.add_option("residual_tol", args.options.residual_tol);
    manifest.add_option("eq_tol", args.eq_tol);
    manifest.set_seed(args.options.seed);

    const Configuration truth = io::read_configuration(args.config_path);
    const std::vector<double> grid = parse_grid(args.grid_spec);
    const UniquenessReport report = verify_uniqueness(truth, grid, args.options, args.eq_tol);

    io::write_text_atomic(io::uniqueness_report_to_json(report), args.out_path);
    io::write_text_atomic(
        zeta_histogram_csv(report.zeta_values),
        std::filesystem::path(args.out_path).replace_extension(".zeta_hist.csv"));
    manifest.write();

    std::cout << "converged " << report.n_converged << "/" << report.n_starts << ", equivalent "
              << report.n_equivalent << "/" << report.n_converged
              << ", passed = " << (report.passed ? "true" : "false") << "\n";
    return report.passed ? kExitOk : kExitCheckFailed;
}

int run_oracle_compare(const std::string& config_path, const std::string& grid_spec, double step,
                       const std::string& out_path) {
    ManifestWriter manifest("oracle-compare", out_path);
    manifest.add_input("config", config_path);
    manifest.add_option("grid", grid_spec);
    manifest.add_option("step", step);

    const Configuration config = io::read_configuration(config_path);
    const std::vector<double> grid = parse_grid(grid_spec);
    const InputFn cp = [&](double s) { return eval_cp(config.input(), s); };

    std::string csv = "region_id,max_rel_dev\n";
    bool all_ok = true;
    for (const auto& region : config.regions()) {
        const auto oracle = integrate_at(region.params, cp, grid, step);
        double worst = 0.0;
        for (std::size_t l = 0; l < grid.size(); ++l) {
            const double closed = eval_ct_closed_form(region.params, config.input(), grid[l]);
            worst = std::max(worst,
                             std::fabs(closed - oracle[l]) / std::max(1.0, std::fabs(oracle[l])));
        }
        csv += region.id;
        csv += ',';
        csv += io::format_double(worst);
        csv += '\n';
        std::cout << region.id << " max relative deviation " << io::format_double(worst) << "\n";
        if (!(worst <= 1e-6)) all_ok = false;
    }
    io::write_text_atomic(csv, out_path);
    manifest.write();
    return all_ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reversible two-tissue compartment kinetics toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "simulate tissue curves on a time grid");
    simulate->add_option("--config", sim.config_path, "configuration JSON")->required();
    simulate->add_option("--grid", sim.grid_spec, "log:start,end,count or list:t1,t2,...")
        ->required();
    simulate->add_option("--out", sim.out_path, "output TAC CSV")->required();
    double vb_value = 0.0;
    CLI::Option* vb_opt =
        simulate->add_option("--vb", vb_value, "fractional blood volume in [0,1)");
    simulate->add_option("--cwb", sim.cwb_path, "whole-blood CSV sampled on the grid");
    simulate->add_option("--noise-frac", sim.noise_frac,
                         "Gaussian noise std as a fraction of the peak value");
    simulate->add_option("--noise-seed", sim.noise_seed, "noise seed");

    FitArgs fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "jointly fit all rates and the input");
    fit_cmd->add_option("--tacs", fit.tacs_path, "input TAC CSV")->required();
    fit_cmd->add_option("--p", fit.options.p, "assumed input degree")->required();
    fit_cmd->add_option("--out", fit.out_path, "output fit JSON")->required();
    fit_cmd->add_option("--starts", fit.options.n_starts, "random multi-starts");
    fit_cmd->add_option("--iters", fit.options.max_iters, "max iterations per start");
    fit_cmd->add_option("--seed", fit.options.seed, "random-start seed");
    fit_cmd->add_option("--residual-tol", fit.options.residual_tol,
                        "converged when sse <= tol * sum(y^2)");
    fit_cmd->add_option("--param-tol", fit.options.param_tol, "parameter stall tolerance");
    fit_cmd->add_option("--warm", fit.warm_path, "warm-start configuration JSON");
    fit_cmd->add_option("--cwb", fit.cwb_path,
                        "whole-blood CSV (>= 4 samples); resolves the global scale");

    std::string check_config, check_out;
    double check_tol = 1e-9;
    CLI::App* check_cmd =
        app.add_subcommand("check", "check the identifiability hypotheses of a configuration");
    check_cmd->add_option("--config", check_config, "configuration JSON")->required();
    check_cmd->add_option("--out", check_out, "output report JSON")->required();
    check_cmd->add_option("--tol", check_tol, "distinctness tolerance");

    VerifyArgs verify;
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "empirical uniqueness experiment from cold starts");
    verify_cmd->add_option("--config", verify.config_path, "truth configuration JSON")->required();
    verify_cmd->add_option("--grid", verify.grid_spec, "measurement grid")->required();
    verify_cmd->add_option("--out", verify.out_path, "output report JSON")->required();
    verify_cmd->add_option("--p", verify.options.p, "assumed input degree");
    verify_cmd->add_option("--starts", verify.options.n_starts, "number of cold starts");
    verify_cmd->add_option("--iters", verify.options.max_iters, "max iterations per start");
    verify_cmd->add_option("--seed", verify.options.seed, "seed");
    verify_cmd->add_option("--residual-tol", verify.options.residual_tol,
                           "convergence threshold relative to sum(y^2)");
    verify_cmd->add_option("--eq-tol", verify.eq_tol, "scale-equivalence tolerance");

    std::string oracle_config, oracle_grid, oracle_out;
    double oracle_step = 1e-3;
    CLI::App* oracle_cmd = app.add_subcommand(
        "oracle-compare", "compare the closed form against fixed-step RK4 integration");
    oracle_cmd->add_option("--config", oracle_config, "configuration JSON")->required();
    oracle_cmd->add_option("--grid", oracle_grid, "comparison grid")->required();
    oracle_cmd->add_option("--out", oracle_out, "output deviation CSV")->required();
    oracle_cmd->add_option("--step", oracle_step, "RK4 step in minutes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitInput;
    }

    try {
        if (simulate->parsed()) {
            if (vb_opt->count() > 0) sim.vb = vb_value;
            return run_simulate(sim);
        }
        if (fit_cmd->parsed()) return run_fit(fit);
        if (check_cmd->parsed()) return run_check(check_config, check_out, check_tol);
        if (verify_cmd->parsed()) return run_verify(verify);
        if (oracle_cmd->parsed()) {
            return run_oracle_compare(oracle_config, oracle_grid, oracle_step, oracle_out);
        }
    } catch (const InsufficientSamples& e) {
        std::cerr << "InsufficientSamples: " << e.what() << "\n";
        return kExitSamples;
    } catch (const NoSolution& e) {
        std::cerr << "NoSolution: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const MissingWholeBlood& e) {
        std::cerr << "MissingWholeBlood: " << e.what() << "\n";
        return kExitInput;
    } catch (const ValidationError& e) {
        std::cerr << "InvalidInput: " << e.what() << "\n";
        return kExitInput;
    } catch (const Error& e) {
        std::cerr << "ModelError: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::exception& e) {
        std::cerr << "Error: " << e.what() << "\n";
        return kExitModel;
    }
    return kExitOk;
}
