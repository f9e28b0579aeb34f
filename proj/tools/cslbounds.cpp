// cslbounds: collapse-model bounds calculator.
//
// Subcommands (each takes a scenario file; see docs/scenario_format.md):
//   eta            reduced CSL diffusion constant eta_hat for a mass distribution
//   dp             Diosi-Penrose diffusion constant
//   noise          force-noise PSD budget (thermal + CSL addends)
//   heat           bulk heating power / per-atom energy gain rate
//   exclude        exclusion curve lambda_upper(r_C) for an experiment
//   envelope       pointwise-minimum envelope of saved curves
//   optimize-stack multilayer thickness optimization
//   simulate       Langevin time series of a noise-driven resonator
//   psd            Welch PSD of a saved time series
//
// Exit codes: 0 success, 2 scenario schema violation, 3 numerical failure,
// 4 I/O failure. Prints a single machine-parsable key=value summary line on
// success; outputs are written atomically (temp file + rename).

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csl/budgets.hpp"
#include "csl/constants.hpp"
#include "csl/diffusion.hpp"
#include "csl/errors.hpp"
#include "csl/exclusion.hpp"
#include "csl/geometry.hpp"
#include "csl/io.hpp"
#include "csl/psd.hpp"
#include "csl/scenario.hpp"
#include "csl/simulator.hpp"
#include "csl/stack_opt.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonArgs {
    std::string scenario_path;
    std::optional<double> grid_min, grid_max;
    std::optional<int> grid_points;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    bool lenient = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("scenario", args.scenario_path, "scenario file (JSON with // comments)")
        ->required();
    cmd->add_option("--grid-min", args.grid_min, "override r_C grid minimum [m]");
    cmd->add_option("--grid-max", args.grid_max, "override r_C grid maximum [m]");
    cmd->add_option("--grid-points", args.grid_points, "override r_C grid point count");
    cmd->add_option("--out", args.out, "override output path");
    cmd->add_option("--seed", args.seed, "override simulation seed");
    cmd->add_flag("--lenient{true},--strict{false}", args.lenient,
                  "downgrade unknown scenario keys to warnings (default: strict)");
}

std::string kv(const std::string& key, const std::string& value) { return key + "=" + value; }
std::string kv(const std::string& key, double value) {
    return key + "=" + csl::format_double(value);
}

void print_summary(const std::vector<std::string>& fields) {
    std::string line;
    for (const auto& f : fields) {
        if (!line.empty()) line += " ";
        line += f;
    }
    std::cout << line << "\n";
}

csl::Scenario load(const CommonArgs& args) {
    auto sc = csl::load_scenario(args.scenario_path, !args.lenient);
    for (const auto& w : sc.warnings) std::cerr << "warning: " << w << "\n";
    return sc;
}

csl::GridOverrides grid_overrides(const CommonArgs& args) {
    return {args.grid_min, args.grid_max, args.grid_points};
}

fs::path resolve(const csl::Scenario& sc, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : sc.dir / path;
}

long now_unix() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

json scenario_echo(const csl::Scenario& sc) { return sc.root; }

// --- subcommand handlers -----------------------------------------------------

int run_eta(const CommonArgs& args) {
    auto sc = load(args);
    const auto pc = csl::parse_constants(sc);
    const auto opts = csl::parse_quadrature(sc);
    if (!sc.root.contains("distribution"))
        throw csl::ScenarioError("eta: scenario needs a 'distribution' section");
    const auto dist = csl::parse_distribution(sc.root["distribution"], sc);

    const bool has_grid = sc.root.contains("grid") || args.grid_min || args.grid_max ||
                          args.grid_points;
    if (!has_grid) {
        const auto cp = csl::parse_collapse(sc);
        const auto red = csl::eta_hat_csl(dist, cp.r_c_m, opts, pc);
        std::vector<std::string> fields{kv("status", "ok"), kv("r_c_m", cp.r_c_m),
                                        kv("eta_hat_m2", red.eta_hat),
                                        kv("quad_error", red.quad_error)};
        if (cp.lambda_hz) fields.push_back(kv("eta_m2_s", *cp.lambda_hz * red.eta_hat));
        print_summary(fields);
        return 0;
    }

    const auto grid = csl::parse_grid(sc, grid_overrides(args));
    const auto reds = csl::eta_hat_grid(dist, grid, opts, pc);
    std::string csv = "r_C_m,eta_hat_m2,quad_error\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        csv += csl::format_double(grid[i]) + "," + csl::format_double(reds[i].eta_hat) + "," +
               csl::format_double(reds[i].quad_error) + "\n";
    }
    const auto out = csl::parse_output_path(sc, args.out);
    if (!out) throw csl::ScenarioError("eta: grid sweep needs an output path");
    csl::atomic_write(resolve(sc, *out), csv);
    print_summary({kv("status", "ok"), kv("points", static_cast<double>(grid.size())),
                   kv("out", *out)});
    return 0;
}

int run_dp(const CommonArgs& args) {
    auto sc = load(args);
    const auto pc = csl::parse_constants(sc);
    if (!sc.root.contains("distribution"))
        throw csl::ScenarioError("dp: scenario needs a 'distribution' section");
    const auto dist = csl::parse_distribution(sc.root["distribution"], sc);
    const auto dp = csl::parse_dp(sc);
    if (auto warn = csl::dp_sanity_warning(dp)) std::cerr << "warning: " << *warn << "\n";
    const double eta = csl::eta_dp(dist, dp, pc);
    print_summary({kv("status", "ok"), kv("eta_dp_m2_s", eta),
                   kv("eta_dp_per_kg_m2_s_kg", eta / csl::total_mass(dist))});
    return 0;
}

int run_noise(const CommonArgs& args) {
    auto sc = load(args);
    const auto pc = csl::parse_constants(sc);
    const auto opts = csl::parse_quadrature(sc);
    const auto spec = csl::parse_experiment(sc);
    const auto* mech = std::get_if<csl::MechanicalExperiment>(&spec.kind);
    if (!mech) throw csl::ScenarioError("noise: experiment kind must be mechanical");
    const auto cp = csl::parse_collapse(sc);
    if (!cp.lambda_hz) throw csl::ScenarioError("noise: collapse.lambda_hz is required");
    const auto red = csl::eta_hat_csl(mech->test_mass, cp.r_c_m, opts, pc);
    const auto psd = csl::force_noise_psd(mech->resonator, *cp.lambda_hz * red.eta_hat, pc);
    print_summary({kv("status", "ok"), kv("r_c_m", cp.r_c_m), kv("lambda_hz", *cp.lambda_hz),
                   kv("s_ff_total_n2_hz", psd.total), kv("s_ff_thermal_n2_hz", psd.thermal),
                   kv("s_ff_csl_n2_hz", psd.csl)});
    return 0;
}

int run_heat(const CommonArgs& args) {
    auto sc = load(args);
    const auto pc = csl::parse_constants(sc);
    const auto spec = csl::parse_experiment(sc);
    const auto cp = csl::parse_collapse(sc);
    if (!cp.lambda_hz) throw csl::ScenarioError("heat: collapse.lambda_hz is required");
    // Thermal observables probe lambda_eff; equal to lambda only for white noise.
    if (const auto* cal = std::get_if<csl::CalorimeterExperiment>(&spec.kind)) {
        const double p = csl::heating_power(cal->spec, *cp.lambda_hz, cp.r_c_m, pc);
        print_summary({kv("status", "ok"), kv("lambda_eff_hz", *cp.lambda_hz),
                       kv("r_c_m", cp.r_c_m), kv("heating_w", p),
                       kv("heating_w_per_kg", p / cal->spec.mass)});
        return 0;
    }
    if (const auto* cloud = std::get_if<csl::CloudExperiment>(&spec.kind)) {
        const double rate = csl::cloud_energy_rate(cloud->spec, *cp.lambda_hz, cp.r_c_m, pc);
        print_summary(
            {kv("status", "ok"), kv("lambda_eff_hz", *cp.lambda_hz), kv("r_c_m", cp.r_c_m),
             kv("energy_rate_w_per_atom", rate),
             kv("energy_rate_w_per_nucleon", rate / cloud->spec.nucleons_per_atom),
             kv("temperature_drift_k_per_s",
                csl::cloud_temperature_drift(cloud->spec, *cp.lambda_hz, cp.r_c_m, pc))});
        return 0;
    }
    throw csl::ScenarioError("heat: experiment kind must be calorimeter or cloud");
}

int run_exclude(const CommonArgs& args) {
    auto sc = load(args);
    const auto pc = csl::parse_constants(sc);
    const auto opts = csl::parse_quadrature(sc);
    const auto spec = csl::parse_experiment(sc);
    const auto grid = csl::parse_grid(sc, grid_overrides(args));
    auto curve = csl::exclusion_curve(spec, grid, opts, pc);
    curve.metadata["spec_echo"] = scenario_echo(sc);

    const auto out = csl::parse_output_path(sc, args.out);
    if (!out) throw csl::ScenarioError("exclude: needs an output path");
    const fs::path csv_path = resolve(sc, *out);
    csl::atomic_write(csv_path, csl::curve_to_csv(curve));
    auto j = csl::curve_to_json(curve);
    j["metadata"]["generated_unix_s"] = now_unix();
    fs::path json_path = csv_path;
    json_path.replace_extension(".json");
    csl::atomic_write(json_path, j.dump(2) + "\n");

    print_summary({kv("status", "ok"), kv("points", static_cast<double>(curve.points.size())),
                   kv("rc_min_m", curve.points.front().r_c),
                   kv("rc_max_m", curve.points.back().r_c), kv("out_csv", csv_path.string()),
                   kv("out_json", json_path.string())});
    return 0;
}

int run_envelope(const CommonArgs& args) {
    auto sc = load(args);
    const auto inputs = csl::parse_envelope_inputs(sc);
    std::vector<csl::ExclusionCurve> curves;
    for (const auto& p : inputs) {
        const fs::path path = resolve(sc, p);
        if (!fs::exists(path)) throw csl::IoError("curve file not found: " + path.string());
        try {
            curves.push_back(csl::curve_from_json(json::parse(csl::read_file(path))));
        } catch (const json::exception& e) {
            throw csl::IoError("cannot parse curve " + path.string() + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw csl::IoError("invalid curve " + path.string() + ": " + e.what());
        }
    }
    csl::ExclusionCurve env;
    try {
        env = csl::envelope(curves);
    } catch (const std::invalid_argument& e) {
        throw csl::NumericalError(e.what());
    }

    const auto out = csl::parse_output_path(sc, args.out);
    if (!out) throw csl::ScenarioError("envelope: needs an output path");
    const fs::path csv_path = resolve(sc, *out);
    csl::atomic_write(csv_path, csl::curve_to_csv(env));
    auto j = csl::curve_to_json(env);
    j["metadata"]["generated_unix_s"] = now_unix();
    fs::path json_path = csv_path;
    json_path.replace_extension(".json");
    csl::atomic_write(json_path, j.dump(2) + "\n");
    print_summary({kv("status", "ok"), kv("curves", static_cast<double>(curves.size())),
                   kv("out_csv", csv_path.string()), kv("out_json", json_path.string())});
    return 0;
}

int run_optimize_stack(const CommonArgs& args) {
    auto sc = load(args);
    const auto pc = csl::parse_constants(sc);
    const auto opts = csl::parse_quadrature(sc);
    const auto req = csl::parse_stack(sc);

    const auto result = csl::optimize_thickness(req.density_a, req.density_b, req.lx, req.ly,
                                                req.n_pairs, req.r_c, {req.d_min, req.d_max},
                                                req.objective, opts, pc);
    const auto ratios = csl::enhancement_ratios(result.best, req.r_c, opts, pc);

    json j;
    j["label"] = "stack_optimization";
    j["metadata"] = {{"kind", "stack_optimization"},
                     {"spec_echo", scenario_echo(sc)},
                     {"generated_unix_s", now_unix()},
                     {"tolerances", {{"quad_rel_tol", opts.rel_tol}}}};
    j["best"] = {{"layer_thickness_m", result.best.layer_thickness},
                 {"n_pairs", result.best.n_pairs},
                 {"lx_m", result.best.lx},
                 {"ly_m", result.best.ly},
                 {"density_a_kg_m3", result.best.density_a},
                 {"density_b_kg_m3", result.best.density_b},
                 {"total_mass_kg", result.best.total_mass()}};
    j["objective_value"] = result.objective_value;
    j["converged"] = result.converged;
    j["enhancement_vs_same_mass"] = ratios.vs_same_mass;
    j["enhancement_vs_dense_bulk"] = ratios.vs_dense_bulk;
    auto trace = json::array();
    for (const auto& t : result.trace)
        trace.push_back({{"layer_thickness_m", t.design.layer_thickness}, {"value", t.value}});
    j["trace"] = trace;

    const auto out = csl::parse_output_path(sc, args.out);
    if (out) csl::atomic_write(resolve(sc, *out), j.dump(2) + "\n");

    std::vector<std::string> fields{
        kv("status", "ok"), kv("best_d_m", result.best.layer_thickness),
        kv("objective_value", result.objective_value),
        kv("enhancement_vs_same_mass", ratios.vs_same_mass),
        kv("enhancement_vs_dense_bulk", ratios.vs_dense_bulk),
        kv("evaluations", static_cast<double>(result.trace.size())),
        kv("converged", result.converged ? 1.0 : 0.0)};
    if (out) fields.push_back(kv("out", *out));
    print_summary(fields);
    return 0;
}

int run_simulate(const CommonArgs& args) {
    auto sc = load(args);
    const auto cfg = csl::parse_simulation(sc, args.seed);
    const auto ts = csl::simulate(cfg);
    for (const auto& w : ts.warnings) std::cerr << "warning: " << w << "\n";

    const auto out = csl::parse_output_path(sc, args.out);
    if (!out) throw csl::ScenarioError("simulate: needs an output path");
    const fs::path csv_path = resolve(sc, *out);
    csl::atomic_write(csv_path, csl::series_to_csv(ts));

    json meta;
    meta["kind"] = "time_series";
    meta["config"] = {{"mass_kg", cfg.resonator.mass},
                      {"omega_rad_s", cfg.resonator.omega},
                      {"q", cfg.resonator.quality},
                      {"temperature_k", cfg.resonator.temperature},
                      {"s_ff_total_n2_hz", cfg.s_ff_total},
                      {"dt_s", cfg.dt},
                      {"duration_s", cfg.duration},
                      {"seed", cfg.seed},
                      {"x0_m", cfg.x0},
                      {"v0_m_s", cfg.v0}};
    meta["samples"] = ts.x.size();
    meta["warnings"] = ts.warnings;
    meta["generated_unix_s"] = now_unix();
    fs::path meta_path = csv_path;
    meta_path.replace_extension(".meta.json");
    csl::atomic_write(meta_path, meta.dump(2) + "\n");

    print_summary({kv("status", "ok"), kv("samples", static_cast<double>(ts.x.size())),
                   kv("seed", static_cast<double>(cfg.seed)), kv("out_csv", csv_path.string()),
                   kv("out_meta", meta_path.string())});
    return 0;
}

int run_psd(const CommonArgs& args) {
    auto sc = load(args);
    const auto req = csl::parse_psd(sc);
    if (!req.series_csv) throw csl::ScenarioError("psd: 'psd.series_csv' is required");
    const fs::path in_path = resolve(sc, *req.series_csv);
    if (!fs::exists(in_path)) throw csl::IoError("series file not found: " + in_path.string());

    // Parse `t_s,x_m` CSV.
    std::istringstream in(csl::read_file(in_path));
    std::string line;
    if (!std::getline(in, line) || line != "t_s,x_m")
        throw csl::IoError(in_path.string() + ": expected header 't_s,x_m'");
    std::vector<double> t, x;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw csl::IoError(in_path.string() + ": malformed row '" + line + "'");
        t.push_back(std::stod(line.substr(0, comma)));
        x.push_back(std::stod(line.substr(comma + 1)));
    }
    if (x.size() < 2) throw csl::IoError(in_path.string() + ": series too short");
    const double dt = t[1] - t[0];

    csl::PsdEstimate est;
    try {
        est = csl::psd_welch(x, dt, req.segment_length, req.overlap);
    } catch (const std::invalid_argument& e) {
        throw csl::NumericalError(e.what());
    }

    const auto out = csl::parse_output_path(sc, args.out);
    if (!out) throw csl::ScenarioError("psd: needs an output path");
    const fs::path out_path = resolve(sc, *out);
    csl::atomic_write(out_path, csl::psd_to_csv(est));
    print_summary({kv("status", "ok"), kv("segments", static_cast<double>(est.segments)),
                   kv("bins", static_cast<double>(est.frequency.size())),
                   kv("out", out_path.string())});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"collapse-model diffusion, noise budgets and exclusion bounds"};
    app.require_subcommand(1);

    struct Entry {
        CLI::App* cmd;
        CommonArgs args;
        int (*fn)(const CommonArgs&);
    };
    std::vector<Entry> entries;
    entries.reserve(9);
    auto add = [&](const char* name, const char* desc, int (*fn)(const CommonArgs&)) {
        entries.push_back({app.add_subcommand(name, desc), {}, fn});
        add_common(entries.back().cmd, entries.back().args);
    };
    add("eta", "reduced CSL diffusion constant", run_eta);
    add("dp", "Diosi-Penrose diffusion constant", run_dp);
    add("noise", "force-noise PSD budget", run_noise);
    add("heat", "bulk heating / cloud energy gain", run_heat);
    add("exclude", "exclusion curve lambda_upper(r_C)", run_exclude);
    add("envelope", "pointwise-minimum envelope of curves", run_envelope);
    add("optimize-stack", "multilayer thickness optimization", run_optimize_stack);
    add("simulate", "Langevin resonator time series", run_simulate);
    add("psd", "Welch PSD of a time series", run_psd);

    CLI11_PARSE(app, argc, argv);

    for (auto& e : entries) {
        if (!e.cmd->parsed()) continue;
        try {
            return e.fn(e.args);
        } catch (const csl::ScenarioError& err) {
            std::cerr << "error (schema): " << err.what() << "\n";
            return 2;
        } catch (const csl::IoError& err) {
            std::cerr << "error (io): " << err.what() << "\n";
            return 4;
        } catch (const csl::NumericalError& err) {
            std::cerr << "error (numerical): " << err.what() << "\n";
            return 3;
        } catch (const std::exception& err) {
            std::cerr << "error (numerical): " << err.what() << "\n";
            return 3;
        }
    }
    return 1;
}
