#pragma once

// Scenario files: JSON with // comments, strict-by-default schema.
//
// A scenario is a plain-text document of typed scalars, lists and nested
// tables; one file can carry sections for several subcommands. Validation
// walks every recognized section (types + invariants) and rejects unknown
// keys anywhere; --lenient downgrades unknown keys to warnings. See
// docs/scenario_format.md for the full schema and scenarios/ for annotated
// examples.

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "csl/budgets.hpp"
#include "csl/constants.hpp"
#include "csl/errors.hpp"
#include "csl/exclusion.hpp"
#include "csl/geometry.hpp"
#include "csl/io.hpp"
#include "csl/quadrature.hpp"
#include "csl/simulator.hpp"
#include "csl/stack_opt.hpp"

namespace csl {

struct Scenario {
    nlohmann::json root;
    bool strict = true;
    std::filesystem::path dir;  // directory of the file, for relative paths
    std::vector<std::string> warnings;
};

namespace scenario_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& context, const std::string& message) {
    throw ScenarioError(context + ": " + message);
}

inline const json& member(const json& obj, const std::string& context, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(context, std::string("missing required key '") + key + "'");
    return *it;
}

inline double get_number(const json& obj, const std::string& context, const char* key) {
    const json& v = member(obj, context, key);
    if (!v.is_number()) fail(context, std::string("'") + key + "' must be a number");
    return v.get<double>();
}

inline double get_number_or(const json& obj, const std::string& context, const char* key,
                            double fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) fail(context, std::string("'") + key + "' must be a number");
    return it->get<double>();
}

inline long get_integer(const json& obj, const std::string& context, const char* key) {
    const json& v = member(obj, context, key);
    if (!v.is_number_integer()) fail(context, std::string("'") + key + "' must be an integer");
    return v.get<long>();
}

inline std::string get_string(const json& obj, const std::string& context, const char* key) {
    const json& v = member(obj, context, key);
    if (!v.is_string()) fail(context, std::string("'") + key + "' must be a string");
    return v.get<std::string>();
}

inline std::string get_string_or(const json& obj, const std::string& context, const char* key,
                                 const std::string& fallback) {
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_string()) fail(context, std::string("'") + key + "' must be a string");
    return it->get<std::string>();
}

// Unknown-key scan: every key must be in `allowed`; strict mode throws,
// lenient mode records a warning.
inline void check_keys(const json& obj, const std::string& context,
                       std::initializer_list<const char*> allowed, Scenario& sc) {
    if (!obj.is_object()) fail(context, "must be a table (JSON object)");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!ok.count(item.key())) {
            const std::string msg = context + ": unknown key '" + item.key() + "'";
            if (sc.strict) throw ScenarioError(msg);
            sc.warnings.push_back(msg);
        }
    }
}

}  // namespace scenario_detail

// --- section parsers ----------------------------------------------------------

inline MassDistribution parse_distribution(const nlohmann::json& j, Scenario& sc,
                                           const std::string& context = "distribution") {
    using namespace scenario_detail;
    if (!j.is_object()) fail(context, "must be a table");
    const std::string type = get_string(j, context, "type");
    MassDistribution d;
    if (type == "point") {
        check_keys(j, context, {"type", "mass_kg"}, sc);
        d.shape = Point{get_number(j, context, "mass_kg")};
    } else if (type == "sphere") {
        check_keys(j, context, {"type", "mass_kg", "radius_m"}, sc);
        d.shape = Sphere{get_number(j, context, "mass_kg"), get_number(j, context, "radius_m")};
    } else if (type == "cuboid") {
        check_keys(j, context, {"type", "mass_kg", "lx_m", "ly_m", "lz_m"}, sc);
        d.shape = Cuboid{get_number(j, context, "mass_kg"), get_number(j, context, "lx_m"),
                         get_number(j, context, "ly_m"), get_number(j, context, "lz_m")};
    } else if (type == "cylinder") {
        check_keys(j, context, {"type", "mass_kg", "radius_m", "height_m", "axis"}, sc);
        Cylinder c{get_number(j, context, "mass_kg"), get_number(j, context, "radius_m"),
                   get_number(j, context, "height_m"), Axis::z};
        const std::string axis = get_string_or(j, context, "axis", "z");
        if (axis == "x")
            c.axis = Axis::x;
        else if (axis == "y")
            c.axis = Axis::y;
        else if (axis == "z")
            c.axis = Axis::z;
        else
            fail(context, "axis must be one of x, y, z");
        d.shape = c;
    } else if (type == "multilayer") {
        check_keys(j, context, {"type", "lx_m", "ly_m", "layers"}, sc);
        Multilayer m;
        m.lx = get_number(j, context, "lx_m");
        m.ly = get_number(j, context, "ly_m");
        const auto& layers = member(j, context, "layers");
        if (!layers.is_array()) fail(context, "'layers' must be a list");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const std::string lc = context + ".layers[" + std::to_string(i) + "]";
            check_keys(layers[i], lc, {"density_kg_m3", "thickness_m"}, sc);
            m.layers.push_back({get_number(layers[i], lc, "density_kg_m3"),
                                get_number(layers[i], lc, "thickness_m")});
        }
        d.shape = m;
    } else if (type == "union") {
        check_keys(j, context, {"type", "parts"}, sc);
        Union u;
        const auto& parts = member(j, context, "parts");
        if (!parts.is_array()) fail(context, "'parts' must be a list");
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const std::string pc = context + ".parts[" + std::to_string(i) + "]";
            check_keys(parts[i], pc, {"offset_m", "distribution"}, sc);
            const auto& off = member(parts[i], pc, "offset_m");
            if (!off.is_array() || off.size() != 3 || !off[0].is_number() ||
                !off[1].is_number() || !off[2].is_number())
                fail(pc, "'offset_m' must be a list of three numbers");
            UnionPart part;
            part.offset = {off[0].get<double>(), off[1].get<double>(), off[2].get<double>()};
            part.dist = parse_distribution(member(parts[i], pc, "distribution"), sc,
                                           pc + ".distribution");
            u.parts.push_back(std::move(part));
        }
        d.shape = std::move(u);
    } else {
        fail(context, "unknown distribution type '" + type + "'");
    }
    try {
        validate(d);
    } catch (const std::invalid_argument& e) {
        fail(context, e.what());
    }
    return d;
}

inline PhysicalConstants parse_constants(Scenario& sc) {
    using namespace scenario_detail;
    PhysicalConstants pc = constants();
    auto it = sc.root.find("constants");
    if (it == sc.root.end()) return pc;
    const std::string ctx = "constants";
    check_keys(*it, ctx, {"hbar_j_s", "k_b_j_k", "g_m3_kg_s2", "m_nucleon_kg", "amu_kg"}, sc);
    pc.hbar = get_number_or(*it, ctx, "hbar_j_s", pc.hbar);
    pc.k_B = get_number_or(*it, ctx, "k_b_j_k", pc.k_B);
    pc.G = get_number_or(*it, ctx, "g_m3_kg_s2", pc.G);
    pc.m_nucleon = get_number_or(*it, ctx, "m_nucleon_kg", pc.m_nucleon);
    pc.amu = get_number_or(*it, ctx, "amu_kg", pc.amu);
    for (double v : {pc.hbar, pc.k_B, pc.G, pc.m_nucleon, pc.amu})
        if (!(v > 0.0)) fail(ctx, "all constants must be strictly positive");
    return pc;
}

inline ResonatorSpec parse_resonator(const nlohmann::json& j, Scenario& sc,
                                     const std::string& context) {
    using namespace scenario_detail;
    check_keys(j, context, {"mass_kg", "omega_rad_s", "q", "temperature_k"}, sc);
    ResonatorSpec r{get_number(j, context, "mass_kg"), get_number(j, context, "omega_rad_s"),
                    get_number(j, context, "q"), get_number(j, context, "temperature_k")};
    try {
        validate(r);
    } catch (const std::invalid_argument& e) {
        fail(context, e.what());
    }
    return r;
}

inline ExperimentSpec parse_experiment(Scenario& sc) {
    using namespace scenario_detail;
    const auto& j = member(sc.root, "scenario", "experiment");
    const std::string ctx = "experiment";
    const std::string kind = get_string(j, ctx, "kind");
    ExperimentSpec spec;
    spec.label = get_string_or(j, ctx, "label", kind);
    try {
        if (kind == "mechanical") {
            check_keys(j, ctx,
                       {"kind", "label", "resonator", "excess_psd_ceiling_n2_hz", "distribution"},
                       sc);
            MechanicalExperiment m{
                parse_resonator(member(j, ctx, "resonator"), sc, ctx + ".resonator"),
                parse_distribution(member(j, ctx, "distribution"), sc, ctx + ".distribution"),
                get_number(j, ctx, "excess_psd_ceiling_n2_hz")};
            spec.kind = std::move(m);
        } else if (kind == "calorimeter") {
            check_keys(j, ctx, {"kind", "label", "mass_kg", "heat_leak_ceiling_w_per_kg"}, sc);
            spec.kind = CalorimeterExperiment{CalorimeterSpec{
                get_number(j, ctx, "mass_kg"), get_number(j, ctx, "heat_leak_ceiling_w_per_kg")}};
        } else if (kind == "cloud") {
            check_keys(
                j, ctx,
                {"kind", "label", "atom_mass_kg", "nucleons_per_atom", "energy_rate_ceiling_w"},
                sc);
            spec.kind = CloudExperiment{
                CloudSpec{get_number(j, ctx, "atom_mass_kg"),
                          static_cast<int>(get_integer(j, ctx, "nucleons_per_atom")),
                          get_number(j, ctx, "energy_rate_ceiling_w")}};
        } else {
            fail(ctx, "kind must be one of mechanical, calorimeter, cloud");
        }
        validate(spec);
    } catch (const std::invalid_argument& e) {
        fail(ctx, e.what());
    }
    return spec;
}

struct GridOverrides {
    std::optional<double> min, max;
    std::optional<int> points;
};

inline std::vector<double> parse_grid(Scenario& sc, const GridOverrides& ov = {}) {
    using namespace scenario_detail;
    double lo = 1e-9, hi = 1e-4;
    int n = 61;
    auto it = sc.root.find("grid");
    if (it != sc.root.end()) {
        const std::string ctx = "grid";
        check_keys(*it, ctx, {"min_m", "max_m", "points"}, sc);
        lo = get_number_or(*it, ctx, "min_m", lo);
        hi = get_number_or(*it, ctx, "max_m", hi);
        auto p = it->find("points");
        if (p != it->end()) {
            if (!p->is_number_integer()) fail(ctx, "'points' must be an integer");
            n = p->get<int>();
        }
    }
    if (ov.min) lo = *ov.min;
    if (ov.max) hi = *ov.max;
    if (ov.points) n = *ov.points;
    try {
        return default_rc_grid(lo, hi, n);
    } catch (const std::invalid_argument& e) {
        fail("grid", e.what());
    }
    return {};  // unreachable
}

inline QuadratureOptions parse_quadrature(Scenario& sc) {
    using namespace scenario_detail;
    QuadratureOptions opts;
    auto it = sc.root.find("quadrature");
    if (it == sc.root.end()) return opts;
    const std::string ctx = "quadrature";
    check_keys(*it, ctx, {"rel_tol", "max_evals"}, sc);
    opts.rel_tol = get_number_or(*it, ctx, "rel_tol", opts.rel_tol);
    auto me = it->find("max_evals");
    if (me != it->end()) {
        if (!me->is_number_integer() || me->get<long>() <= 0)
            fail(ctx, "'max_evals' must be a positive integer");
        opts.max_evals = static_cast<std::size_t>(me->get<long>());
    }
    if (!(opts.rel_tol > 0.0) || !(opts.rel_tol < 1.0))
        fail(ctx, "'rel_tol' must be in (0, 1)");
    return opts;
}

struct CollapsePoint {
    std::optional<double> lambda_hz;
    double r_c_m = 0.0;
};

inline CollapsePoint parse_collapse(Scenario& sc) {
    using namespace scenario_detail;
    const auto& j = member(sc.root, "scenario", "collapse");
    const std::string ctx = "collapse";
    check_keys(j, ctx, {"lambda_hz", "r_c_m"}, sc);
    CollapsePoint p;
    p.r_c_m = get_number(j, ctx, "r_c_m");
    if (!(p.r_c_m > 0.0)) fail(ctx, "'r_c_m' must be positive");
    auto it = j.find("lambda_hz");
    if (it != j.end()) {
        if (!it->is_number()) fail(ctx, "'lambda_hz' must be a number");
        p.lambda_hz = it->get<double>();
        if (!(*p.lambda_hz >= 0.0)) fail(ctx, "'lambda_hz' must be >= 0");
    }
    return p;
}

inline DPParams parse_dp(Scenario& sc) {
    using namespace scenario_detail;
    const auto& j = member(sc.root, "scenario", "dp");
    const std::string ctx = "dp";
    check_keys(j, ctx, {"r_dp_m", "lattice_constant_m", "density_kg_m3"}, sc);
    DPParams p{get_number(j, ctx, "r_dp_m"), get_number(j, ctx, "lattice_constant_m"),
               get_number(j, ctx, "density_kg_m3")};
    if (!(p.r_dp > 0.0) || !(p.a > 0.0) || !(p.density > 0.0))
        fail(ctx, "all DP parameters must be positive");
    return p;
}

inline SimConfig parse_simulation(Scenario& sc, std::optional<std::uint64_t> seed_override = {}) {
    using namespace scenario_detail;
    const auto& j = member(sc.root, "scenario", "simulation");
    const std::string ctx = "simulation";
    check_keys(j, ctx,
               {"resonator", "s_ff_total_n2_hz", "dt_s", "duration_s", "seed", "x0_m", "v0_m_s"},
               sc);
    SimConfig cfg;
    cfg.resonator = parse_resonator(member(j, ctx, "resonator"), sc, ctx + ".resonator");
    cfg.s_ff_total = get_number(j, ctx, "s_ff_total_n2_hz");
    cfg.dt = get_number(j, ctx, "dt_s");
    cfg.duration = get_number(j, ctx, "duration_s");
    auto it = j.find("seed");
    if (it != j.end()) {
        if (!it->is_number_integer()) fail(ctx, "'seed' must be an integer");
        cfg.seed = it->get<std::uint64_t>();
    }
    cfg.x0 = get_number_or(j, ctx, "x0_m", 0.0);
    cfg.v0 = get_number_or(j, ctx, "v0_m_s", 0.0);
    if (seed_override) cfg.seed = *seed_override;
    try {
        validate(cfg);
    } catch (const std::invalid_argument& e) {
        fail(ctx, e.what());
    }
    return cfg;
}

struct PsdRequest {
    std::optional<std::string> series_csv;
    std::size_t segment_length = 0;
    double overlap = 0.5;
};

inline PsdRequest parse_psd(Scenario& sc) {
    using namespace scenario_detail;
    const auto& j = member(sc.root, "scenario", "psd");
    const std::string ctx = "psd";
    check_keys(j, ctx, {"series_csv", "segment_length", "overlap"}, sc);
    PsdRequest req;
    auto it = j.find("series_csv");
    if (it != j.end()) {
        if (!it->is_string()) fail(ctx, "'series_csv' must be a string");
        req.series_csv = it->get<std::string>();
    }
    const long seg = get_integer(j, ctx, "segment_length");
    if (seg < 4 || (seg & (seg - 1)) != 0)
        fail(ctx, "'segment_length' must be a power of two >= 4");
    req.segment_length = static_cast<std::size_t>(seg);
    req.overlap = get_number_or(j, ctx, "overlap", 0.5);
    if (!(req.overlap >= 0.0) || !(req.overlap <= 0.9))
        fail(ctx, "'overlap' must be in [0, 0.9]");
    return req;
}

struct StackRequest {
    double density_a, density_b;
    double lx, ly;
    int n_pairs;
    double r_c;
    double d_min, d_max;
    Objective objective = Objective::eta_hat;
};

inline StackRequest parse_stack(Scenario& sc) {
    using namespace scenario_detail;
    const auto& j = member(sc.root, "scenario", "stack");
    const std::string ctx = "stack";
    check_keys(j, ctx,
               {"density_a_kg_m3", "density_b_kg_m3", "lx_m", "ly_m", "n_pairs", "r_c_m",
                "d_min_m", "d_max_m", "objective"},
               sc);
    StackRequest req;
    req.density_a = get_number(j, ctx, "density_a_kg_m3");
    req.density_b = get_number(j, ctx, "density_b_kg_m3");
    req.lx = get_number(j, ctx, "lx_m");
    req.ly = get_number(j, ctx, "ly_m");
    req.n_pairs = static_cast<int>(get_integer(j, ctx, "n_pairs"));
    req.r_c = get_number(j, ctx, "r_c_m");
    req.d_min = get_number(j, ctx, "d_min_m");
    req.d_max = get_number(j, ctx, "d_max_m");
    const std::string obj = get_string_or(j, ctx, "objective", "eta_hat");
    if (obj == "eta_hat")
        req.objective = Objective::eta_hat;
    else if (obj == "eta_hat_per_mass")
        req.objective = Objective::eta_hat_per_mass;
    else
        fail(ctx, "objective must be eta_hat or eta_hat_per_mass");
    if (!(req.r_c > 0.0) || !(req.d_min > 0.0) || !(req.d_max >= req.d_min))
        fail(ctx, "need r_c_m > 0 and 0 < d_min_m <= d_max_m");
    try {
        validate(StackDesign{req.lx, req.ly, req.density_a, req.density_b, req.d_min,
                             req.n_pairs});
    } catch (const std::invalid_argument& e) {
        fail(ctx, e.what());
    }
    return req;
}

inline std::vector<std::string> parse_envelope_inputs(Scenario& sc) {
    using namespace scenario_detail;
    const auto& j = member(sc.root, "scenario", "envelope");
    const std::string ctx = "envelope";
    check_keys(j, ctx, {"curves"}, sc);
    const auto& curves = member(j, ctx, "curves");
    if (!curves.is_array() || curves.empty()) fail(ctx, "'curves' must be a non-empty list");
    std::vector<std::string> out;
    for (const auto& c : curves) {
        if (!c.is_string()) fail(ctx, "'curves' entries must be file paths");
        out.push_back(c.get<std::string>());
    }
    return out;
}

inline std::optional<std::string> parse_output_path(Scenario& sc,
                                                    const std::optional<std::string>& override) {
    using namespace scenario_detail;
    if (override) return override;
    auto it = sc.root.find("output");
    if (it == sc.root.end()) return std::nullopt;
    check_keys(*it, "output", {"path"}, sc);
    return get_string(*it, "output", "path");
}

// --- whole-file validation -----------------------------------------------------

// Walk every recognized section; a present section must be fully well-formed
// regardless of which subcommand will run. Returns the description string of
// the scenario if present.
inline void validate_scenario(Scenario& sc) {
    using namespace scenario_detail;
    check_keys(sc.root, "scenario",
               {"description", "provenance", "constants", "distribution", "collapse", "grid",
                "quadrature", "experiment", "dp", "simulation", "psd", "stack", "envelope",
                "output"},
               sc);
    const auto& r = sc.root;
    if (r.contains("description") && !r["description"].is_string())
        fail("scenario", "'description' must be a string");
    if (r.contains("provenance") && !r["provenance"].is_string())
        fail("scenario", "'provenance' must be a string");
    parse_constants(sc);
    if (r.contains("distribution")) parse_distribution(r["distribution"], sc);
    if (r.contains("collapse")) parse_collapse(sc);
    if (r.contains("grid")) parse_grid(sc);
    if (r.contains("quadrature")) parse_quadrature(sc);
    if (r.contains("experiment")) parse_experiment(sc);
    if (r.contains("dp")) parse_dp(sc);
    if (r.contains("simulation")) parse_simulation(sc);
    if (r.contains("psd")) parse_psd(sc);
    if (r.contains("stack")) parse_stack(sc);
    if (r.contains("envelope")) parse_envelope_inputs(sc);
    if (r.contains("output")) parse_output_path(sc, std::nullopt);
}

inline Scenario load_scenario(const std::filesystem::path& path, bool strict = true) {
    if (!std::filesystem::exists(path))
        throw IoError("scenario file not found: " + path.string());
    Scenario sc;
    sc.strict = strict;
    sc.dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    const std::string text = read_file(path);
    try {
        sc.root = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError("cannot parse " + path.string() + ": " + e.what());
    }
    if (!sc.root.is_object()) throw ScenarioError(path.string() + ": top level must be a table");
    validate_scenario(sc);
    return sc;
}

}  // namespace csl
