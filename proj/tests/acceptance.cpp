// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Tolerances are pinned in code next to each check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "csl/budgets.hpp"
#include "csl/constants.hpp"
#include "csl/diffusion.hpp"
#include "csl/exclusion.hpp"
#include "csl/geometry.hpp"
#include "csl/io.hpp"
#include "csl/psd.hpp"
#include "csl/scenario.hpp"
#include "csl/simulator.hpp"
#include "csl/stack_opt.hpp"
#include "oracles.hpp"

namespace {

using namespace csl;
namespace fs = std::filesystem;

const fs::path kScenarios = CSLB_SCENARIOS_DIR;

double rel_dev(double a, double b) { return std::abs(a - b) / std::abs(b); }

// 1. Point-particle closed form to 1e-6 relative on three decades of r_C.
std::string point_particle() {
    const double m0 = constants().m_nucleon;
    double worst = 0.0;
    for (double r_c : {1e-8, 1e-7, 1e-6}) {
        const auto red = eta_hat_csl({Point{m0}}, r_c);
        worst = std::max(worst, rel_dev(red.eta_hat, 1.0 / (2.0 * r_c * r_c)));
    }
    if (worst > 1e-6) return "max rel dev " + format_double(worst) + " exceeds 1e-6";
    return "";
}

// 2. Real-space Monte-Carlo oracle vs quadrature, 5 cuboids + 5 spheres
//    spanning L/r_C in [0.1, 30], >= 1e7 pairs each, agreement within
//    3 standard errors.
std::string realspace_oracle() {
    const double r_c = 1e-7;
    const std::size_t n_pairs = 10'000'000;
    std::vector<std::pair<std::string, MassDistribution>> shapes;
    for (double ratio : {0.1, 1.0, 3.0, 10.0, 30.0}) {
        shapes.emplace_back("cuboid L/r_C=" + format_double(ratio),
                            MassDistribution{Cuboid{1e-12, 5.0 * r_c, 5.0 * r_c, ratio * r_c}});
        shapes.emplace_back("sphere L/r_C=" + format_double(ratio),
                            MassDistribution{Sphere{1e-12, 0.5 * ratio * r_c}});
    }
    std::uint64_t seed = 20240817;
    std::string failures;
    for (const auto& [name, dist] : shapes) {
        const auto red = eta_hat_csl(dist, r_c);
        const auto mc = oracles::eta_hat_realspace_mc(dist, r_c, n_pairs, seed++,
                                                      constants().m_nucleon);
        const double dev = std::abs(red.eta_hat - mc.value);
        if (dev > 3.0 * mc.stderr_)
            failures += " [" + name + ": dev " + format_double(dev) + " > 3 sigma = " +
                        format_double(3.0 * mc.stderr_) + "]";
    }
    return failures;
}

// 3. Heating correspondence: inverting the heating law at 1e-11 W/kg and
//    r_C = 1e-7 m gives lambda in [2.55, 3.9]e-11 Hz.
std::string heating_correspondence() {
    ExperimentSpec spec;
    spec.kind = CalorimeterExperiment{CalorimeterSpec{1.0, 1e-11}};
    spec.label = "calorimeter";
    const auto lam = lambda_upper(spec, 1e-7);
    if (!lam) return "no constraint returned";
    if (*lam < 2.55e-11 || *lam > 3.9e-11)
        return "lambda " + format_double(*lam) + " outside [2.55e-11, 3.9e-11]";
    return "";
}

// 4. Scaling laws: (a) mass-squared in the small-size regime to 1e-3,
//    (b) eta_hat/m halves when the slab thickness doubles at Lz >= 30 r_C
//    within 2%, (c) the optimal plate thickness lies within a factor 3 of r_C.
std::string scaling_laws() {
    std::string failures;
    const double r_c = 1e-7;

    for (double c : {2.0, 5.0}) {
        const auto base = eta_hat_csl({Sphere{1e-18, 6e-9}}, r_c);
        const auto scaled = eta_hat_csl({Sphere{c * 1e-18, 6e-9}}, r_c);
        if (rel_dev(scaled.eta_hat / base.eta_hat, c * c) > 1e-3)
            failures += " [mass scaling by " + format_double(c) + " violates the c^2 law]";
    }

    {
        const double rho = 19300.0, foot = 5e-7;
        const double lz1 = 30.0 * r_c, lz2 = 60.0 * r_c;
        const auto a = eta_hat_csl({Cuboid{rho * foot * foot * lz1, foot, foot, lz1}}, r_c);
        const auto b = eta_hat_csl({Cuboid{rho * foot * foot * lz2, foot, foot, lz2}}, r_c);
        const double ratio = (b.eta_hat / lz2) / (a.eta_hat / lz1);  // mass ~ lz
        if (std::abs(ratio - 0.5) > 0.02 * 0.5)
            failures += " [slab eta_hat/m ratio " + format_double(ratio) + " not 0.5 +/- 2%]";
    }

    {
        const double rho = 2000.0, mass = 1e-14;
        double best_t = 0.0, best_v = -1.0;
        for (int i = 0; i <= 48; ++i) {
            const double t = r_c * std::pow(10.0, -1.0 + 2.0 * i / 48.0);
            const double foot = std::sqrt(mass / (rho * t));
            const auto red = eta_hat_csl({Cuboid{mass, foot, foot, t}}, r_c);
            if (red.eta_hat > best_v) {
                best_v = red.eta_hat;
                best_t = t;
            }
        }
        if (best_t < r_c / 3.0 || best_t > 3.0 * r_c)
            failures +=
                " [optimal plate thickness " + format_double(best_t) + " outside factor 3]";
    }
    return failures;
}

// 5. Multilayer enhancement for the high-contrast pair at r_C = 1e-7 m, and
//    its reversal at r_C = 10 d* against the solid dense-material block of
//    the same envelope.
std::string multilayer_enhancement() {
    const double r_c = 1e-7;
    const auto result = optimize_thickness(19300.0, 2000.0, 2e-5, 2e-5, 30, r_c, {1e-8, 1e-6},
                                           Objective::eta_hat);
    const double d_star = result.best.layer_thickness;
    std::string failures;
    if (!result.converged) failures += " [optimizer did not converge]";
    if (!(r_c <= 3.0 * d_star))
        failures += " [r_C <= 3 d* violated: d* = " + format_double(d_star) + "]";
    const auto tuned = enhancement_ratios(result.best, r_c);
    if (!(tuned.vs_same_mass > 1.0))
        failures +=
            " [no enhancement vs same-mass baseline: " + format_double(tuned.vs_same_mass) + "]";
    const auto detuned = enhancement_ratios(result.best, 10.0 * d_star);
    if (!(detuned.vs_dense_bulk < 1.0))
        failures += " [stack does not underperform the dense-bulk baseline at 10 d*: " +
                    format_double(detuned.vs_dense_bulk) + "]";
    return failures;
}

// 6. DP shape independence: eta_DP/m identical across sphere, cuboid and
//    cylinder of equal density, to 1e-12 relative.
std::string dp_shape_independence() {
    const double rho = 19300.0;
    const DPParams p{1e-7, 3.16e-10, rho};
    const double r_sph = std::cbrt(3.0 * 1e-3 / (4.0 * std::numbers::pi * rho));
    const double cyl_r = 1e-3, cyl_h = 2e-3;
    const MassDistribution shapes[] = {
        {Sphere{1e-3, r_sph}},
        {Cuboid{rho * 1e-9, 1e-3, 1e-3, 1e-3}},
        {Cylinder{rho * std::numbers::pi * cyl_r * cyl_r * cyl_h, cyl_r, cyl_h, Axis::z}},
    };
    const double ref = eta_dp(shapes[0], p) / total_mass(shapes[0]);
    for (const auto& s : shapes) {
        const double per_mass = eta_dp(s, p) / total_mass(s);
        if (rel_dev(per_mass, ref) > 1e-12)
            return "eta_DP/m differs across shapes by " + format_double(rel_dev(per_mass, ref));
    }
    return "";
}

// 7. Simulator statistical suite: equipartition within 3 sigma over >= 200
//    relaxation times; PSD-inferred S_ff within 10% of the injected value
//    over 50 realizations; bit-identical deterministic replay.
std::string simulator_suite() {
    std::string failures;

    {  // equipartition
        SimConfig cfg;
        cfg.resonator = {1e-12, 2.0 * std::numbers::pi * 100.0, 20.0, 0.1};
        cfg.s_ff_total = force_noise_psd(cfg.resonator, 0.0).thermal;
        cfg.dt = 4e-4;
        const double tau = 2.0 * cfg.resonator.quality / cfg.resonator.omega;
        cfg.duration = 220.0 * tau;
        cfg.seed = 424242;
        const auto ts = simulate(cfg);
        const auto skip = static_cast<std::size_t>(10.0 * tau / cfg.dt);
        double var = 0.0;
        for (std::size_t i = skip; i < ts.x.size(); ++i) var += ts.x[i] * ts.x[i];
        var /= static_cast<double>(ts.x.size() - skip);
        const auto& r = cfg.resonator;
        const double expected = constants().k_B * r.temperature / (r.mass * r.omega * r.omega);
        const double sigma = expected * std::sqrt(2.0 / (cfg.duration / tau));
        if (std::abs(var - expected) > 3.0 * sigma)
            failures += " [equipartition: <x^2> = " + format_double(var) + " vs " +
                        format_double(expected) + " +/- " + format_double(sigma) + "]";
    }

    {  // PSD-inferred force noise over 50 realizations
        SimConfig cfg;
        cfg.resonator = {1e-12, 2.0 * std::numbers::pi * 50.0, 10.0, 0.3};
        cfg.s_ff_total = 1e-36;
        cfg.dt = 1e-3;
        cfg.duration = 35.0;
        double acc = 0.0;
        std::size_t count = 0;
        for (int realization = 0; realization < 50; ++realization) {
            cfg.seed = 9000 + realization;
            const auto ts = simulate(cfg);
            const auto est = psd_welch(ts, 4096, 0.5);
            for (std::size_t j = 0; j < est.frequency.size(); ++j) {
                const double f = est.frequency[j];
                if (f < 5.0 || f > 120.0) continue;
                acc += force_psd_from_position_psd(est.psd[j], f, cfg.resonator);
                ++count;
            }
        }
        const double inferred = acc / static_cast<double>(count);
        if (rel_dev(inferred, cfg.s_ff_total) > 0.10)
            failures += " [PSD-inferred S_ff " + format_double(inferred) + " not within 10% of " +
                        format_double(cfg.s_ff_total) + "]";
    }

    {  // deterministic replay
        SimConfig cfg;
        cfg.resonator = {1e-12, 2.0 * std::numbers::pi * 100.0, 20.0, 0.1};
        cfg.s_ff_total = force_noise_psd(cfg.resonator, 0.0).thermal;
        cfg.dt = 4e-4;
        cfg.duration = 3.0;
        cfg.seed = 777;
        const auto a = simulate(cfg);
        const auto b = simulate(cfg);
        if (a.x.size() != b.x.size() ||
            std::memcmp(a.x.data(), b.x.data(), a.x.size() * sizeof(double)) != 0)
            failures += " [replay with a fixed seed is not bit-identical]";
    }

    return failures;
}

// 8. Unit-discipline smoke test: curves computed from the bundled plausible
//    scenarios lie within 2 orders of magnitude of the reference overlays.
//    (The paper-quoted headline bounds are NOT recomputable from the paper
//    alone; the overlays are labeled reference values.)
std::string overlay_proximity() {
    struct Pair {
        const char* scenario;
        const char* overlay;
    };
    const Pair pairs[] = {
        {"cantilever.json", "overlays/cantilever_bounds.json"},
        {"lisa_pathfinder.json", "overlays/lisa_pathfinder_bound.json"},
        {"levitated_magnetic.json", "overlays/levitated_bound.json"},
    };
    std::string failures;
    for (const auto& pr : pairs) {
        auto sc = load_scenario(kScenarios / pr.scenario);
        const auto pc = parse_constants(sc);
        const auto opts = parse_quadrature(sc);
        const auto spec = parse_experiment(sc);
        const auto grid = parse_grid(sc);
        const auto curve = exclusion_curve(spec, grid, opts, pc);
        const auto overlay =
            curve_from_json(nlohmann::json::parse(read_file(kScenarios / pr.overlay)));
        for (const auto& op : overlay.points) {
            double computed = 0.0;
            bool found = false;
            for (const auto& cp : curve.points) {
                if (rel_dev(cp.r_c, op.r_c) < 1e-9) {
                    computed = cp.lambda_upper;
                    found = true;
                }
            }
            if (!found) {
                failures += std::string(" [") + pr.scenario + ": grid misses overlay r_C " +
                            format_double(op.r_c) + "]";
                continue;
            }
            const double decades = std::abs(std::log10(computed / op.lambda_upper));
            if (decades > 2.0)
                failures += std::string(" [") + pr.scenario + " at r_C " +
                            format_double(op.r_c) + ": computed " + format_double(computed) +
                            " vs overlay " + format_double(op.lambda_upper) + " (" +
                            format_double(decades) + " decades)]";
        }
    }
    return failures;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<std::string()> run;
    };
    const std::vector<Criterion> criteria = {
        {"1. point-particle closed form (1e-6 rel)", point_particle},
        {"2. real-space Monte-Carlo oracle (3 sigma, 1e7 pairs)", realspace_oracle},
        {"3. heating correspondence (lambda in [2.55, 3.9]e-11)", heating_correspondence},
        {"4. scaling laws (mass^2 1e-3; slab halving 2%; plate optimum x3)", scaling_laws},
        {"5. multilayer enhancement and large-r_C reversal", multilayer_enhancement},
        {"6. DP shape independence (1e-12 rel)", dp_shape_independence},
        {"7. simulator suite (equipartition 3 sigma; S_ff 10%; replay)", simulator_suite},
        {"8. bundled curves within 2 decades of reference overlays", overlay_proximity},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string reason;
        try {
            reason = c.run();
        } catch (const std::exception& e) {
            reason = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (reason.empty()) {
            std::printf("[PASS] %s  (%.2f s)\n", c.name, secs);
        } else {
            std::printf("[FAIL] %s  (%.2f s)%s\n", c.name, secs, reason.c_str());
            ++failed;
        }
        std::fflush(stdout);
    }
    if (failed != 0) std::printf("%d criterion(s) failed\n", failed);
    return failed == 0 ? 0 : 1;
}
