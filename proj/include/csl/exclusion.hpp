#pragma once

// Exclusion bounds lambda_upper(r_C) implied by null experimental results.
//
// Every bounded observable is linear in lambda, so each bound is an exact
// algebraic inversion (no root finding):
//   mechanical : lambda <= ceiling / (2 hbar^2 eta_hat(d, r_C))
//   calorimeter: lambda <= (4/3) heat_leak r_C^2 m_N^2 / hbar^2
//   cloud      : lambda <= (4/3) rate_ceiling r_C^2 m_N^2 / (hbar^2 m_atom)
//
// Curve serialization contract (used by tests and downstream plotting):
//   CSV header  r_C_m,lambda_upper_Hz
//   JSON        { "label": ..., "metadata": {...}, "points": [{"r_C_m":...,
//               "lambda_upper_Hz":...}, ...] }

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "csl/budgets.hpp"
#include "csl/constants.hpp"
#include "csl/diffusion.hpp"
#include "csl/errors.hpp"
#include "csl/geometry.hpp"
#include "csl/io.hpp"

namespace csl {

struct MechanicalExperiment {
    ResonatorSpec resonator;
    MassDistribution test_mass;
    double excess_psd_ceiling;  // N^2/Hz, resolvable excess above the thermal budget
};

struct CalorimeterExperiment {
    CalorimeterSpec spec;
};

struct CloudExperiment {
    CloudSpec spec;
};

struct ExperimentSpec {
    std::variant<MechanicalExperiment, CalorimeterExperiment, CloudExperiment> kind;
    std::string label;
};

inline void validate(const ExperimentSpec& e) {
    struct V {
        void operator()(const MechanicalExperiment& m) const {
            validate(m.resonator);
            validate(m.test_mass);
            if (!(m.excess_psd_ceiling > 0.0))
                throw std::invalid_argument("mechanical: excess PSD ceiling must be positive");
            // Single rigid mode assumption: the distribution carries the mode mass.
            const double md = total_mass(m.test_mass);
            if (std::abs(md - m.resonator.mass) > 1e-6 * m.resonator.mass)
                throw std::invalid_argument(
                    "mechanical: test-mass distribution mass (" + std::to_string(md) +
                    " kg) must equal the resonator mass (" + std::to_string(m.resonator.mass) +
                    " kg) within 1e-6 relative");
        }
        void operator()(const CalorimeterExperiment& c) const { validate(c.spec); }
        void operator()(const CloudExperiment& c) const { validate(c.spec); }
    };
    std::visit(V{}, e.kind);
}

struct CurvePoint {
    double r_c;           // m
    double lambda_upper;  // Hz
};

struct ExclusionCurve {
    std::string label;
    std::vector<CurvePoint> points;      // r_c strictly increasing
    nlohmann::json metadata = nlohmann::json::object();
};

// Upper bound on lambda at one correlation length. Disengaged optional means
// "no constraint" (degenerate eta_hat = 0); infinities are never returned.
inline std::optional<double> lambda_upper(const ExperimentSpec& spec, double r_c,
                                          const QuadratureOptions& opts = {},
                                          const PhysicalConstants& pc = constants()) {
    if (!(r_c > 0.0) || !std::isfinite(r_c))
        throw std::invalid_argument("lambda_upper: r_c must be positive and finite");
    validate(spec);

    struct V {
        double r_c;
        const QuadratureOptions& opts;
        const PhysicalConstants& pc;
        std::optional<double> operator()(const MechanicalExperiment& m) const {
            const auto red = eta_hat_csl(m.test_mass, r_c, opts, pc);
            if (!(red.eta_hat > 0.0)) return std::nullopt;
            return m.excess_psd_ceiling / (2.0 * pc.hbar * pc.hbar * red.eta_hat);
        }
        std::optional<double> operator()(const CalorimeterExperiment& c) const {
            const double mn = pc.m_nucleon;
            return (4.0 / 3.0) * c.spec.heat_leak_ceiling * r_c * r_c * mn * mn /
                   (pc.hbar * pc.hbar);
        }
        std::optional<double> operator()(const CloudExperiment& c) const {
            const double mn = pc.m_nucleon;
            return (4.0 / 3.0) * c.spec.energy_rate_ceiling * r_c * r_c * mn * mn /
                   (pc.hbar * pc.hbar * c.spec.atom_mass);
        }
    };
    return std::visit(V{r_c, opts, pc}, spec.kind);
}

// Log-spaced default grid 1e-9 .. 1e-4 m, 61 points.
inline std::vector<double> default_rc_grid(double lo = 1e-9, double hi = 1e-4, int n = 61) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw std::invalid_argument("grid: need 0 < min < max and at least 2 points");
    std::vector<double> g(n);
    const double step = (std::log10(hi) - std::log10(lo)) / (n - 1);
    for (int i = 0; i < n; ++i) g[i] = std::pow(10.0, std::log10(lo) + i * step);
    return g;
}

// Sweep lambda_upper over a grid of r_C values. Grid points are evaluated in
// parallel; the output ordering is fixed by the grid, not the schedule.
// Quadrature failures are rethrown with the failing r_C identified.
inline ExclusionCurve exclusion_curve(const ExperimentSpec& spec, const std::vector<double>& grid,
                                      const QuadratureOptions& opts = {},
                                      const PhysicalConstants& pc = constants()) {
    if (grid.empty()) throw std::invalid_argument("exclusion_curve: empty r_C grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw std::invalid_argument("exclusion_curve: grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("exclusion_curve: grid must be strictly increasing");
    }
    validate(spec);

    std::vector<std::optional<double>> values(grid.size());
    std::vector<std::exception_ptr> errors(grid.size());

    const unsigned n_threads =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(grid.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < grid.size(); i = next.fetch_add(1)) {
            try {
                values[i] = lambda_upper(spec, grid[i], opts, pc);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const QuadratureError& e) {
                throw QuadratureError("at r_C = " + format_double(grid[i]) + " m: " + e.what(),
                                      e.best_estimate, e.error_bound);
            } catch (const std::exception& e) {
                throw NumericalError("at r_C = " + format_double(grid[i]) + " m: " + e.what());
            }
        }
        if (!values[i])
            throw NumericalError("no constraint at r_C = " + format_double(grid[i]) +
                                 " m (eta_hat = 0); curve invariant requires finite bounds");
    }

    ExclusionCurve curve;
    curve.label = spec.label;
    curve.points.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) curve.points.push_back({grid[i], *values[i]});
    curve.metadata["kind"] = "exclusion_curve";
    curve.metadata["tolerances"] = {{"quad_rel_tol", opts.rel_tol}};
    return curve;
}

// Pointwise minimum over curves sharing one grid; metadata records the
// winning curve at each grid point. Mismatched grids are an error (no silent
// interpolation).
inline ExclusionCurve envelope(const std::vector<ExclusionCurve>& curves) {
    if (curves.empty()) throw std::invalid_argument("envelope: no curves");
    const auto& first = curves.front();
    for (const auto& c : curves) {
        if (c.points.size() != first.points.size())
            throw std::invalid_argument("envelope: curves are on different grids");
        for (std::size_t i = 0; i < c.points.size(); ++i)
            if (c.points[i].r_c != first.points[i].r_c)
                throw std::invalid_argument("envelope: curves are on different grids");
    }

    ExclusionCurve out;
    out.label = "envelope";
    out.points = first.points;
    std::vector<std::string> winners(first.points.size(), first.label);
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.points.size(); ++i) {
            if (c.points[i].lambda_upper < out.points[i].lambda_upper) {
                out.points[i].lambda_upper = c.points[i].lambda_upper;
                winners[i] = c.label;
            }
        }
    }
    out.metadata["kind"] = "envelope";
    out.metadata["winners"] = winners;
    return out;
}

// --- serialization -----------------------------------------------------------

inline std::string curve_to_csv(const ExclusionCurve& c) {
    std::string s = "r_C_m,lambda_upper_Hz\n";
    for (const auto& p : c.points)
        s += format_double(p.r_c) + "," + format_double(p.lambda_upper) + "\n";
    return s;
}

inline nlohmann::json curve_to_json(const ExclusionCurve& c) {
    nlohmann::json j;
    j["label"] = c.label;
    j["metadata"] = c.metadata;
    auto pts = nlohmann::json::array();
    for (const auto& p : c.points)
        pts.push_back({{"r_C_m", p.r_c}, {"lambda_upper_Hz", p.lambda_upper}});
    j["points"] = pts;
    return j;
}

inline ExclusionCurve curve_from_json(const nlohmann::json& j) {
    ExclusionCurve c;
    c.label = j.at("label").get<std::string>();
    if (j.contains("metadata")) c.metadata = j.at("metadata");
    for (const auto& p : j.at("points"))
        c.points.push_back(
            {p.at("r_C_m").get<double>(), p.at("lambda_upper_Hz").get<double>()});
    for (std::size_t i = 0; i + 1 < c.points.size(); ++i)
        if (!(c.points[i].r_c < c.points[i + 1].r_c))
            throw std::invalid_argument("curve: r_C values must be strictly increasing");
    for (const auto& p : c.points)
        if (!(p.lambda_upper > 0.0) || !std::isfinite(p.lambda_upper))
            throw std::invalid_argument("curve: lambda_upper must be positive and finite");
    return c;
}

}  // namespace csl
