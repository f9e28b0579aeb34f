#pragma once

// Parametric rigid-body mass distributions rho(r) and their Fourier
// transforms rho~(k) = integral d^3x e^{i k.r} rho(r) (form factors), with
// closed forms per primitive.
//
// Conventions:
//  - every primitive is centered at the origin; Union applies rigid
//    translations (no rotations; a rotated body is expressed by constructing
//    it in rotated coordinates),
//  - the multilayer stack and the default cylinder axis run along z, which is
//    also the fixed derivative axis of the diffusion kernel,
//  - all lengths in m, masses in kg, densities in kg/m^3.

#include <cmath>
#include <complex>
#include <numbers>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace csl {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

enum class Axis { x, y, z };

struct Point {
    double mass;  // kg
};

struct Sphere {
    double mass;    // kg
    double radius;  // m
};

struct Cuboid {
    double mass;  // kg
    double lx, ly, lz;  // m
};

struct Cylinder {
    double mass;    // kg
    double radius;  // m
    double height;  // m
    Axis axis = Axis::z;
};

struct Layer {
    double density;    // kg/m^3
    double thickness;  // m
};

// Alternating-material test mass: rectangular footprint lx*ly, layers stacked
// along z, centered so the stack midplane is z=0.
struct Multilayer {
    double lx, ly;  // m
    std::vector<Layer> layers;  // bottom to top
};

struct MassDistribution;

struct UnionPart;

// Rigid union of translated sub-distributions.
struct Union {
    std::vector<UnionPart> parts;
};

struct MassDistribution {
    std::variant<Point, Sphere, Cuboid, Cylinder, Multilayer, Union> shape;
};

struct UnionPart {
    MassDistribution dist;
    Vec3 offset;  // m
};

namespace detail {

inline bool finite(double v) { return std::isfinite(v); }

// sin(x)/x with a series expansion near zero (the eta integrand weights small
// k heavily when r_C is large; the direct ratio is 0/0 at the origin).
inline double sinc(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}

// Sphere radial factor 3 (sin x - x cos x) / x^3, normalized to 1 at x=0.
// Below |x| = 0.05 the direct form loses ~5 digits to cancellation; the
// series keeps full precision.
inline double sphere_factor(double x) {
    const double ax = std::abs(x);
    if (ax < 0.05) {
        const double x2 = x * x;
        return 1.0 - x2 / 10.0 + x2 * x2 / 280.0 - x2 * x2 * x2 / 15120.0;
    }
    return 3.0 * (std::sin(x) - x * std::cos(x)) / (x * x * x);
}

// Cylinder radial factor 2 J1(x) / x, normalized to 1 at x=0.
inline double cylinder_radial_factor(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 8.0 + x2 * x2 / 192.0;
    }
    return 2.0 * std::cyl_bessel_j(1.0, ax) / ax;
}

// Layer geometry resolved to absolute positions: layer i spans
// [z_bottom_i, z_bottom_i + thickness_i], bottom of the stack at -H/2.
struct ResolvedLayer {
    double density;
    double thickness;
    double center;
};

inline std::vector<ResolvedLayer> resolve_layers(const Multilayer& m) {
    double height = 0.0;
    for (const auto& l : m.layers) height += l.thickness;
    std::vector<ResolvedLayer> out;
    out.reserve(m.layers.size());
    double z = -0.5 * height;
    for (const auto& l : m.layers) {
        out.push_back({l.density, l.thickness, z + 0.5 * l.thickness});
        z += l.thickness;
    }
    return out;
}

// 1D transform of the stack density profile along z:
//   S(kz) = sum_i rho_i d_i e^{i kz c_i} sinc(kz d_i / 2),  S(0) = mass/area.
inline std::complex<double> stack_transform(const std::vector<ResolvedLayer>& layers, double kz) {
    std::complex<double> s{0.0, 0.0};
    for (const auto& l : layers) {
        const double amp = l.density * l.thickness * sinc(0.5 * kz * l.thickness);
        s += amp * std::complex<double>(std::cos(kz * l.center), std::sin(kz * l.center));
    }
    return s;
}

}  // namespace detail

inline double total_mass(const MassDistribution& d);

namespace detail {

struct TotalMassVisitor {
    double operator()(const Point& p) const { return p.mass; }
    double operator()(const Sphere& s) const { return s.mass; }
    double operator()(const Cuboid& c) const { return c.mass; }
    double operator()(const Cylinder& c) const { return c.mass; }
    double operator()(const Multilayer& m) const {
        double areal = 0.0;
        for (const auto& l : m.layers) areal += l.density * l.thickness;
        return m.lx * m.ly * areal;
    }
    double operator()(const Union& u) const {
        double sum = 0.0;
        for (const auto& part : u.parts) sum += total_mass(part.dist);
        return sum;
    }
};

}  // namespace detail

inline double total_mass(const MassDistribution& d) {
    return std::visit(detail::TotalMassVisitor{}, d.shape);
}

// Throws std::invalid_argument when a field violates the type invariants.
inline void validate(const MassDistribution& d) {
    struct V {
        void operator()(const Point& p) const {
            if (!(p.mass > 0.0) || !detail::finite(p.mass))
                throw std::invalid_argument("point: mass must be positive and finite");
        }
        void operator()(const Sphere& s) const {
            if (!(s.mass > 0.0) || !(s.radius > 0.0) || !detail::finite(s.mass) ||
                !detail::finite(s.radius))
                throw std::invalid_argument("sphere: mass and radius must be positive and finite");
        }
        void operator()(const Cuboid& c) const {
            if (!(c.mass > 0.0) || !(c.lx > 0.0) || !(c.ly > 0.0) || !(c.lz > 0.0))
                throw std::invalid_argument("cuboid: mass and edge lengths must be positive");
            if (!detail::finite(c.mass) || !detail::finite(c.lx) || !detail::finite(c.ly) ||
                !detail::finite(c.lz))
                throw std::invalid_argument("cuboid: non-finite field");
        }
        void operator()(const Cylinder& c) const {
            if (!(c.mass > 0.0) || !(c.radius > 0.0) || !(c.height > 0.0))
                throw std::invalid_argument("cylinder: mass, radius, height must be positive");
            if (!detail::finite(c.mass) || !detail::finite(c.radius) || !detail::finite(c.height))
                throw std::invalid_argument("cylinder: non-finite field");
        }
        void operator()(const Multilayer& m) const {
            if (!(m.lx > 0.0) || !(m.ly > 0.0))
                throw std::invalid_argument("multilayer: footprint must be positive");
            if (m.layers.empty())
                throw std::invalid_argument("multilayer: needs at least one layer");
            for (const auto& l : m.layers)
                if (!(l.density > 0.0) || !(l.thickness > 0.0) || !detail::finite(l.density) ||
                    !detail::finite(l.thickness))
                    throw std::invalid_argument(
                        "multilayer: layer density and thickness must be positive and finite");
        }
        void operator()(const Union& u) const {
            if (u.parts.empty())
                throw std::invalid_argument("union: needs at least one part");
            for (const auto& part : u.parts) {
                if (!detail::finite(part.offset.x) || !detail::finite(part.offset.y) ||
                    !detail::finite(part.offset.z))
                    throw std::invalid_argument("union: offsets must be finite");
                validate(part.dist);
            }
        }
    };
    std::visit(V{}, d.shape);
}

namespace detail {

// Evaluation core without the per-call validation; quadrature loops call this
// after validating once.
inline std::complex<double> form_factor_unchecked(const MassDistribution& d, const Vec3& k);

}  // namespace detail

// Form factor rho~(k); rho~(0) equals the total mass for every variant.
inline std::complex<double> form_factor(const MassDistribution& d, const Vec3& k) {
    if (!detail::finite(k.x) || !detail::finite(k.y) || !detail::finite(k.z))
        throw std::invalid_argument("form_factor: non-finite wavevector");
    validate(d);
    return detail::form_factor_unchecked(d, k);
}

namespace detail {

inline std::complex<double> form_factor_unchecked(const MassDistribution& d, const Vec3& k) {
    struct V {
        const Vec3& k;
        std::complex<double> operator()(const Point& p) const {
            return {p.mass, 0.0};
        }
        std::complex<double> operator()(const Sphere& s) const {
            const double kr = norm(k) * s.radius;
            return {s.mass * detail::sphere_factor(kr), 0.0};
        }
        std::complex<double> operator()(const Cuboid& c) const {
            const double v = c.mass * detail::sinc(0.5 * k.x * c.lx) *
                             detail::sinc(0.5 * k.y * c.ly) * detail::sinc(0.5 * k.z * c.lz);
            return {v, 0.0};
        }
        std::complex<double> operator()(const Cylinder& c) const {
            double k_axial, k_radial;
            switch (c.axis) {
                case Axis::x:
                    k_axial = k.x;
                    k_radial = std::hypot(k.y, k.z);
                    break;
                case Axis::y:
                    k_axial = k.y;
                    k_radial = std::hypot(k.x, k.z);
                    break;
                default:
                    k_axial = k.z;
                    k_radial = std::hypot(k.x, k.y);
            }
            const double v = c.mass * detail::cylinder_radial_factor(k_radial * c.radius) *
                             detail::sinc(0.5 * k_axial * c.height);
            return {v, 0.0};
        }
        std::complex<double> operator()(const Multilayer& m) const {
            const auto layers = detail::resolve_layers(m);
            const double transverse =
                m.lx * m.ly * detail::sinc(0.5 * k.x * m.lx) * detail::sinc(0.5 * k.y * m.ly);
            return transverse * detail::stack_transform(layers, k.z);
        }
        std::complex<double> operator()(const Union& u) const {
            std::complex<double> sum{0.0, 0.0};
            for (const auto& part : u.parts) {
                const double phase = dot(k, part.offset);
                sum += std::complex<double>(std::cos(phase), std::sin(phase)) *
                       form_factor_unchecked(part.dist, k);
            }
            return sum;
        }
    };
    return std::visit(V{k}, d.shape);
}

}  // namespace detail

// Largest distance from the origin to any mass element; the characteristic
// size used by the small-body limit gate.
inline double bounding_radius(const MassDistribution& d) {
    struct V {
        double operator()(const Point&) const { return 0.0; }
        double operator()(const Sphere& s) const { return s.radius; }
        double operator()(const Cuboid& c) const {
            return 0.5 * std::sqrt(c.lx * c.lx + c.ly * c.ly + c.lz * c.lz);
        }
        double operator()(const Cylinder& c) const {
            return std::sqrt(c.radius * c.radius + 0.25 * c.height * c.height);
        }
        double operator()(const Multilayer& m) const {
            double h = 0.0;
            for (const auto& l : m.layers) h += l.thickness;
            return 0.5 * std::sqrt(m.lx * m.lx + m.ly * m.ly + h * h);
        }
        double operator()(const Union& u) const {
            double r = 0.0;
            for (const auto& part : u.parts)
                r = std::max(r, norm(part.offset) + bounding_radius(part.dist));
            return r;
        }
    };
    return std::visit(V{}, d.shape);
}

// Uniform mass density when the distribution has one; disengaged for Point
// (no volume) and for Unions/Multilayers mixing different densities.
inline std::optional<double> uniform_density(const MassDistribution& d) {
    struct V {
        std::optional<double> operator()(const Point&) const { return std::nullopt; }
        std::optional<double> operator()(const Sphere& s) const {
            const double vol = 4.0 / 3.0 * std::numbers::pi * s.radius * s.radius * s.radius;
            return s.mass / vol;
        }
        std::optional<double> operator()(const Cuboid& c) const {
            return c.mass / (c.lx * c.ly * c.lz);
        }
        std::optional<double> operator()(const Cylinder& c) const {
            return c.mass / (std::numbers::pi * c.radius * c.radius * c.height);
        }
        std::optional<double> operator()(const Multilayer& m) const {
            const double rho = m.layers.front().density;
            for (const auto& l : m.layers)
                if (std::abs(l.density - rho) > 1e-12 * rho) return std::nullopt;
            return rho;
        }
        std::optional<double> operator()(const Union& u) const {
            std::optional<double> rho;
            for (const auto& part : u.parts) {
                auto r = uniform_density(part.dist);
                if (!r) return std::nullopt;
                if (rho && std::abs(*r - *rho) > 1e-12 * *rho) return std::nullopt;
                rho = r;
            }
            return rho;
        }
    };
    return std::visit(V{}, d.shape);
}

// --- Cartesian separability -------------------------------------------------

// Normalized 1D profile of |rho~|² along one axis: |rho~(k)|² =
// mass² * fx(kx) * fy(ky) * fz(kz) with every factor equal to 1 at k=0.
struct AxisProfile {
    enum class Kind { constant, sinc_sq, stack };
    Kind kind = Kind::constant;
    double length = 0.0;  // edge length for sinc_sq
    std::vector<detail::ResolvedLayer> layers;  // for stack
    double areal_mass = 0.0;                    // sum rho_i d_i, for stack

    double operator()(double k) const {
        switch (kind) {
            case Kind::constant:
                return 1.0;
            case Kind::sinc_sq: {
                const double s = detail::sinc(0.5 * k * length);
                return s * s;
            }
            case Kind::stack: {
                const double a = std::abs(detail::stack_transform(layers, k)) / areal_mass;
                return a * a;
            }
        }
        return 1.0;
    }
};

struct SeparableAxes {
    AxisProfile x, y, z;
    double mass = 0.0;
};

// Engaged when |rho~(k)|² factorizes per Cartesian axis (Point, Cuboid,
// Multilayer); spheres, cylinders and unions are not separable.
inline std::optional<SeparableAxes> separable_axes(const MassDistribution& d) {
    validate(d);
    struct V {
        std::optional<SeparableAxes> operator()(const Point& p) const {
            SeparableAxes s;
            s.mass = p.mass;
            return s;
        }
        std::optional<SeparableAxes> operator()(const Sphere&) const { return std::nullopt; }
        std::optional<SeparableAxes> operator()(const Cuboid& c) const {
            SeparableAxes s;
            s.mass = c.mass;
            s.x = {AxisProfile::Kind::sinc_sq, c.lx, {}, 0.0};
            s.y = {AxisProfile::Kind::sinc_sq, c.ly, {}, 0.0};
            s.z = {AxisProfile::Kind::sinc_sq, c.lz, {}, 0.0};
            return s;
        }
        std::optional<SeparableAxes> operator()(const Cylinder&) const { return std::nullopt; }
        std::optional<SeparableAxes> operator()(const Multilayer& m) const {
            SeparableAxes s;
            s.mass = total_mass(MassDistribution{m});
            s.x = {AxisProfile::Kind::sinc_sq, m.lx, {}, 0.0};
            s.y = {AxisProfile::Kind::sinc_sq, m.ly, {}, 0.0};
            s.z.kind = AxisProfile::Kind::stack;
            s.z.layers = detail::resolve_layers(m);
            double areal = 0.0;
            for (const auto& l : s.z.layers) areal += l.density * l.thickness;
            s.z.areal_mass = areal;
            return s;
        }
        std::optional<SeparableAxes> operator()(const Union&) const { return std::nullopt; }
    };
    return std::visit(V{}, d.shape);
}

}  // namespace csl
