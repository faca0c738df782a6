#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

#include "crt/errors.hpp"
#include "crt/vec.hpp"

namespace crt {

/// Orthonormal pair (e1, e2) completing `axis` to a right-handed frame.
///
/// Axes in the x1x3-plane, i.e. cone axes (cos b, 0, sin b), get
/// e1 = (-sin b, 0, cos b), e2 = (0, 1, 0). Any other axis seeds Gram-Schmidt
/// with the coordinate axis of smallest |component| (lowest index on ties).
struct Frame {
    Vec3 e1, e2;
};

inline Frame frame_for(const UnitVec3& axis) {
    const Vec3& a = axis.vec();
    if (a.y == 0.0) return {{-a.z, 0.0, a.x}, {0.0, 1.0, 0.0}};
    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(a[i]) < std::abs(a[k])) k = i;
    Vec3 seed{};
    seed[k] = 1.0;
    Vec3 e1 = seed - dot(seed, a) * a;
    e1 *= 1.0 / norm(e1);
    return {e1, cross(a, e1)};
}

/// Equispaced nodes on the circle {alpha in S^2 : alpha . axis = s}.
struct CircleNodes {
    UnitVec3 axis;
    double s = 0.0;
    std::vector<UnitVec3> nodes;
    double weight = 0.0;
};

/// Realizes the delta-constrained sphere integral
///   int_{S^2} g(alpha) delta(alpha . axis - s) dS = int_0^{2pi} g(s axis + sqrt(1-s^2) e(phi)) dphi
/// with the n-point periodic trapezoid rule in phi. Empty for |s| >= 1.
inline CircleNodes circle_nodes(const UnitVec3& axis, double s, std::size_t n) {
    if (n < 3) throw ConfigError("circle_nodes: need n >= 3");
    CircleNodes out{axis, s, {}, 0.0};
    if (!(std::abs(s) < 1.0)) return out;
    const Frame fr = frame_for(axis);
    const double c = std::sqrt(1.0 - s * s);
    out.nodes.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k > n/2 maps to the negative angle so node k and node n - k are exact
        // mirror images across the e1 axis
        const auto m = static_cast<double>(2 * k <= n ? static_cast<std::ptrdiff_t>(k)
                                                       : static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(n));
        const double phi = 2.0 * std::numbers::pi * m / static_cast<double>(n);
        const double cp = std::cos(phi), sp = std::sin(phi);
        out.nodes.push_back(UnitVec3::from_unit(s * axis.vec() + c * (cp * fr.e1 + sp * fr.e2)));
    }
    out.weight = 2.0 * std::numbers::pi / static_cast<double>(n);
    return out;
}

/// Composite midpoint rule for int_0^{r_max} g(r) dr along a ray, where
/// r_max is where the ray leaves the box (zero nodes if it never enters).
struct RayNodes {
    Vec3 origin{};
    UnitVec3 direction;
    double r_max = 0.0;
    std::vector<double> r_nodes;
    double r_weight = 0.0;  // uniform; every node carries it

    bool empty() const { return r_nodes.empty(); }
};

/// Number and step of midpoint cells on [0, r_max] with step <= `step`.
inline std::pair<std::size_t, double> ray_cells(double r_max, double step) {
    const auto n = static_cast<std::size_t>(std::ceil(r_max / step));
    if (n == 0) return {0, 0.0};
    return {n, r_max / static_cast<double>(n)};
}

/// Exit distance of the half-line origin + r dir (r >= 0) from the box, or 0
/// if it misses.
inline double ray_exit(const Box& box, const Vec3& origin, const Vec3& dir) {
    const Span sp = intersect(box, origin, dir);
    if (sp.empty() || sp.t1 <= 0.0) return 0.0;
    return sp.t1;
}

inline RayNodes ray_nodes(const Vec3& origin, const UnitVec3& direction, const Box& box, double step) {
    if (!(step > 0.0)) throw ConfigError("ray_nodes: step must be positive");
    RayNodes out{origin, direction, 0.0, {}, 0.0};
    const double r_max = ray_exit(box, origin, direction.vec());
    if (r_max <= 0.0) return out;
    const auto [n, h] = ray_cells(r_max, step);
    out.r_max = r_max;
    out.r_weight = h;
    out.r_nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.r_nodes[i] = (static_cast<double>(i) + 0.5) * h;
    return out;
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(std::size_t n) {
    std::vector<double> x(n), w(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * static_cast<double>(k) - 1.0) * z * p1 - (static_cast<double>(k) - 1.0) * p2) /
                     static_cast<double>(k);
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
    return {x, w};
}

struct SphereNode {
    UnitVec3 direction;
    double weight;
};

using SphereRule = std::vector<SphereNode>;

/// Product rule in cylindrical coordinates (t, phi) about `axis`: for each
/// given t node in (-1, 1), the circle_nodes ring of n_phi points. Weights
/// are t_weight * 2pi / n_phi (dS = dt dphi). |t| >= 1 nodes contribute
/// nothing, matching circle_nodes.
inline SphereRule cylindrical_rule(const std::vector<double>& t_nodes, const std::vector<double>& t_weights,
                                   std::size_t n_phi, const UnitVec3& axis) {
    SphereRule rule;
    rule.reserve(t_nodes.size() * n_phi);
    for (std::size_t i = 0; i < t_nodes.size(); ++i) {
        const CircleNodes ring = circle_nodes(axis, t_nodes[i], n_phi);
        for (const auto& a : ring.nodes) rule.push_back({a, t_weights[i] * ring.weight});
    }
    return rule;
}

/// Product rule on S^2: Gauss-Legendre in t = alpha . axis, uniform in phi.
/// Weights sum to 4 pi.
inline SphereRule sphere_grid(std::size_t n_t, std::size_t n_phi, const UnitVec3& axis) {
    if (n_t < 2 || n_phi < 2) throw ConfigError("sphere_grid: need n_t, n_phi >= 2");
    const auto [t, w] = gauss_legendre(n_t);
    if (n_phi < 3) {
        // circle_nodes needs three points; build the two-point ring directly
        SphereRule rule;
        const Frame fr = frame_for(axis);
        for (std::size_t i = 0; i < n_t; ++i) {
            const double c = std::sqrt(1.0 - t[i] * t[i]);
            for (double sgn : {1.0, -1.0})
                rule.push_back({UnitVec3::from_unit(t[i] * axis.vec() + (sgn * c) * fr.e1), w[i] * std::numbers::pi});
        }
        return rule;
    }
    return cylindrical_rule(t, w, n_phi, axis);
}

/// Trapezoid weights for sorted, possibly non-uniform nodes.
inline std::vector<double> trapezoid_weights(const std::vector<double>& x) {
    std::vector<double> w(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

/// Quadrature resolutions shared by the transforms.
struct QuadratureSpec {
    std::size_t circle_nodes = 256;
    /// Ray step. Zero selects the default: half the smallest voxel spacing for
    /// fields, `phantom_step` for analytic phantoms.
    double ray_step = 0.0;

    static constexpr double phantom_step = 5e-3;
};

}  // namespace crt
