#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "crt/errors.hpp"
#include "crt/lattice.hpp"
#include "crt/quadrature.hpp"
#include "crt/vec.hpp"

namespace crt {

struct BallSet {
    Vec3 center{};
    double radius = 0.0;
};

/// Union of closed boxes, e.g. the nonzero voxels of a field.
struct BoxSet {
    std::vector<Box> boxes;
};

/// Closed set U in the support hypotheses. monostate is the empty set.
using SupportSet = std::variant<std::monostate, BallSet, BoxSet>;

inline bool is_empty(const SupportSet& U) {
    if (std::holds_alternative<std::monostate>(U)) return true;
    if (const auto* b = std::get_if<BoxSet>(&U)) return b->boxes.empty();
    return false;
}

inline bool closure_contains(const SupportSet& U, const Vec3& x) {
    if (const auto* b = std::get_if<BallSet>(&U)) return norm(x - b->center) <= b->radius;
    if (const auto* s = std::get_if<BoxSet>(&U))
        return std::any_of(s->boxes.begin(), s->boxes.end(), [&](const Box& box) { return box.contains(x); });
    return false;
}

/// Does the half-line origin + r dir, r >= 0, meet cl(U) grown by `margin`?
inline bool ray_hits(const SupportSet& U, const Vec3& origin, const Vec3& dir, double margin = 0.0) {
    if (const auto* b = std::get_if<BallSet>(&U)) {
        const Vec3 d = b->center - origin;
        const double t = std::max(0.0, dot(d, dir));
        return norm(d - t * dir) <= b->radius + margin;
    }
    if (const auto* s = std::get_if<BoxSet>(&U)) {
        for (Box box : s->boxes) {
            box.lo -= Vec3{margin, margin, margin};
            box.hi += Vec3{margin, margin, margin};
            const Span sp = intersect(box, origin, dir);
            if (!sp.empty() && sp.t1 >= 0.0) return true;
        }
    }
    return false;
}

/// Cone {(u,0,0) + r alpha : r >= 0, alpha . (cos b, 0, sin b) = s} misses cl(U)?
///
/// Balls are decided in closed form: the cone's directions come within angle
/// |gamma - acos(s)| of the direction to the center (gamma is the angle between
/// axis and that direction), and the ball subtends asin(rho / dist). A margin of
/// 1e-6 rad counts near-tangent cones as meeting. Box sets are probed along
/// 720 cone directions with the boxes grown by the same margin.
inline bool cone_misses_set(double u, double beta, double s, const SupportSet& U) {
    constexpr double margin = 1e-6;
    if (is_empty(U)) return true;
    const Vec3 vertex{u, 0.0, 0.0};
    if (closure_contains(U, vertex)) return false;
    s = std::clamp(s, -1.0, 1.0);
    const UnitVec3 axis = cone_axis(beta);
    if (const auto* b = std::get_if<BallSet>(&U)) {
        const Vec3 d = b->center - vertex;
        const double dist = norm(d);
        const double gamma = std::acos(std::clamp(dot(axis.vec(), d) / dist, -1.0, 1.0));
        const double subtended = std::asin(std::clamp(b->radius / dist, 0.0, 1.0));
        return std::abs(gamma - std::acos(s)) > subtended + margin;
    }
    constexpr std::size_t n = 720;
    if (std::abs(s) >= 1.0) return !ray_hits(U, vertex, s * axis.vec(), margin);
    for (const auto& a : circle_nodes(axis, s, n).nodes)
        if (ray_hits(U, vertex, a.vec(), margin)) return false;
    return true;
}

/// Near-uniform directions on S^2 (golden-angle spiral).
inline std::vector<UnitVec3> fibonacci_sphere(std::size_t n) {
    std::vector<UnitVec3> out;
    out.reserve(n);
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < n; ++k) {
        const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * static_cast<double>(k);
        out.push_back(UnitVec3(r * std::cos(phi), r * std::sin(phi), z));
    }
    return out;
}

}  // namespace crt
