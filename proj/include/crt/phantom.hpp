#pragma once

#include <cmath>
#include <numbers>
#include <variant>
#include <vector>

#include "crt/errors.hpp"
#include "crt/field.hpp"
#include "crt/vec.hpp"

namespace crt {

/// Constant `amplitude` on the closed ball.
struct Ball {
    Vec3 center{};
    double radius = 1.0;
    double amplitude = 1.0;

    double operator()(const Vec3& p) const {
        const Vec3 d = p - center;
        return dot(d, d) <= radius * radius ? amplitude : 0.0;
    }
    double support_radius() const { return radius; }
};

/// amplitude * exp(-|x - c|^2 / (2 width^2)), cut to zero beyond 6 widths.
struct Gaussian {
    Vec3 center{};
    double width = 1.0;
    double amplitude = 1.0;

    static constexpr double truncation = 6.0;

    double operator()(const Vec3& p) const {
        const Vec3 d = p - center;
        const double r2 = dot(d, d);
        const double cut = truncation * width;
        if (r2 > cut * cut) return 0.0;
        return amplitude * std::exp(-r2 / (2.0 * width * width));
    }
    double support_radius() const { return truncation * width; }
};

using BasePrimitive = std::variant<Ball, Gaussian>;

/// g(x1, x2, x3) - g(x1, -x2, x3) for a base primitive g.
struct OddX2 {
    BasePrimitive base;

    double operator()(const Vec3& p) const {
        const Vec3 q{p.x, -p.y, p.z};
        return std::visit([&](const auto& g) { return g(p) - g(q); }, base);
    }
};

using Primitive = std::variant<Ball, Gaussian, OddX2>;

namespace detail {
inline Box primitive_box(const BasePrimitive& b) {
    return std::visit(
        [](const auto& g) {
            const double r = g.support_radius();
            Box box;
            box.lo = g.center - Vec3{r, r, r};
            box.hi = g.center + Vec3{r, r, r};
            return box;
        },
        b);
}

inline BasePrimitive scaled(const BasePrimitive& b, double a) {
    return std::visit(
        [a](auto g) -> BasePrimitive {
            g.amplitude *= a;
            return g;
        },
        b);
}
}  // namespace detail

/// A sum of closed-form primitives, evaluable anywhere.
class AnalyticPhantom {
public:
    AnalyticPhantom() = default;
    explicit AnalyticPhantom(std::vector<Primitive> prims) : prims_(std::move(prims)) {}

    AnalyticPhantom& add(Primitive p) {
        prims_.push_back(std::move(p));
        return *this;
    }

    const std::vector<Primitive>& primitives() const { return prims_; }
    bool empty() const { return prims_.empty(); }

    double operator()(const Vec3& p) const {
        double v = 0.0;
        for (const auto& prim : prims_) v += std::visit([&](const auto& g) { return g(p); }, prim);
        return v;
    }

    Box bounds() const {
        Box box;
        for (const auto& prim : prims_) {
            if (const auto* odd = std::get_if<OddX2>(&prim)) {
                Box b = detail::primitive_box(odd->base);
                box.expand(b);
                std::swap(b.lo.y, b.hi.y);
                b.lo.y = -b.lo.y;
                b.hi.y = -b.hi.y;
                box.expand(b);
            } else if (const auto* ball = std::get_if<Ball>(&prim)) {
                box.expand(detail::primitive_box(*ball));
            } else {
                box.expand(detail::primitive_box(std::get<Gaussian>(prim)));
            }
        }
        return box;
    }

    /// Copy with every amplitude multiplied by a.
    AnalyticPhantom scaled(double a) const {
        AnalyticPhantom out;
        for (const auto& prim : prims_) {
            if (const auto* odd = std::get_if<OddX2>(&prim)) {
                out.add(OddX2{detail::scaled(odd->base, a)});
            } else if (const auto* ball = std::get_if<Ball>(&prim)) {
                Ball b = *ball;
                b.amplitude *= a;
                out.add(b);
            } else {
                Gaussian g = std::get<Gaussian>(prim);
                g.amplitude *= a;
                out.add(g);
            }
        }
        return out;
    }

    /// Copy moved by `shift`.
    AnalyticPhantom translated(const Vec3& shift) const {
        AnalyticPhantom out;
        auto move = [&](auto g) {
            g.center += shift;
            return g;
        };
        for (const auto& prim : prims_) {
            if (const auto* odd = std::get_if<OddX2>(&prim)) {
                // exact translation only when shift.y == 0; the mirror plane stays x2 = 0
                out.add(OddX2{std::visit([&](auto g) -> BasePrimitive { return move(g); }, odd->base)});
            } else if (const auto* ball = std::get_if<Ball>(&prim)) {
                out.add(move(*ball));
            } else {
                out.add(move(std::get<Gaussian>(prim)));
            }
        }
        return out;
    }

private:
    std::vector<Primitive> prims_;
};

inline bool phantom_support_in_upper_half(const AnalyticPhantom& p) {
    const Box b = p.bounds();
    return b.empty() || b.lo.y > 0.0;
}

/// Samples the phantom at voxel centers and scans for the upper-half flag.
inline ScalarField3 rasterize(const AnalyticPhantom& phantom, const GridSpec& grid) {
    grid.validate();
    if (!(grid.voxel_volume() > 0.0)) throw ConfigError("rasterize: grid has zero volume");
    std::vector<double> values(grid.size());
    for (std::size_t n = 0; n < values.size(); ++n) values[n] = phantom(grid.center(n));
    return ScalarField3(grid, std::move(values));
}

namespace phantoms {

/// The reference ball B((0,2,0), 0.5) with unit amplitude.
inline AnalyticPhantom reference_ball() { return AnalyticPhantom({Ball{{0.0, 2.0, 0.0}, 0.5, 1.0}}); }

inline AnalyticPhantom odd_ball() {
    return AnalyticPhantom({OddX2{Ball{{0.0, 2.0, 0.0}, 0.5, 1.0}}});
}

inline AnalyticPhantom gaussian_blob() {
    return AnalyticPhantom({Gaussian{{0.3, 1.8, -0.2}, 0.12, 1.0}});
}

/// Two overlapping primitives with unequal amplitudes.
inline AnalyticPhantom two_blobs() {
    return AnalyticPhantom({Ball{{-0.3, 2.0, 0.1}, 0.35, 1.0}, Gaussian{{0.4, 1.7, -0.2}, 0.1, 2.0}});
}

/// Small ball inside the unit half-ball |x - (0,0,1)| < 1, x2 > 0, in the
/// frame where detectors sit on the x1-axis.
inline AnalyticPhantom half_ball_ball() {
    return AnalyticPhantom({Ball{{0.0, 0.3, 1.0}, 0.2, 1.0}});
}

}  // namespace phantoms

}  // namespace crt
