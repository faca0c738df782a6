#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "crt/field.hpp"
#include "crt/lattice.hpp"
#include "crt/parallel.hpp"
#include "crt/phantom.hpp"
#include "crt/quadrature.hpp"
#include "crt/vec.hpp"

namespace crt {

/// Ray step used when QuadratureSpec::ray_step is zero.
template <SpatialFunction F>
double natural_step(const F& f) {
    if constexpr (requires { f.grid(); }) {
        return 0.5 * f.grid().min_spacing();
    } else {
        return QuadratureSpec::phantom_step;
    }
}

template <SpatialFunction F>
double resolve_step(const F& f, const QuadratureSpec& q) {
    return q.ray_step > 0.0 ? q.ray_step : natural_step(f);
}

/// Visits the midpoint nodes of ray_nodes(origin, dir, box, step) that can
/// touch the box, calling fn(r, h). Nodes before the entry point only see
/// zeros, so skipping them leaves every sum unchanged.
template <class Fn>
void for_each_ray_node(const Box& box, const Vec3& origin, const Vec3& dir, double step, Fn&& fn) {
    const Span sp = intersect(box, origin, dir);
    if (sp.empty() || sp.t1 <= 0.0) return;
    const auto [n, h] = ray_cells(sp.t1, step);
    std::size_t first = 0;
    if (sp.t0 > 0.0) {
        const double c = std::floor(sp.t0 / h - 0.5);
        if (c > 0.0) first = std::min(n, static_cast<std::size_t>(c));
    }
    for (std::size_t i = first; i < n; ++i) fn((static_cast<double>(i) + 0.5) * h, h);
}

/// int_0^inf r^k f(a + r alpha) dr by the midpoint rule.
template <SpatialFunction F>
double ray_moment(const F& f, int k, const Vec3& a, const UnitVec3& alpha, double step) {
    double acc = 0.0;
    double h_used = 0.0;
    const Box box = f.bounds();
    for_each_ray_node(box, a, alpha.vec(), step, [&](double r, double h) {
        const double v = f(a + r * alpha.vec());
        if (v == 0.0) return;
        double rk = 1.0;
        for (int e = 0; e < k; ++e) rk *= r;
        acc += rk * v;
        h_used = h;
    });
    return acc * h_used;
}

/// Weighted ray transform from an arbitrary vertex.
template <SpatialFunction F>
double weighted_ray_from(const F& f, const Vec3& vertex, const UnitVec3& direction, double step) {
    return ray_moment(f, 1, vertex, direction, step);
}

/// Pf(u, w) = int_0^inf f((u,0,0) + r w) r dr.
template <SpatialFunction F>
double weighted_ray(const F& f, double u, const UnitVec3& direction, const QuadratureSpec& q = {}) {
    return weighted_ray_from(f, {u, 0.0, 0.0}, direction, resolve_step(f, q));
}

/// One cone integral with arbitrary vertex and axis.
template <SpatialFunction F>
double cone_integral(const F& f, const Vec3& vertex, const UnitVec3& axis, double s, std::size_t n_circle,
                     double step) {
    if (!(std::abs(s) < 1.0)) return 0.0;
    const CircleNodes ring = circle_nodes(axis, s, n_circle);
    double acc = 0.0;
    for (const auto& alpha : ring.nodes) acc += weighted_ray_from(f, vertex, alpha, step);
    return ring.weight * acc;
}

/// C_T f(u1, u2, axis, s): the cone with vertex (u1, u2, 0).
template <SpatialFunction F>
double conical_forward_planar(const F& f, double u1, double u2, const UnitVec3& axis, double s,
                              const QuadratureSpec& q = {}) {
    return cone_integral(f, {u1, u2, 0.0}, axis, s, q.circle_nodes, resolve_step(f, q));
}

/// Cf(u, beta, s) at one lattice point.
template <SpatialFunction F>
double conical_sample(const F& f, double u, double beta, double s, const QuadratureSpec& q = {}) {
    return conical_forward_planar(f, u, 0.0, cone_axis(beta), s, q);
}

/// Conical Radon transform over a lattice.
template <SpatialFunction F>
ConeLattice conical_forward(const F& f, const LatticeSpec& spec, const QuadratureSpec& q = {}) {
    ConeLattice out(spec);
    const std::size_t nb = spec.beta_nodes.size();
    parallel_for(spec.u_nodes.size() * nb, [&](std::size_t n) {
        const std::size_t iu = n / nb, ib = n % nb;
        for (std::size_t is = 0; is < spec.s_nodes.size(); ++is)
            out.at(iu, ib, is) = conical_sample(f, spec.u_nodes[iu], spec.beta_nodes[ib], spec.s_nodes[is], q);
    });
    return out;
}

/// Q phi(beta, s) for phi a function on S^2 (u fixed by the caller).
template <class Phi>
double spherical_sectional(const Phi& phi, double beta, double s, std::size_t n) {
    if (!(std::abs(s) < 1.0)) return 0.0;
    const CircleNodes ring = circle_nodes(cone_axis(beta), s, n);
    double acc = 0.0;
    for (const auto& alpha : ring.nodes) acc += phi(alpha);
    return ring.weight * acc;
}

// ---------------------------------------------------------------------------
// Disk samples and the hemisphere field

/// Regular n x n grid over [-1, 1]^2, nodes y_i = -1 + 2 i / (n - 1), with
/// bilinear interpolation and zero extension.
class DiskSamples {
public:
    DiskSamples() = default;
    explicit DiskSamples(std::size_t n) : n_(n), values_(n * n, 0.0) {
        if (n < 2) throw ConfigError("disk grid: need n >= 2");
    }

    std::size_t n() const { return n_; }
    double step() const { return 2.0 / static_cast<double>(n_ - 1); }
    double node(std::size_t i) const {
        return i + 1 == n_ ? 1.0 : -1.0 + step() * static_cast<double>(i);
    }

    double& at(std::size_t i, std::size_t j) { return values_[i + n_ * j]; }
    double at(std::size_t i, std::size_t j) const { return values_[i + n_ * j]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double operator()(double y1, double y2) const {
        const double h = step();
        const double gx = (y1 + 1.0) / h, gy = (y2 + 1.0) / h;
        const double last = static_cast<double>(n_ - 1);
        if (!(gx >= 0.0 && gx <= last && gy >= 0.0 && gy <= last)) return 0.0;
        auto i0 = static_cast<std::size_t>(std::floor(gx));
        auto j0 = static_cast<std::size_t>(std::floor(gy));
        if (i0 + 1 >= n_) i0 = n_ - 2;
        if (j0 + 1 >= n_) j0 = n_ - 2;
        const double tx = gx - static_cast<double>(i0), ty = gy - static_cast<double>(j0);
        return (1.0 - tx) * (1.0 - ty) * at(i0, j0) + tx * (1.0 - ty) * at(i0 + 1, j0) +
               (1.0 - tx) * ty * at(i0, j0 + 1) + tx * ty * at(i0 + 1, j0 + 1);
    }

private:
    std::size_t n_ = 2;
    std::vector<double> values_ = std::vector<double>(4, 0.0);
};

/// Nodes closer than this to the rim |y| = 1 are dropped from a HemiField.
inline constexpr double kRimExclusion = 1e-6;

/// Pf(u, .) on the upper hemisphere alpha2 > 0, parameterized by the disk
/// coordinate y = (alpha1, alpha3), and Phi = Pf / sqrt(1 - |y|^2).
struct HemiField {
    double u = 0.0;
    DiskSamples pf;
    DiskSamples phi;
    std::vector<char> retained;  // per node; excluded nodes hold zeros

    std::size_t n() const { return pf.n(); }

    static bool keeps(double y1, double y2) { return std::hypot(y1, y2) < 1.0 - kRimExclusion; }

    static UnitVec3 direction(double y1, double y2) {
        const double a2 = std::sqrt(std::max(0.0, 1.0 - y1 * y1 - y2 * y2));
        return UnitVec3::from_unit({y1, a2, y2});
    }

    /// Interpolated Pf(u, alpha); zero on the closed lower hemisphere.
    double operator()(const UnitVec3& alpha) const {
        if (!(alpha.y() > 0.0)) return 0.0;
        return pf(alpha.x(), alpha.z());
    }

    /// Outermost retained ring: the largest |y| among retained nodes, and the
    /// max |pf| over nodes within one grid step of it.
    double rim_ring_max() const {
        double rmax = 0.0;
        for (std::size_t j = 0; j < n(); ++j)
            for (std::size_t i = 0; i < n(); ++i)
                if (retained[i + n() * j]) rmax = std::max(rmax, std::hypot(pf.node(i), pf.node(j)));
        double m = 0.0;
        for (std::size_t j = 0; j < n(); ++j)
            for (std::size_t i = 0; i < n(); ++i)
                if (retained[i + n() * j] && std::hypot(pf.node(i), pf.node(j)) > rmax - pf.step())
                    m = std::max(m, std::abs(pf.at(i, j)));
        return m;
    }
};

inline HemiField empty_hemifield(double u, std::size_t n) {
    HemiField h{u, DiskSamples(n), DiskSamples(n), std::vector<char>(n * n, 0)};
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) h.retained[i + n * j] = HemiField::keeps(h.pf.node(i), h.pf.node(j));
    return h;
}

/// Samples Pf(u, .) at the retained disk nodes and forms Phi.
template <SpatialFunction F>
HemiField compute_hemifield(const F& f, double u, std::size_t n, const QuadratureSpec& q = {}) {
    HemiField h = empty_hemifield(u, n);
    const double step = resolve_step(f, q);
    parallel_for(n * n, [&](std::size_t idx) {
        if (!h.retained[idx]) return;
        const std::size_t i = idx % n, j = idx / n;
        const double y1 = h.pf.node(i), y2 = h.pf.node(j);
        const double v = weighted_ray_from(f, {u, 0.0, 0.0}, HemiField::direction(y1, y2), step);
        h.pf.at(i, j) = v;
        h.phi.at(i, j) = v / std::sqrt(1.0 - (y1 * y1 + y2 * y2));
    });
    return h;
}

/// Line integral of a disk function over {y . (cos b, sin b) = s}, midpoint
/// rule along the chord of the unit disk with `n_chord` cells.
template <class Disk>
double radon2_fn(const Disk& phi, double beta, double s, std::size_t n_chord) {
    if (!(std::abs(s) < 1.0)) return 0.0;
    const double c = std::cos(beta), sn = std::sin(beta);
    const double half = std::sqrt(1.0 - s * s);
    const double h = 2.0 * half / static_cast<double>(n_chord);
    double acc = 0.0;
    for (std::size_t k = 0; k < n_chord; ++k) {
        const double t = -half + (static_cast<double>(k) + 0.5) * h;
        acc += phi(s * c - t * sn, s * sn + t * c);
    }
    return acc * h;
}

/// R2 on sampled disk data; the chord step is half the grid step.
inline double radon2(const DiskSamples& phi, double beta, double s) {
    if (!(std::abs(s) < 1.0)) return 0.0;
    const double half = std::sqrt(1.0 - s * s);
    const auto n_chord = static_cast<std::size_t>(std::ceil(2.0 * half / (0.5 * phi.step())));
    if (n_chord == 0) return 0.0;
    return radon2_fn(phi, beta, s, n_chord);
}

// ---------------------------------------------------------------------------
// 3D Radon transform

struct Radon3Samples {
    std::vector<UnitVec3> omega_nodes;
    std::vector<double> s_nodes;
    std::vector<double> data;  // omega-major: data[io * s_nodes.size() + is]

    double at(std::size_t io, std::size_t is) const { return data[io * s_nodes.size() + is]; }
};

/// Rf(omega, s): midpoint rule on an n x n grid over the disk where the
/// plane cuts the circumsphere of f's bounding box.
template <SpatialFunction F>
double radon3_plane(const F& f, const UnitVec3& omega, double s, std::size_t n) {
    const Box box = f.bounds();
    if (box.empty()) return 0.0;
    const Vec3 m = box.center();
    const double big_r = box.circumradius();
    const double d = s - dot(m, omega.vec());
    if (std::abs(d) >= big_r) return 0.0;
    const double rho = std::sqrt(big_r * big_r - d * d);
    const Frame fr = frame_for(omega);
    const Vec3 p0 = m + d * omega.vec();
    const double h = 2.0 * rho / static_cast<double>(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double b = -rho + (static_cast<double>(j) + 0.5) * h;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = -rho + (static_cast<double>(i) + 0.5) * h;
            if (a * a + b * b > rho * rho) continue;
            acc += f(p0 + a * fr.e1 + b * fr.e2);
        }
    }
    return acc * h * h;
}

template <SpatialFunction F>
std::vector<double> radon3(const F& f, const UnitVec3& omega, const std::vector<double>& s_nodes,
                           std::size_t n_plane = 256) {
    std::vector<double> out(s_nodes.size());
    parallel_for(s_nodes.size(), [&](std::size_t k) { out[k] = radon3_plane(f, omega, s_nodes[k], n_plane); });
    return out;
}

template <SpatialFunction F>
Radon3Samples radon3_samples(const F& f, const std::vector<UnitVec3>& omegas, const std::vector<double>& s_nodes,
                             std::size_t n_plane = 256) {
    Radon3Samples out{omegas, s_nodes, std::vector<double>(omegas.size() * s_nodes.size())};
    const std::size_t ns = s_nodes.size();
    parallel_for(out.data.size(), [&](std::size_t k) {
        out.data[k] = radon3_plane(f, omegas[k / ns], s_nodes[k % ns], n_plane);
    });
    return out;
}

}  // namespace crt
