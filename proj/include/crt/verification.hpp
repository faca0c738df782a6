#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crt/errors.hpp"
#include "crt/lattice.hpp"
#include "crt/quadrature.hpp"
#include "crt/support.hpp"
#include "crt/transforms.hpp"

namespace crt {

// ---------------------------------------------------------------------------
// Fourier transform in s and the moment series

/// int Cf(u, beta, s) e^{-i sigma s} ds over [-1, 1] by the trapezoid rule.
inline std::vector<std::complex<double>> fourier_in_s(const ConeLattice& lat, std::size_t iu, std::size_t ib,
                                                      const std::vector<double>& sigmas) {
    const auto& s = lat.s_nodes();
    if (!is_uniform(s)) throw ConfigError("fourier_in_s: s nodes must be uniform");
    const auto w = trapezoid_weights(s);
    std::vector<std::complex<double>> out(sigmas.size());
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double v = w[i] * lat.at(iu, ib, i);
            re += v * std::cos(sigmas[k] * s[i]);
            im -= v * std::sin(sigmas[k] * s[i]);
        }
        out[k] = {re, im};
    }
    return out;
}

/// Moments m_j = int_{S^2} int_0^inf f((u,0,0) + r alpha) (alpha . (t1, 0, t2))^j r dr dS
/// for j = 0..j_max over a sphere rule. The exponential-series coefficient
/// (-i sigma)^j / j! is not included.
template <SpatialFunction F>
std::vector<double> moments_a(const F& f, std::size_t j_max, double u, std::array<double, 2> theta,
                              const SphereRule& rule, double step) {
    const Vec3 t{theta[0], 0.0, theta[1]};
    std::vector<double> pf(rule.size());
    parallel_for(rule.size(), [&](std::size_t k) {
        pf[k] = rule[k].weight * weighted_ray_from(f, {u, 0.0, 0.0}, rule[k].direction, step);
    });
    std::vector<double> m(j_max + 1, 0.0);
    for (std::size_t k = 0; k < rule.size(); ++k) {
        if (pf[k] == 0.0) continue;
        const double x = dot(rule[k].direction.vec(), t);
        double p = 1.0;
        for (std::size_t j = 0; j <= j_max; ++j) {
            m[j] += pf[k] * p;
            p *= x;
        }
    }
    return m;
}

template <SpatialFunction F>
double moment_a(const F& f, std::size_t j, double u, std::array<double, 2> theta, const SphereRule& rule,
                double step) {
    return moments_a(f, j, u, theta, rule, step)[j];
}

/// Default sphere rule for moment_a: 128 x 256 product grid about (0, 1, 0).
template <SpatialFunction F>
double moment_a(const F& f, std::size_t j, double u, std::array<double, 2> theta) {
    return moment_a(f, j, u, theta, sphere_grid(128, 256, UnitVec3(0, 1, 0)), resolve_step(f, QuadratureSpec{}));
}

/// sum_{j <= j_max} (-i sigma)^j / j! * m_j.
inline std::complex<double> moment_series(const std::vector<double>& m, double sigma) {
    std::complex<double> acc = 0.0, coef = 1.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        acc += coef * m[j];
        coef *= std::complex<double>(0.0, -sigma) / static_cast<double>(j + 1);
    }
    return acc;
}

/// Sphere rule whose rings about `axis` sit exactly on the lattice s nodes
/// with trapezoid weights, i.e. the rule fourier_in_s implicitly applies.
inline SphereRule lattice_sphere_rule(const std::vector<double>& s_nodes, std::size_t n_circle, const UnitVec3& axis) {
    return cylindrical_rule(s_nodes, trapezoid_weights(s_nodes), n_circle, axis);
}

// ---------------------------------------------------------------------------
// Radon moments and the Cauchy-kernel identity (shifted frame, vertex (u,0,-1))

/// p_j(omega) = int Rf(omega, s) s^j ds by the trapezoid rule over the sample s nodes.
inline double moment_p(const Radon3Samples& r, std::size_t j, std::size_t io) {
    const auto w = trapezoid_weights(r.s_nodes);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.s_nodes.size(); ++k) {
        double p = 1.0;
        for (std::size_t e = 0; e < j; ++e) p *= r.s_nodes[k];
        acc += w[k] * r.at(io, k) * p;
    }
    return acc;
}

/// Monomials omega^a with |a| = j, in a fixed order.
inline std::vector<std::array<int, 3>> homogeneous_exponents(int j) {
    std::vector<std::array<int, 3>> out;
    for (int a = j; a >= 0; --a)
        for (int b = j - a; b >= 0; --b) out.push_back({a, b, j - a - b});
    return out;
}

/// Relative least-squares residual of fitting a degree-j homogeneous
/// polynomial to p_j over all sampled directions.
inline double homogeneous_fit_residual(const Radon3Samples& r, int j) {
    const auto ex = homogeneous_exponents(j);
    const auto n = static_cast<Eigen::Index>(r.omega_nodes.size());
    if (n < static_cast<Eigen::Index>(ex.size())) throw ConfigError("fit: fewer directions than monomials");
    Eigen::MatrixXd a(n, static_cast<Eigen::Index>(ex.size()));
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec3& w = r.omega_nodes[static_cast<std::size_t>(i)].vec();
        for (std::size_t c = 0; c < ex.size(); ++c)
            a(i, static_cast<Eigen::Index>(c)) = std::pow(w.x, ex[c][0]) * std::pow(w.y, ex[c][1]) * std::pow(w.z, ex[c][2]);
        b(i) = moment_p(r, static_cast<std::size_t>(j), static_cast<std::size_t>(i));
    }
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
    const double bn = b.norm();
    return bn == 0.0 ? 0.0 : (a * x - b).norm() / bn;
}

struct CauchyConfig {
    std::size_t sphere_t = 256;
    std::size_t sphere_phi = 512;
    double ray_step = 2e-3;
    std::size_t s_nodes = 401;
    std::size_t plane_nodes = 256;
    std::size_t series_terms = 20;  // j = 0..series_terms
};

struct CauchyResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double series = 0.0;          // -sum_{j<=J} c^{-1-j} p_j
    double series_residual = 0.0;  // against rhs
    double margin = 0.0;           // c - (1 - eps) from the hypothesis
};

inline double relative_gap(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-30});
}

/// Checks the identity chain
///   int_{S^2} Pf(u, alpha) / (alpha . omega) dS = int Rf(omega, s) / (s - c) ds = -sum_j c^{-1-j} p_j(omega),
/// c = (u, 0, -1) . omega, where P uses the vertex (u, 0, -1) and f lives in
/// the unit ball. Throws ConfigError when f is not zero beyond 1 - 2 eps with
/// c > 1 - eps for some eps > 0.
template <SpatialFunction F>
CauchyResult cauchy_identity_residual(const F& f, double u, const UnitVec3& omega, const CauchyConfig& cfg = {}) {
    const Vec3 vertex{u, 0.0, -1.0};
    const double c = dot(vertex, omega.vec());
    const Box box = f.bounds();
    double reach = 0.0;
    if (!box.empty())
        for (int corner = 0; corner < 8; ++corner) {
            const Vec3 p{(corner & 1) ? box.hi.x : box.lo.x, (corner & 2) ? box.hi.y : box.lo.y,
                         (corner & 4) ? box.hi.z : box.lo.z};
            reach = std::max(reach, norm(p));
        }
    const double eps = 0.5 * (1.0 - reach);
    CauchyResult res;
    res.margin = c - (1.0 - eps);
    if (!(eps > 0.0)) throw ConfigError("cauchy: support reaches |x| = " + std::to_string(reach) + " >= 1");
    if (!(res.margin > 0.0))
        throw ConfigError("cauchy: (u,0,-1).omega - (1 - eps) = " + std::to_string(res.margin) + " <= 0");
    if (box.empty()) return res;

    const UnitVec3 toward(box.center() - vertex);
    const SphereRule rule = sphere_grid(cfg.sphere_t, cfg.sphere_phi, toward);
    std::vector<double> terms(rule.size(), 0.0);
    parallel_for(rule.size(), [&](std::size_t k) {
        const double pf = weighted_ray_from(f, vertex, rule[k].direction, cfg.ray_step);
        if (pf != 0.0) terms[k] = rule[k].weight * pf / dot(rule[k].direction.vec(), omega.vec());
    });
    for (double t : terms) res.lhs += t;

    const double mid = dot(box.center(), omega.vec());
    const double big_r = box.circumradius();
    const Radon3Samples rf =
        radon3_samples(f, {omega}, linspace(mid - big_r, mid + big_r, cfg.s_nodes), cfg.plane_nodes);
    const auto w = trapezoid_weights(rf.s_nodes);
    for (std::size_t k = 0; k < rf.s_nodes.size(); ++k) res.rhs += w[k] * rf.at(0, k) / (rf.s_nodes[k] - c);
    res.residual = relative_gap(res.lhs, res.rhs);

    double cpow = 1.0 / c;
    for (std::size_t j = 0; j <= cfg.series_terms; ++j) {
        res.series -= cpow * moment_p(rf, j, 0);
        cpow /= c;
    }
    res.series_residual = relative_gap(res.series, res.rhs);
    return res;
}

// ---------------------------------------------------------------------------
// Direction sets

struct DirectionRank {
    std::vector<int> ranks;  // ranks[j], j = 0..d
    bool nondegenerate = true;
};

/// For each degree j <= d, the rank of [cos^{j-m} b_i sin^m b_i]_{i, m}. A
/// degree-j binary form vanishing on the set is a null vector, so full column
/// rank j + 1 for every j <= d means no nonzero form of degree <= d vanishes there.
inline DirectionRank direction_set_rank(const std::vector<double>& angles, int d) {
    if (d < 0) throw ConfigError("direction_set_rank: d must be >= 0");
    DirectionRank out;
    const auto n = static_cast<Eigen::Index>(angles.size());
    for (int j = 0; j <= d; ++j) {
        int rank = 0;
        if (n > 0) {
            Eigen::MatrixXd m(n, j + 1);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double c = std::cos(angles[static_cast<std::size_t>(i)]);
                const double s = std::sin(angles[static_cast<std::size_t>(i)]);
                for (int k = 0; k <= j; ++k) m(i, k) = std::pow(c, j - k) * std::pow(s, k);
            }
            const Eigen::VectorXd sv = m.jacobiSvd().singularValues();
            for (Eigen::Index k = 0; k < sv.size(); ++k)
                if (sv(k) > 1e-10 * sv(0)) ++rank;
        }
        out.ranks.push_back(rank);
        if (rank < j + 1) out.nondegenerate = false;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Visibility caps and the region W

/// Directions of `sampling` whose half-lines from (u, 0, 0) meet cl(U).
inline std::vector<UnitVec3> visible_directions(const SupportSet& U, double u, const std::vector<UnitVec3>& sampling) {
    const Vec3 vertex{u, 0.0, 0.0};
    if (closure_contains(U, vertex)) throw ConfigError("visible_directions: vertex lies in cl(U)");
    std::vector<UnitVec3> out;
    for (const auto& a : sampling)
        if (ray_hits(U, vertex, a.vec())) out.push_back(a);
    return out;
}

namespace detail {
using P2 = std::array<double, 2>;

inline double cross2(const P2& o, const P2& a, const P2& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

/// Counter-clockwise hull (monotone chain).
inline std::vector<P2> convex_hull(std::vector<P2> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    std::vector<P2> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross2(h[k - 2], h[k - 1], p) <= 0.0) --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross2(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

/// Distance from p to the hull boundary when p is strictly inside, else <= 0.
inline double depth_inside(const std::vector<P2>& hull, const P2& p) {
    if (hull.size() < 3) return 0.0;
    double depth = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const P2& a = hull[i];
        const P2& b = hull[(i + 1) % hull.size()];
        const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
        depth = std::min(depth, cross2(a, b, p) / len);
    }
    return depth;
}
}  // namespace detail

struct ConvexityReport {
    bool convex = true;
    std::size_t inside = 0;         // sampled directions in S(u), upper hemisphere
    double worst_depth = 0.0;       // deepest hull-interior point outside S'(u)
};

/// Sampled check that S'(u), the disk projection (alpha1, alpha3) of the upper
/// hemisphere part of S(u), is convex: no sampled direction outside S(u) may
/// project deeper than `tolerance` inside the hull of the projected S(u) samples.
inline ConvexityReport check_disk_projection_convex(const SupportSet& U, double u,
                                                    const std::vector<UnitVec3>& sampling, double tolerance) {
    const Vec3 vertex{u, 0.0, 0.0};
    if (closure_contains(U, vertex)) throw ConfigError("convexity: vertex lies in cl(U)");
    std::vector<detail::P2> in, out;
    for (const auto& a : sampling) {
        if (!(a.y() > 0.0)) continue;
        (ray_hits(U, vertex, a.vec()) ? in : out).push_back({a.x(), a.z()});
    }
    ConvexityReport rep;
    rep.inside = in.size();
    const auto hull = detail::convex_hull(in);
    for (const auto& p : out) rep.worst_depth = std::max(rep.worst_depth, detail::depth_inside(hull, p));
    rep.convex = rep.worst_depth <= tolerance;
    return rep;
}

/// W = {(u,0,0) + r alpha : u in A, r >= 0, alpha in the union over v in A of S(v)}.
///
/// For ball supports the cap test is exact: alpha is in S(v) when its angle to
/// the direction of the center is at most asin(rho / dist) (+ tau). For box
/// supports the cap is the set of `cap_samples`, and alpha belongs when its
/// nearest cap sample lies within the sampling spacing + tau.
class RegionW {
public:
    static constexpr double kDefaultTau = 1e-3;

    RegionW(std::vector<double> vertices, SupportSet U, double tau = kDefaultTau, std::size_t n_samples = 20000)
        : A_(std::move(vertices)), U_(std::move(U)), tau_(tau) {
        if (A_.empty()) throw ConfigError("RegionW: vertex set A is empty");
        for (double v : A_)
            if (closure_contains(U_, {v, 0.0, 0.0})) throw ConfigError("RegionW: a vertex lies in cl(U)");
        spacing_ = std::sqrt(4.0 * std::numbers::pi / static_cast<double>(n_samples));
        for (const auto& a : fibonacci_sphere(n_samples))
            if (in_cap_exact(a)) cap_.push_back(a);
    }

    const std::vector<double>& vertices() const { return A_; }
    const std::vector<UnitVec3>& cap_samples() const { return cap_; }
    double tau() const { return tau_; }

    bool in_cap(const UnitVec3& a) const {
        if (std::holds_alternative<BallSet>(U_)) return in_cap_exact(a, tau_);
        const double limit = std::cos(spacing_ + tau_);
        return std::any_of(cap_.begin(), cap_.end(), [&](const UnitVec3& c) { return dot(c.vec(), a.vec()) >= limit; });
    }

    bool contains(const Vec3& x) const {
        for (double u : A_) {
            const Vec3 d = x - Vec3{u, 0.0, 0.0};
            const double len = norm(d);
            if (len == 0.0) return true;
            if (in_cap(UnitVec3::from_unit((1.0 / len) * d))) return true;
        }
        return false;
    }

private:
    bool in_cap_exact(const UnitVec3& a, double tol = 0.0) const {
        if (const auto* b = std::get_if<BallSet>(&U_)) {
            for (double v : A_) {
                const Vec3 d = b->center - Vec3{v, 0.0, 0.0};
                const double dist = norm(d);
                const double angle = std::acos(std::clamp(dot(a.vec(), d) / dist, -1.0, 1.0));
                if (angle <= std::asin(std::clamp(b->radius / dist, 0.0, 1.0)) + tol) return true;
            }
            return false;
        }
        return std::any_of(A_.begin(), A_.end(), [&](double v) { return ray_hits(U_, {v, 0.0, 0.0}, a.vec()); });
    }

    std::vector<double> A_;
    SupportSet U_;
    double tau_;
    double spacing_ = 0.0;
    std::vector<UnitVec3> cap_;
};

inline bool region_w_membership(const RegionW& w, const Vec3& x) { return w.contains(x); }

}  // namespace crt
