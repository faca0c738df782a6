#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "crt/cli/config.hpp"
#include "crt/support.hpp"
#include "crt/transforms.hpp"
#include "crt/verification.hpp"

namespace crt::cli {

enum class Outcome { pass, fail, skip };

struct CheckRow {
    std::string check;
    std::string params;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    Outcome outcome = Outcome::pass;
};

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::pass: return "true";
        case Outcome::fail: return "false";
        case Outcome::skip: return "skip";
    }
    return "false";
}

namespace detail {

inline double l2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// ||a - b|| / ||b||, zero when both vanish.
inline double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) num += (a[i] - b[i]) * (a[i] - b[i]);
    const double den = l2(b);
    if (den == 0.0) return std::sqrt(num);
    return std::sqrt(num) / den;
}

inline CheckRow row(std::string check, std::string params, double lhs, double rhs, double residual, double tol) {
    return {std::move(check), std::move(params), lhs, rhs, residual,
            residual < tol ? Outcome::pass : Outcome::fail};
}

inline std::string num(double v) {
    std::ostringstream o;
    o << v;
    return o.str();
}

inline std::string vec_param(const Vec3& v) { return "(" + num(v.x) + " " + num(v.y) + " " + num(v.z) + ")"; }

}  // namespace detail

// ---------------------------------------------------------------------------
// decomposition C = Q P and the reduction to R2

/// Cf against Q(Pf) on shared circle nodes, Q of the interpolated hemifield,
/// and R2 of Phi, over the whole lattice.
inline std::vector<CheckRow> decomposition_checks(const AnalyticPhantom& f, const LatticeSpec& spec,
                                                  const QuadratureSpec& q, std::size_t disk_nodes,
                                                  const ConeLattice* precomputed = nullptr) {
    const ConeLattice cf = precomputed ? *precomputed : conical_forward(f, spec, q);
    const std::size_t nb = spec.beta_nodes.size(), ns = spec.s_nodes.size();
    std::vector<double> shared(cf.data().size()), interp(cf.data().size()), r2(cf.data().size());
    double rim = 0.0;
    for (std::size_t iu = 0; iu < spec.u_nodes.size(); ++iu) {
        const double u = spec.u_nodes[iu];
        auto pf = [&](const UnitVec3& a) { return weighted_ray(f, u, a, q); };
        const HemiField h = compute_hemifield(f, u, disk_nodes, q);
        rim = std::max(rim, h.rim_ring_max());
        parallel_for(nb, [&](std::size_t ib) {
            for (std::size_t is = 0; is < ns; ++is) {
                const std::size_t n = cf.index(iu, ib, is);
                const double b = spec.beta_nodes[ib], s = spec.s_nodes[is];
                shared[n] = spherical_sectional(pf, b, s, q.circle_nodes);
                interp[n] = spherical_sectional(h, b, s, q.circle_nodes);
                r2[n] = radon2(h.phi, b, s);
            }
        });
    }
    const std::string lat = "u=" + std::to_string(spec.u_nodes.size()) + " beta=" + std::to_string(nb) +
                            " s=" + std::to_string(ns);
    const double ncf = detail::l2(cf.data());
    return {
        detail::row("decomposition_shared_nodes", lat, ncf, detail::l2(shared), detail::rel_l2(shared, cf.data()), 1e-6),
        detail::row("decomposition_interpolated", lat + " disk=" + std::to_string(disk_nodes), ncf,
                    detail::l2(interp), detail::rel_l2(interp, cf.data()), 1e-2),
        detail::row("q_to_r2", lat + " disk=" + std::to_string(disk_nodes), detail::l2(interp), detail::l2(r2),
                    detail::rel_l2(r2, interp), 1e-2),
        detail::row("rim_ring", "disk=" + std::to_string(disk_nodes), rim, 0.0, rim, 1e-10),
    };
}

// ---------------------------------------------------------------------------
// moments of Cf

/// a_j(u, 2 theta) against 2^j a_j(u, theta) for j = 0..max_degree.
inline std::vector<CheckRow> homogeneity_checks(const AnalyticPhantom& f, double u, std::array<double, 2> theta,
                                                int max_degree, const QuadratureSpec& q) {
    const SphereRule rule = sphere_grid(64, 128, UnitVec3(0, 1, 0));
    const double step = resolve_step(f, q);
    const auto j_max = static_cast<std::size_t>(max_degree);
    const auto m1 = moments_a(f, j_max, u, theta, rule, step);
    const auto m2 = moments_a(f, j_max, u, {2.0 * theta[0], 2.0 * theta[1]}, rule, step);
    std::vector<CheckRow> out;
    for (std::size_t j = 0; j <= j_max; ++j) {
        const double rhs = std::ldexp(m1[j], static_cast<int>(j));
        out.push_back(detail::row("moment_homogeneity",
                                  "j=" + std::to_string(j) + " u=" + detail::num(u) + " theta=(" +
                                      detail::num(theta[0]) + " " + detail::num(theta[1]) + ")",
                                  m2[j], rhs, relative_gap(m2[j], rhs), 1e-12));
    }
    return out;
}

/// The moment series against the discrete Fourier transform in s of Cf, at
/// sigma in [-sigma_max, sigma_max]; the residual is the worst relative gap.
inline std::vector<CheckRow> fourier_checks(const AnalyticPhantom& f, const ConeLattice& cf, const QuadratureSpec& q,
                                            std::size_t j_max, double sigma_max, std::size_t sigma_count) {
    std::vector<CheckRow> out;
    const auto& spec = cf.spec();
    if (!is_uniform(spec.s_nodes)) {
        out.push_back({"fourier_series", "s nodes not uniform", 0.0, 0.0, 0.0, Outcome::skip});
        return out;
    }
    const std::vector<double> sigmas = linspace(-sigma_max, sigma_max, sigma_count);
    const std::size_t iu = spec.u_nodes.size() / 2;
    const double u = spec.u_nodes[iu];
    const double step = resolve_step(f, q);
    const std::size_t nb = spec.beta_nodes.size();
    for (std::size_t ib : {std::size_t{0}, nb / 3}) {
        const double b = spec.beta_nodes[ib];
        const auto rule = lattice_sphere_rule(spec.s_nodes, q.circle_nodes, cone_axis(b));
        const auto m = moments_a(f, j_max, u, {std::cos(b), std::sin(b)}, rule, step);
        const auto ft = fourier_in_s(cf, iu, ib, sigmas);
        double worst = 0.0, scale = 0.0, lhs = 0.0, rhs = 0.0;
        for (std::size_t k = 0; k < sigmas.size(); ++k) scale = std::max(scale, std::abs(ft[k]));
        for (std::size_t k = 0; k < sigmas.size(); ++k) {
            const auto series = moment_series(m, sigmas[k]);
            const double gap = std::abs(series - ft[k]) / std::max(std::abs(ft[k]), 1e-300);
            if (scale == 0.0 ? std::abs(series) > worst : gap > worst) {
                worst = scale == 0.0 ? std::abs(series) : gap;
                lhs = std::abs(series);
                rhs = std::abs(ft[k]);
            }
        }
        out.push_back(detail::row("fourier_series",
                                  "u=" + detail::num(u) + " beta=" + detail::num(b) + " j_max=" + std::to_string(j_max) +
                                      " sigma_max=" + detail::num(sigma_max),
                                  lhs, rhs, worst, 1e-6));
        if (nb == 1) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Radon moments and the Cauchy-kernel chain

/// Runs on f moved by `shift` into the frame with detectors on (u, 0, -1).
/// Rows are skipped when the support/margin hypothesis does not hold.
inline std::vector<CheckRow> cauchy_checks(const AnalyticPhantom& f, const VerifySettings& v) {
    const AnalyticPhantom g = f.translated(v.cauchy_shift);
    const UnitVec3 omega(v.cauchy_omega);
    const std::string params = "u=" + detail::num(v.cauchy_u) + " omega=" + detail::vec_param(omega.vec()) +
                               " shift=" + detail::vec_param(v.cauchy_shift);
    std::vector<CheckRow> out;
    CauchyResult res;
    try {
        res = cauchy_identity_residual(g, v.cauchy_u, omega);
    } catch (const ConfigError&) {
        out.push_back({"cauchy_identity", params + " hypothesis not met", 0.0, 0.0, 0.0, Outcome::skip});
        out.push_back({"cauchy_series", params + " hypothesis not met", 0.0, 0.0, 0.0, Outcome::skip});
        for (int j = 0; j <= v.fit_degree; ++j)
            out.push_back({"radon_moment_fit", "j=" + std::to_string(j) + " hypothesis not met", 0.0, 0.0, 0.0,
                           Outcome::skip});
        return out;
    }
    out.push_back(detail::row("cauchy_identity", params, res.lhs, res.rhs, res.residual, 1e-2));
    out.push_back(detail::row("cauchy_series", params + " terms=" + std::to_string(CauchyConfig{}.series_terms),
                              res.series, res.rhs, res.series_residual, 1e-3));

    const Box box = g.bounds();
    double reach = 0.0;
    if (!box.empty())
        for (int c = 0; c < 8; ++c)
            reach = std::max(reach, norm(Vec3{(c & 1) ? box.hi.x : box.lo.x, (c & 2) ? box.hi.y : box.lo.y,
                                              (c & 4) ? box.hi.z : box.lo.z}));
    if (reach == 0.0) reach = 1.0;
    const auto r = radon3_samples(g, fibonacci_sphere(v.fit_directions), linspace(-reach, reach, 161), 192);
    for (int j = 0; j <= v.fit_degree; ++j) {
        const double res_j = homogeneous_fit_residual(r, j);
        out.push_back(detail::row("radon_moment_fit",
                                  "j=" + std::to_string(j) + " directions=" + std::to_string(v.fit_directions), res_j,
                                  0.0, res_j, 1e-3));
    }
    return out;
}

// ---------------------------------------------------------------------------
// ray moments

/// k = 1..6 along a ray that starts outside the support box and points away.
inline std::vector<CheckRow> ray_miss_checks(const AnalyticPhantom& f, const QuadratureSpec& q) {
    const Box box = f.bounds();
    const Vec3 c = box.empty() ? Vec3{} : box.center();
    const double out_r = box.empty() ? 1.0 : box.circumradius() + 1.0;
    const Vec3 a = c + Vec3{out_r, 0.0, 0.0};
    std::vector<CheckRow> rows;
    for (int k = 1; k <= 6; ++k) {
        const double m = ray_moment(f, k, a, UnitVec3(1, 0, 0), resolve_step(f, q));
        rows.push_back(detail::row("ray_moment_miss", "k=" + std::to_string(k) + " origin=" + detail::vec_param(a), m,
                                   0.0, std::abs(m), 1e-10));
    }
    return rows;
}

/// k = 1..6 along the ray from (u, 0, 0) through the first ball center; the
/// closed form sums amplitude (r2^{k+1} - r1^{k+1}) / (k+1) over ball chords.
/// Skipped unless every primitive is a Ball.
inline std::vector<CheckRow> ray_chord_checks(const AnalyticPhantom& f, double u, const QuadratureSpec& q) {
    std::vector<const Ball*> balls;
    for (const auto& p : f.primitives()) {
        if (const auto* b = std::get_if<Ball>(&p)) balls.push_back(b);
    }
    std::vector<CheckRow> rows;
    if (balls.size() != f.primitives().size()) {
        for (int k = 1; k <= 6; ++k)
            rows.push_back({"ray_moment_chord", "k=" + std::to_string(k) + " needs a ball-only phantom", 0.0, 0.0, 0.0,
                            Outcome::skip});
        return rows;
    }
    const Vec3 a{u, 0.0, 0.0};
    Vec3 dir{0.0, 1.0, 0.0};
    if (!balls.empty() && norm(balls[0]->center - a) > 0.0) dir = balls[0]->center - a;
    const UnitVec3 alpha(dir);
    for (int k = 1; k <= 6; ++k) {
        double exact = 0.0;
        for (const Ball* b : balls) {
            const Vec3 d = b->center - a;
            const double t = dot(d, alpha.vec());
            const double h2 = b->radius * b->radius - (dot(d, d) - t * t);
            if (h2 <= 0.0) continue;
            const double r1 = std::max(0.0, t - std::sqrt(h2)), r2 = t + std::sqrt(h2);
            if (r2 <= 0.0) continue;
            exact += b->amplitude * (std::pow(r2, k + 1) - std::pow(r1, k + 1)) / (k + 1);
        }
        const double m = ray_moment(f, k, a, alpha, resolve_step(f, q));
        rows.push_back(detail::row("ray_moment_chord", "k=" + std::to_string(k) + " u=" + detail::num(u), m, exact,
                                   relative_gap(m, exact), 5e-3));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// direction sets

inline CheckRow direction_check(const std::vector<double>& angles, int degree) {
    const auto r = direction_set_rank(angles, degree);
    const double got = r.ranks.empty() ? 0.0 : r.ranks.back();
    return {"direction_set_rank", "angles=" + std::to_string(angles.size()) + " degree=" + std::to_string(degree), got,
            static_cast<double>(degree + 1), static_cast<double>(degree + 1) - got,
            r.nondegenerate ? Outcome::pass : Outcome::fail};
}

/// Everything the verify subcommand reports, in a fixed order.
inline std::vector<CheckRow> all_checks(const RunConfig& c) {
    const auto& f = c.phantom;
    const auto& v = c.verify;
    const ConeLattice cf = conical_forward(f, c.lattice, c.quadrature);
    std::vector<CheckRow> rows;
    auto append = [&](std::vector<CheckRow> more) { rows.insert(rows.end(), more.begin(), more.end()); };
    append(decomposition_checks(f, c.lattice, c.quadrature, v.disk_nodes, &cf));
    const double u_mid = c.lattice.u_nodes[c.lattice.u_nodes.size() / 2];
    append(homogeneity_checks(f, u_mid, {0.6, -0.3}, 8, c.quadrature));
    append(fourier_checks(f, cf, c.quadrature, v.j_max, v.sigma_max, v.sigma_count));
    append(cauchy_checks(f, v));
    append(ray_miss_checks(f, c.quadrature));
    append(ray_chord_checks(f, u_mid, c.quadrature));
    rows.push_back(direction_check(c.lattice.beta_nodes, v.degree));
    return rows;
}

}  // namespace crt::cli
