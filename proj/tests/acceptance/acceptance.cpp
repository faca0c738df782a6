// One line per acceptance criterion; exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "crt/crt.hpp"

using namespace crt;
namespace fs = std::filesystem;

#ifndef CRT_CLI_PATH
#error "CRT_CLI_PATH must name the crt executable"
#endif

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const LatticeSpec& desk_lattice() {
    static const LatticeSpec spec{linspace(-2.0, 2.0, 9), uniform_beta(36), uniform_s(65)};
    return spec;
}

// 1. Cf = Q(Pf) on shared nodes and through an interpolated hemifield
Outcome decomposition() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto f = phantoms::reference_ball();
    const auto& spec = desk_lattice();
    const QuadratureSpec q;
    const ConeLattice cf = conical_forward(f, spec, q);
    std::vector<double> shared(cf.data().size()), interp(cf.data().size());
    for (std::size_t iu = 0; iu < spec.u_nodes.size(); ++iu) {
        const double u = spec.u_nodes[iu];
        const HemiField h = compute_hemifield(f, u, 601, q);
        for (std::size_t ib = 0; ib < spec.beta_nodes.size(); ++ib)
            for (std::size_t is = 0; is < spec.s_nodes.size(); ++is) {
                const double s = spec.s_nodes[is];
                if (std::abs(s) >= 1.0) continue;
                // Q on the circle alpha . axis = s, integrand Pf(u, alpha) by direct ray sums
                const CircleNodes ring = circle_nodes(cone_axis(spec.beta_nodes[ib]), s, q.circle_nodes);
                double acc = 0.0, acc_h = 0.0;
                for (const auto& a : ring.nodes) {
                    acc += weighted_ray(f, u, a, q);
                    acc_h += h(a);
                }
                shared[cf.index(iu, ib, is)] = ring.weight * acc;
                interp[cf.index(iu, ib, is)] = ring.weight * acc_h;
            }
    }
    const double e_shared = rel_l2(shared, cf.data()), e_interp = rel_l2(interp, cf.data());
    const double t = seconds_since(t0);
    return {e_shared < 1e-6 && e_interp < 1e-2 && t < 120.0,
            "shared=" + sci(e_shared) + " (<1e-6) interpolated=" + sci(e_interp) + " (<1e-2) time=" + sci(t) +
                "s (<120s)"};
}

// 2. Q phi = R2 Phi for phi = Pf(u, .)
Outcome q_to_r2() {
    const auto f = phantoms::reference_ball();
    const auto& spec = desk_lattice();
    std::vector<double> qv, rv;
    for (double u : spec.u_nodes) {
        const HemiField h = compute_hemifield(f, u, 601);
        for (double b : spec.beta_nodes)
            for (double s : spec.s_nodes) {
                qv.push_back(spherical_sectional(h, b, s, 256));
                rv.push_back(radon2(h.phi, b, s));
            }
    }
    const double e = rel_l2(rv, qv);
    return {e < 1e-2, "relative L2=" + sci(e) + " (<1e-2)"};
}

// 3. moment homogeneity and the Fourier series in s
Outcome moments() {
    const auto f = phantoms::reference_ball();
    const auto& spec = desk_lattice();
    const double step = QuadratureSpec::phantom_step;
    double worst_h = 0.0;
    const SphereRule coarse = sphere_grid(64, 128, UnitVec3(0, 1, 0));
    for (double u : {0.0, 1.0})
        for (std::array<double, 2> th : {std::array<double, 2>{0.6, -0.3}, std::array<double, 2>{-1.1, 0.4}}) {
            const auto m1 = moments_a(f, 8, u, th, coarse, step);
            const auto m2 = moments_a(f, 8, u, {2.0 * th[0], 2.0 * th[1]}, coarse, step);
            for (std::size_t j = 0; j <= 8; ++j) {
                const double want = std::pow(2.0, static_cast<double>(j)) * m1[j];
                worst_h = std::max(worst_h, std::abs(m2[j] - want) / std::max(std::abs(want), 1e-300));
            }
        }
    const ConeLattice cf = conical_forward(f, spec);
    const std::vector<double> sigmas = linspace(-4.0, 4.0, 17);
    double worst_f = 0.0;
    for (std::size_t iu : {std::size_t{4}, std::size_t{6}})
        for (std::size_t ib : {std::size_t{0}, std::size_t{7}, std::size_t{20}}) {
            const double b = spec.beta_nodes[ib];
            const auto rule = lattice_sphere_rule(spec.s_nodes, 256, cone_axis(b));
            const auto m = moments_a(f, 25, spec.u_nodes[iu], {std::cos(b), std::sin(b)}, rule, step);
            // discrete Fourier transform in s by the trapezoid rule, written out here
            const auto w = trapezoid_weights(spec.s_nodes);
            for (double sg : sigmas) {
                std::complex<double> ft = 0.0;
                for (std::size_t is = 0; is < spec.s_nodes.size(); ++is)
                    ft += w[is] * cf.at(iu, ib, is) * std::exp(std::complex<double>(0.0, -sg * spec.s_nodes[is]));
                worst_f = std::max(worst_f, std::abs(moment_series(m, sg) - ft) / std::abs(ft));
            }
        }
    return {worst_h < 1e-12 && worst_f < 1e-6,
            "homogeneity=" + sci(worst_h) + " (<1e-12, j<=8) fourier=" + sci(worst_f) + " (<1e-6, |sigma|<=4, j_max=25)"};
}

// 4. Cauchy-kernel identity chain and the p_j polynomial fit
Outcome cauchy() {
    // ball of radius 0.2 at (0, 0.3, 0): inside |x| <= 0.58, so eps = 0.21 and c = 1 > 1 - eps
    const AnalyticPhantom f({Ball{{0.0, 0.3, 0.0}, 0.2, 1.0}});
    double worst_id = 0.0, worst_series = 0.0;
    for (const UnitVec3& w : {UnitVec3(0, 0, -1), UnitVec3(0.3, 0, -1), UnitVec3(0, 0.2, -1)}) {
        const auto r = cauchy_identity_residual(f, 0.5, w);
        if (!(r.margin > 0.0)) return {false, "hypothesis margin not positive"};
        worst_id = std::max(worst_id, r.residual);
        worst_series = std::max(worst_series, r.series_residual);
    }
    const auto rs = radon3_samples(f, fibonacci_sphere(40), linspace(-0.6, 0.6, 161), 192);
    double worst_fit = 0.0;
    for (int j = 0; j <= 4; ++j) worst_fit = std::max(worst_fit, homogeneous_fit_residual(rs, j));
    return {worst_id < 1e-2 && worst_series < 1e-3 && worst_fit < 1e-3,
            "identity=" + sci(worst_id) + " (<1e-2) series=" + sci(worst_series) + " (<1e-3) fit=" + sci(worst_fit) +
                " (<1e-3, j<=4)"};
}

// 5. direction-set scenario: trivial numerical null space
Outcome direction_set() {
    const auto t0 = std::chrono::steady_clock::now();
    const Scenario sc = direction_scenario(9, 8);
    const bool nondeg = direction_set_rank(sc.lattice.beta_nodes, 8).nondegenerate;
    const auto op = assemble(sc);
    const auto rep = svd_nullspace(op, 1e-8);
    const double t = seconds_since(t0);
    return {nondeg && rep.ratio_min() > 1e-7 && rep.null_basis.cols() == 0 && op.n_cols() == 512 && t < 600.0,
            "sigma_min/sigma_max=" + sci(rep.ratio_min()) + " (>1e-7) null_dim=" +
                std::to_string(rep.null_basis.cols()) + " cols=" + std::to_string(op.n_cols()) +
                (nondeg ? " directions nondegenerate" : " directions DEGENERATE") + " time=" + sci(t) + "s (<600s)"};
}

// 6. vertex-set scenario
Outcome vertex_set() {
    const Scenario sc = vertex_scenario(8);
    const auto op = assemble(sc);
    const auto rep = svd_nullspace(op, 1e-8);
    bool in_half_ball = true;
    for (auto c : op.columns) {
        const Vec3 x = sc.grid.center(c);
        in_half_ball = in_half_ball && x.y > 0.0 && norm(x - Vec3{0, 0, 1}) < 1.0;
    }
    return {rep.null_basis.cols() == 0 && in_half_ball && op.n_cols() > 0,
            "sigma_min/sigma_max=" + sci(rep.ratio_min()) + " null_dim=" + std::to_string(rep.null_basis.cols()) +
                " cols=" + std::to_string(op.n_cols())};
}

// 7. local scenario: null vectors live in W
Outcome local_uniqueness() {
    const Scenario sc = local_scenario(12);
    const auto op = assemble(sc);
    const auto rep = svd_nullspace(op, 1e-8);
    const RegionW w(sc.lattice.u_nodes, sc.U);
    double worst = 0.0;
    for (double f : nullspace_support(rep, w, op)) worst = std::max(worst, f);
    return {worst < 0.05, "null_dim=" + std::to_string(rep.null_basis.cols()) + " max outside-W energy=" + sci(worst) +
                              " (<0.05) rows=" + std::to_string(op.n_rows())};
}

// 8. ray moments vanish off the support and match chord integrals
Outcome ray_moments() {
    const auto f = phantoms::reference_ball();
    const Vec3 c{0.0, 2.0, 0.0};
    const double rho = 0.5;
    const double step = 2e-3;
    double worst_miss = 0.0, worst_chord = 0.0;
    for (int k = 1; k <= 6; ++k) {
        worst_miss = std::max(worst_miss, std::abs(ray_moment(f, k, {0, 0, 0}, UnitVec3(1, 0, 0), 5e-3)));
        worst_miss = std::max(worst_miss, std::abs(ray_moment(f, k, {0, 3, 0}, UnitVec3(0, 1, 0.2), 5e-3)));
        worst_miss = std::max(worst_miss, std::abs(ray_moment(f, k, {1, 0, 0}, UnitVec3(0, 1, 1), 5e-3)));
    }
    for (const Vec3& a : {Vec3{0, 0, 0}, Vec3{0.7, 0, 0}, Vec3{-1.2, 0, 0}})
        for (const Vec3& target : {c, c + Vec3{0.2, 0.0, 0.1}, c + Vec3{-0.1, 0.0, -0.3}}) {
            const UnitVec3 alpha(target - a);
            const Vec3 d = c - a;
            const double t = dot(d, alpha.vec());
            const double half = std::sqrt(rho * rho - (dot(d, d) - t * t));
            const double r1 = t - half, r2 = t + half;
            for (int k = 1; k <= 6; ++k) {
                const double exact = (std::pow(r2, k + 1) - std::pow(r1, k + 1)) / (k + 1);
                worst_chord = std::max(worst_chord, std::abs(ray_moment(f, k, a, alpha, step) - exact) / exact);
            }
        }
    return {worst_miss < 1e-10 && worst_chord < 5e-3,
            "miss=" + sci(worst_miss) + " (<1e-10) chord=" + sci(worst_chord) + " (<5e-3, k=1..6, step 2e-3)"};
}

// 9. end-to-end reconstruction of the ball
Outcome reconstruction() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto f = phantoms::reference_ball();
    const GridSpec grid = GridSpec::covering({-0.5, 1.5, -0.5}, {0.5, 2.5, 0.5}, {12, 12, 12});
    const LatticeSpec spec{linspace(-6.0, 6.0, 16), uniform_beta(180), uniform_s(257)};
    const ConeLattice cf = conical_forward(f, spec);
    const ReconResult res = reconstruct(cf, grid);
    const double err = relative_l2(res.field.values(), rasterize(f, grid).values());
    bool monotone = true;
    const auto& h = res.solve.cgls.residuals;
    for (std::size_t k = 1; k < h.size(); ++k) monotone = monotone && h[k] <= h[k - 1];
    const double t = seconds_since(t0);
    return {err < 0.15 && monotone && t < 600.0,
            "relative L2=" + sci(err) + " (<0.15) residual history " + (monotone ? "monotone" : "NOT monotone") +
                " iterations=" + std::to_string(res.solve.cgls.iterations) + " time=" + sci(t) + "s (<600s)"};
}

// 10. identical CLI runs give byte-identical artifacts
Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "crt_acceptance_determinism";
    fs::remove_all(root);
    const std::string cli = CRT_CLI_PATH;
    const std::string lattice = " --u-count 5 --beta-count 24 --s-count 33";
    std::vector<std::string> runs = {"a", "b", "c"};
    for (const auto& r : runs) {
        const std::string threads = r == "c" ? " --threads 3" : " --threads 1";
        const std::string cmds[] = {
            cli + " project" + lattice + threads + " -o " + (root / r / "project").string(),
            cli + " nullspace --scenario theorem4 --grid-n 6" + threads + " -o " + (root / r / "nullspace").string(),
            cli + " reconstruct --input " + (root / r / "project" / "sinogram.csv").string() +
                " --dims 4 4 4 --disk-nodes 41 --reference reference_ball" + threads + " -o " +
                (root / r / "reconstruct").string(),
        };
        for (const auto& cmd : cmds)
            if (std::system((cmd + " > /dev/null").c_str()) != 0) return {false, "command failed: " + cmd};
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
        if (!entry.is_regular_file() || entry.path().filename() == "manifest.json") continue;
        const fs::path rel = fs::relative(entry.path(), root / "a");
        const std::string ref = io::detail::read_file(entry.path().string());
        for (const std::string other : {"b", "c"}) {
            if (!fs::exists(root / other / rel) || io::detail::read_file((root / other / rel).string()) != ref)
                return {false, "artifact differs: " + rel.string() + " (run " + other + ")"};
        }
        ++compared;
    }
    return {compared >= 4, std::to_string(compared) + " artifacts byte-identical over 3 runs (threads 1, 1, 3)"};
}

}  // namespace

int main() {
    set_threads(1);
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"decomposition identity", decomposition},
        {"Q-to-R2 reduction", q_to_r2},
        {"moment homogeneity and Fourier series", moments},
        {"Cauchy-kernel identity chain", cauchy},
        {"discrete uniqueness, direction-set scenario", direction_set},
        {"discrete uniqueness, vertex-set scenario", vertex_set},
        {"local uniqueness outside W", local_uniqueness},
        {"ray moments", ray_moments},
        {"end-to-end reconstruction", reconstruction},
        {"CLI determinism", determinism},
    };
    int failures = 0, index = 0;
    for (const auto& c : criteria) {
        ++index;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %d criteria passed\n", index - failures, index);
    return failures;
}
