#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "crt/verification.hpp"

using namespace crt;
constexpr double kPi = std::numbers::pi;

namespace {

AnalyticPhantom cauchy_ball() { return phantoms::half_ball_ball().translated({0.0, 0.0, -1.0}); }

const SphereRule& coarse_rule() {
    static const SphereRule rule = sphere_grid(24, 48, UnitVec3(0, 1, 0));
    return rule;
}

}  // namespace

// ---------------------------------------------------------------------------
// fourier_in_s

TEST(FourierInS, ZeroSinogram) {
    const ConeLattice lat({{0.0}, {0.0}, uniform_s(33)});
    for (auto v : fourier_in_s(lat, 0, 0, {-2.0, 0.0, 3.0})) EXPECT_EQ(v, std::complex<double>(0.0, 0.0));
}

TEST(FourierInS, ZeroFrequencyIsRealIntegral) {
    ConeLattice lat({{0.0}, {0.0}, uniform_s(21)});
    for (std::size_t i = 0; i < 21; ++i) lat.at(0, 0, i) = 1.0 - lat.s_nodes()[i] * lat.s_nodes()[i];
    const auto v = fourier_in_s(lat, 0, 0, {0.0})[0];
    EXPECT_EQ(v.imag(), 0.0);
    EXPECT_NEAR(v.real(), 4.0 / 3.0, 1e-2);
}

TEST(FourierInS, ConjugateSymmetry) {
    ConeLattice lat({{0.0}, {0.0}, uniform_s(41)});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (double& v : lat.data()) v = d(rng);
    for (double sigma : {0.5, 1.7, 4.0}) {
        const auto p = fourier_in_s(lat, 0, 0, {sigma})[0];
        const auto m = fourier_in_s(lat, 0, 0, {-sigma})[0];
        EXPECT_LT(std::abs(m - std::conj(p)), 1e-12);
    }
}

TEST(FourierInS, RejectsNonUniformS) {
    const ConeLattice lat({{0.0}, {0.0}, {-1.0, -0.5, 0.6, 1.0}});
    EXPECT_THROW(fourier_in_s(lat, 0, 0, {1.0}), ConfigError);
}

// ---------------------------------------------------------------------------
// moment_a

TEST(MomentA, DegreeZeroIndependentOfTheta) {
    const auto ball = phantoms::reference_ball();
    std::mt19937_64 rng(8);
    std::normal_distribution<double> d;
    const double ref = moment_a(ball, 0, 0.0, {1.0, 0.0}, coarse_rule(), 1e-2);
    EXPECT_GT(ref, 0.0);
    for (int i = 0; i < 8; ++i)
        EXPECT_LT(std::abs(moment_a(ball, 0, 0.0, {d(rng), d(rng)}, coarse_rule(), 1e-2) - ref), 1e-12 * ref);
}

TEST(MomentA, Homogeneity) {
    const auto ball = phantoms::reference_ball();
    for (std::array<double, 2> th : {std::array<double, 2>{0.6, -0.3}, std::array<double, 2>{-1.1, 0.4}}) {
        const auto m1 = moments_a(ball, 8, 0.2, th, coarse_rule(), 1e-2);
        const auto m2 = moments_a(ball, 8, 0.2, {2.0 * th[0], 2.0 * th[1]}, coarse_rule(), 1e-2);
        for (std::size_t j = 0; j <= 8; ++j)
            EXPECT_LE(std::abs(m2[j] - std::ldexp(m1[j], static_cast<int>(j))),
                      1e-12 * std::max(1.0, std::abs(m2[j])))
                << "j=" << j;
    }
}

TEST(MomentA, OddPhantomVanishes) {
    const auto odd = phantoms::odd_ball();
    const auto m = moments_a(odd, 6, 0.0, {0.4, 0.9}, coarse_rule(), 1e-2);
    for (double v : m) EXPECT_LT(std::abs(v), 1e-10);
}

TEST(MomentA, SingleDegreeMatchesBatch) {
    const auto ball = phantoms::reference_ball();
    const auto m = moments_a(ball, 5, 0.0, {0.3, 0.7}, coarse_rule(), 1e-2);
    EXPECT_EQ(moment_a(ball, 5, 0.0, {0.3, 0.7}, coarse_rule(), 1e-2), m[5]);
}

TEST(MomentA, SeriesReproducesFourierTransformOfCf) {
    const auto ball = phantoms::reference_ball();
    const LatticeSpec spec{{0.0}, {0.0, 1.1}, uniform_s(65)};
    const auto lat = conical_forward(ball, spec);
    const std::vector<double> sigmas{-4.0, -1.5, 0.5, 2.0, 4.0};
    for (std::size_t ib = 0; ib < 2; ++ib) {
        const double b = spec.beta_nodes[ib];
        const auto rule = lattice_sphere_rule(spec.s_nodes, QuadratureSpec{}.circle_nodes, cone_axis(b));
        const auto m = moments_a(ball, 25, 0.0, {std::cos(b), std::sin(b)}, rule, QuadratureSpec::phantom_step);
        const auto ft = fourier_in_s(lat, 0, ib, sigmas);
        for (std::size_t k = 0; k < sigmas.size(); ++k) {
            const auto series = moment_series(m, sigmas[k]);
            EXPECT_LT(std::abs(series - ft[k]) / std::abs(ft[k]), 1e-6) << "sigma=" << sigmas[k];
        }
    }
}

// ---------------------------------------------------------------------------
// moment_p and the Cauchy identity

TEST(MomentP, MassAndCentroid) {
    const auto ball = phantoms::reference_ball();
    const Vec3 c{0.0, 2.0, 0.0};
    const double mass = 4.0 / 3.0 * kPi * 0.125;
    for (const UnitVec3& w : {UnitVec3(0, 1, 0), UnitVec3(1, 1, 0), UnitVec3(0.3, -0.2, 0.9)}) {
        const double m = dot(c, w.vec());
        const auto r = radon3_samples(ball, {w}, linspace(m - 0.6, m + 0.6, 121));
        EXPECT_NEAR(moment_p(r, 0, 0), mass, 0.01 * mass);
        EXPECT_NEAR(moment_p(r, 1, 0), m * mass, 0.01 * std::max(std::abs(m) * mass, 1e-3));
    }
}

TEST(MomentP, HomogeneousPolynomialFit) {
    const auto ball = cauchy_ball();
    const auto omegas = fibonacci_sphere(40);
    const auto r = radon3_samples(ball, omegas, linspace(-0.6, 0.6, 161), 192);
    for (int j = 0; j <= 4; ++j) EXPECT_LT(homogeneous_fit_residual(r, j), 1e-3) << "j=" << j;
}

TEST(Cauchy, ZeroPhantom) {
    const auto res = cauchy_identity_residual(AnalyticPhantom{}, 0.5, UnitVec3(0, 0, -1));
    EXPECT_EQ(res.lhs, 0.0);
    EXPECT_EQ(res.rhs, 0.0);
}

TEST(Cauchy, IdentityChainOnSmallBall) {
    const auto res = cauchy_identity_residual(cauchy_ball(), 0.5, UnitVec3(0, 0, -1));
    EXPECT_GT(res.margin, 0.0);
    EXPECT_LT(res.residual, 1e-2) << res.lhs << " vs " << res.rhs;
    EXPECT_LT(res.series_residual, 1e-3) << res.series << " vs " << res.rhs;
}

TEST(Cauchy, HypothesisViolationsReported) {
    EXPECT_THROW(cauchy_identity_residual(cauchy_ball(), 0.5, UnitVec3(0, 0, 1)), ConfigError);
    EXPECT_THROW(cauchy_identity_residual(phantoms::reference_ball(), 0.5, UnitVec3(0, 0, -1)), ConfigError);
}

// ---------------------------------------------------------------------------
// ray moments

TEST(RayMoment, MissingRayVanishes) {
    const auto ball = phantoms::reference_ball();
    for (int k = 1; k <= 6; ++k) EXPECT_LT(std::abs(ray_moment(ball, k, {0, 0, 0}, UnitVec3(1, 0, 0), 5e-3)), 1e-10);
}

TEST(RayMoment, FirstMomentIsWeightedRay) {
    const auto ball = phantoms::two_blobs();
    const UnitVec3 a(0.1, 1.0, 0.05);
    EXPECT_EQ(ray_moment(ball, 1, {0.0, 0.0, 0.0}, a, QuadratureSpec::phantom_step), weighted_ray(ball, 0.0, a));
}

TEST(RayMoment, ChordClosedForm) {
    const auto ball = phantoms::reference_ball();
    for (int k = 1; k <= 6; ++k) {
        const double r1 = 1.5, r2 = 2.5;
        const double exact = (std::pow(r2, k + 1) - std::pow(r1, k + 1)) / (k + 1);
        EXPECT_NEAR(ray_moment(ball, k, {0, 0, 0}, UnitVec3(0, 1, 0), 5e-3), exact, 5e-3 * exact) << "k=" << k;
    }
}

// ---------------------------------------------------------------------------
// direction sets

TEST(DirectionSet, ProjectivelyRepeatedPairIsDegenerate) {
    const auto r = direction_set_rank({0.0, kPi}, 1);
    EXPECT_EQ(r.ranks[1], 1);
    EXPECT_FALSE(r.nondegenerate);
}

TEST(DirectionSet, EquispacedHalfTurnIsNondegenerate) {
    for (int d = 0; d <= 8; ++d) EXPECT_TRUE(direction_set_rank(half_turn_beta(static_cast<std::size_t>(d + 1)), d).nondegenerate);
}

TEST(DirectionSet, SingleAngleDegreeZero) { EXPECT_TRUE(direction_set_rank({1.3}, 0).nondegenerate); }

TEST(DirectionSet, RemovingAnAngleNeverRaisesRank) {
    auto angles = half_turn_beta(9);
    const auto full = direction_set_rank(angles, 8);
    angles.erase(angles.begin() + 4);
    const auto fewer = direction_set_rank(angles, 8);
    for (std::size_t j = 0; j < full.ranks.size(); ++j) EXPECT_LE(fewer.ranks[j], full.ranks[j]);
    EXPECT_FALSE(fewer.nondegenerate);
}

// ---------------------------------------------------------------------------
// visibility and W

TEST(Visibility, BallCap) {
    const SupportSet U = BallSet{{0, 2, 0}, 0.5};
    const auto vis = visible_directions(U, 0.0, {UnitVec3(0, 1, 0), UnitVec3(1, 0, 0), UnitVec3(0, -1, 0)});
    ASSERT_EQ(vis.size(), 1u);
    EXPECT_EQ(vis[0].vec(), (Vec3{0, 1, 0}));
    const auto cap = visible_directions(U, 0.0, fibonacci_sphere(20000));
    const double half = std::asin(0.25);
    for (const auto& a : cap) EXPECT_LE(std::acos(a.y()), half + 1e-12);
    // cap area 2 pi (1 - cos half) against the sampled fraction of 4 pi
    EXPECT_NEAR(4.0 * kPi * static_cast<double>(cap.size()) / 20000.0, 2.0 * kPi * (1.0 - std::cos(half)), 5e-3);
}

TEST(Visibility, VertexInsideRejected) {
    EXPECT_THROW(visible_directions(BallSet{{0, 0.2, 0}, 0.5}, 0.0, fibonacci_sphere(10)), ConfigError);
}

TEST(Visibility, BoxSetMatchesRayTest) {
    const SupportSet U = BoxSet{{Box{{-0.2, 1.0, -0.2}, {0.2, 1.4, 0.2}}}};
    const auto vis = visible_directions(U, 0.0, {UnitVec3(0, 1, 0), UnitVec3(0, -1, 0), UnitVec3(0.1, 1, 0)});
    EXPECT_EQ(vis.size(), 2u);
}

TEST(Visibility, DiskProjectionOfBallCapIsConvex) {
    const SupportSet U = BallSet{{0, 2, 0}, 0.5};
    for (double u : {-0.5, 0.0, 0.7}) {
        const auto rep = check_disk_projection_convex(U, u, fibonacci_sphere(40000), 1e-9);
        EXPECT_GT(rep.inside, 100u);
        EXPECT_TRUE(rep.convex) << "u=" << u << " depth " << rep.worst_depth;
    }
}

TEST(Visibility, NonConvexUnionDetected) {
    // two small boxes seen side by side: the gap between them lies inside the hull
    const SupportSet U = BoxSet{{Box{{-1.2, 1.9, -0.1}, {-0.8, 2.1, 0.1}}, Box{{0.8, 1.9, -0.1}, {1.2, 2.1, 0.1}}}};
    const auto rep = check_disk_projection_convex(U, 0.0, fibonacci_sphere(40000), 1e-9);
    EXPECT_FALSE(rep.convex);
}

TEST(RegionW, ContainsSupportAndVertex) {
    const RegionW w({0.0}, BallSet{{0, 2, 0}, 0.5});
    EXPECT_TRUE(region_w_membership(w, {0, 0, 0}));
    EXPECT_TRUE(region_w_membership(w, {0.0, 2.0, 0.0}));
    EXPECT_TRUE(region_w_membership(w, {0.49, 2.0, 0.0}));
    EXPECT_TRUE(region_w_membership(w, {0.0, 2.2, 0.45}));
    EXPECT_TRUE(region_w_membership(w, {0.0, 6.0, 0.0}));
}

TEST(RegionW, PointOutsideCap) {
    const RegionW w({0.0}, BallSet{{0, 2, 0}, 0.5});
    EXPECT_FALSE(region_w_membership(w, {0, 5, 4}));
    EXPECT_FALSE(region_w_membership(w, {0, -1, 0}));
}

TEST(RegionW, BoxSetMembership) {
    const RegionW w({0.0}, BoxSet{{Box{{-0.2, 1.0, -0.2}, {0.2, 1.4, 0.2}}}});
    EXPECT_TRUE(region_w_membership(w, {0.0, 1.2, 0.0}));
    EXPECT_TRUE(region_w_membership(w, {0.1, 3.0, 0.0}));
    EXPECT_FALSE(region_w_membership(w, {0, 5, 4}));
}

TEST(RegionW, MonotoneInA) {
    const SupportSet U = BallSet{{0, 2, 0}, 0.5};
    const RegionW small({0.0}, U);
    const RegionW large({-1.0, 0.0, 1.0}, U);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    int gained = 0;
    for (int i = 0; i < 2000; ++i) {
        const Vec3 x{d(rng), d(rng) + 2.0, d(rng)};
        const bool a = small.contains(x), b = large.contains(x);
        EXPECT_TRUE(!a || b);
        gained += (!a && b);
    }
    EXPECT_GT(gained, 0);
}

TEST(RegionW, RejectsVertexInSupport) {
    EXPECT_THROW(RegionW({0.0}, BallSet{{0, 0.3, 0}, 0.5}), ConfigError);
    EXPECT_THROW(RegionW({}, BallSet{{0, 2, 0}, 0.5}), ConfigError);
}
