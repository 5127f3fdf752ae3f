#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "widthforge/bodies.hpp"
#include "widthforge/geometry.hpp"
#include "widthforge/oracles.hpp"
#include "widthforge/width_floor.hpp"

using namespace widthforge;

namespace {

const double kY10 = std::sqrt(3.0 / (4.0 * std::numbers::pi)); // Y_{1,0} = kY10 * z

OddHarmonicCoeffs translation(const Vec3& v, int lmax)
{
    // <u, v> = (v_x Y_{1,1} + v_y Y_{1,-1} + v_z Y_{1,0}) / kY10
    OddHarmonicCoeffs c(lmax, true);
    c.set(1, 1, v[0] / kY10);
    c.set(1, -1, v[1] / kY10);
    c.set(1, 0, v[2] / kY10);
    return c;
}

} // namespace

TEST(Geometry, AlphaBetaOfZeroAndTranslations)
{
    const SphereGrid grid(8, 16);
    const auto zero = alpha_beta(synth_jet(OddHarmonicCoeffs(3), grid));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_EQ(zero.alpha[i], 0.0);
        EXPECT_EQ(zero.beta[i], 0.0);
    }
    const auto lin = alpha_beta(synth_jet(translation({0.3, -1.2, 0.7}, 1), grid));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(lin.alpha[i], 0.0, 1e-13);
        EXPECT_NEAR(lin.beta[i], 0.0, 1e-13);
    }
}

TEST(Geometry, AlphaOfDegreeThreeIsMinusTenH)
{
    const SphereGrid grid(10, 20);
    const double eps = 0.03;
    OddHarmonicCoeffs c(3);
    c.set(3, 2, eps);
    const SupportJet jet = synth_jet(c, grid);
    const auto ab = alpha_beta(jet);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(ab.alpha[i], -10.0 * jet.h[i], 1e-10);
}

TEST(Geometry, UnitBallDensityAndCurvature)
{
    const SphereGrid grid(12, 24);
    const SupportJet jet = synth_jet(OddHarmonicCoeffs(3), grid);
    const auto dens = area_element(jet, 1.0);
    for (double d : dens) EXPECT_DOUBLE_EQ(d, 1.0);
    EXPECT_NEAR(grid.integrate(dens), 4.0 * std::numbers::pi, 1e-12);
    const BodyGeometry geo = curvatures(jet, 1.0);
    for (std::size_t i = 0; i < geo.size(); ++i) {
        ASSERT_TRUE(geo.defined[i]);
        EXPECT_DOUBLE_EQ(geo.k1[i], 1.0);
        EXPECT_DOUBLE_EQ(geo.k2[i], 1.0);
        EXPECT_DOUBLE_EQ(geo.mean[i], 1.0);
    }
}

TEST(Geometry, EmbeddingOfSphereAndTranslatedSphere)
{
    const SphereGrid grid(8, 16);
    for (const Vec3& p : embed(synth_jet(OddHarmonicCoeffs(3), grid), 2.0, grid)) EXPECT_NEAR(norm(p), 2.0, 1e-14);

    const Vec3 v0{0.4, -0.2, 0.9};
    const auto pts = embed(synth_jet(translation(v0, 1), grid), 1.5, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec3 expect = 1.5 * grid.node(i).u + v0;
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(pts[i][k], expect[k], 1e-13);
    }
}

TEST(Geometry, WidthIsConstant)
{
    const OddHarmonicCoeffs c = random_odd(7, 21, 0.05);
    const SphereGrid grid = default_grid(7);
    const double w = 0.8;
    const auto pts = embed(synth_jet(c, grid), w, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec3 d = pts[i] - pts[grid.antipode(i)];
        EXPECT_NEAR(dot(d, grid.node(i).u), 2.0 * w, 1e-12);
    }
}

TEST(Geometry, AreaDensityMatchesFiniteDifferenceCrossProduct)
{
    const OddHarmonicCoeffs c = random_odd(7, 4, 0.1);
    const double w = 1.5 * w_floor(c, default_grid(7)).w0;
    JetEvaluator eval(7);
    auto f = [&](double t, double p) { return embed_point(eval(c, t, p), w, t, p); };
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ut(0.2, 2.9), up(0.0, 6.2);
    for (int k = 0; k < 50; ++k) {
        const double t = ut(rng), p = up(rng);
        const JetSample j = eval(c, t, p);
        const double dens = area_density(alpha_of(j), beta_of(j), w);
        const auto fd = oracle::fd_shape_operator(f, t, p, 1e-4);
        EXPECT_NEAR(fd.density / dens, 1.0, 1e-5);
    }
}

TEST(Geometry, CurvaturesMatchFiniteDifferenceShapeOperator)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const OddHarmonicCoeffs c = random_odd(5, seed, 0.08);
        const double w = 1.0;
        JetEvaluator eval(5);
        auto f = [&](double t, double p) { return embed_point(eval(c, t, p), w, t, p); };
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> ut(0.3, 2.8), up(0.0, 6.2);
        for (int k = 0; k < 10; ++k) {
            const double t = ut(rng), p = up(rng);
            const JetSample j = eval(c, t, p);
            const PointCurvature pc = curvature_at(alpha_of(j), beta_of(j), w);
            ASSERT_TRUE(pc.defined);
            const auto fd = oracle::fd_shape_operator(f, t, p, 1e-4);
            EXPECT_NEAR(fd.k1 / pc.k1, 1.0, 1e-4);
            EXPECT_NEAR(fd.k2 / pc.k2, 1.0, 1e-4);
        }
    }
}

TEST(Geometry, CurvatureIdentities)
{
    const OddHarmonicCoeffs c = random_odd(7, 8, 0.1);
    const SphereGrid grid = default_grid(7);
    const BodyGeometry geo = curvatures(synth_jet(c, grid), 1.2 * w_floor(c, grid).w0);
    for (std::size_t i = 0; i < geo.size(); ++i) {
        ASSERT_TRUE(geo.defined[i]);
        EXPECT_NEAR(geo.gauss[i] * geo.density[i], 1.0, 1e-12);
        EXPECT_NEAR(geo.k1[i] * geo.k2[i], geo.gauss[i], 1e-10 * geo.gauss[i]);
        EXPECT_NEAR(geo.k1[i] + geo.k2[i], 2.0 * geo.mean[i], 1e-10 * geo.mean[i]);
        EXPECT_GE(geo.k1[i], geo.k2[i]);
    }
}

TEST(Geometry, UmbilicAndDegenerateThresholds)
{
    // alpha^2 = 4 beta: a double root, k1 = k2 = mean
    const PointCurvature u = curvature_at(-2.0, 1.0, 3.0);
    ASSERT_TRUE(u.defined);
    EXPECT_DOUBLE_EQ(u.k1, u.k2);
    EXPECT_DOUBLE_EQ(u.k1, u.mean);
    // slightly negative discriminant is clamped
    const PointCurvature c = curvature_at(-2.0, 1.0 + 1e-11, 3.0);
    EXPECT_TRUE(c.defined);
    EXPECT_DOUBLE_EQ(c.k1, c.k2);
    // clearly negative discriminant is undefined
    EXPECT_FALSE(curvature_at(-2.0, 1.1, 3.0).defined);
    // vanishing density is undefined
    EXPECT_FALSE(curvature_at(-3.0, 2.0, 1.0).defined);
    EXPECT_TRUE(std::isnan(curvature_at(-3.0, 2.0, 1.0).k2));
}

TEST(Geometry, DensityParityAlgebra)
{
    const OddHarmonicCoeffs c = random_odd(9, 2, 0.2);
    const SphereGrid grid = default_grid(9);
    const SupportJet jet = synth_jet(c, grid);
    const auto ab = alpha_beta(jet);
    const double w = 1.3;
    const auto d = area_element(jet, w);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::size_t j = grid.antipode(i);
        EXPECT_NEAR(ab.alpha[i], -ab.alpha[j], 1e-12);
        EXPECT_NEAR(ab.beta[i], ab.beta[j], 1e-12);
        EXPECT_NEAR(d[i] + d[j], 2.0 * w * w + 2.0 * ab.beta[i], 1e-12);
        EXPECT_NEAR(d[i] - d[j], 2.0 * ab.alpha[i] * w, 1e-12);
    }
}

TEST(Geometry, TranslationChangesOnlyPosition)
{
    const OddHarmonicCoeffs c = random_odd(5, 6, 0.1);
    const Vec3 v0{0.2, 0.5, -0.3};
    OddHarmonicCoeffs shifted(5, true);
    for (int l = 3; l <= 5; l += 2)
        for (int m = -l; m <= l; ++m) shifted.set(l, m, c.get(l, m));
    const OddHarmonicCoeffs t = translation(v0, 5);
    for (int m = -1; m <= 1; ++m) shifted.set(1, m, t.get(1, m));

    const SphereGrid grid = default_grid(5);
    const SupportJet a = synth_jet(c, grid), b = synth_jet(shifted, grid);
    const BodyGeometry ga = body_geometry(a, 1.0, grid), gb = body_geometry(b, 1.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(ga.alpha[i], gb.alpha[i], 1e-10);
        EXPECT_NEAR(ga.beta[i], gb.beta[i], 1e-10);
        EXPECT_NEAR(ga.density[i], gb.density[i], 1e-10);
        EXPECT_NEAR(ga.k1[i], gb.k1[i], 1e-10);
        EXPECT_NEAR(ga.k2[i], gb.k2[i], 1e-10);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(gb.points[i][k] - ga.points[i][k], v0[k], 1e-12);
    }
}

TEST(Geometry, SphereLimitOfCurvatures)
{
    const SphereGrid grid = default_grid(5);
    double prev = 1e300;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        const BodyGeometry g = curvatures(synth_jet(random_odd(5, 3, eps), grid), 2.0);
        double dev = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            dev = std::max({dev, std::abs(g.k1[i] - 0.5), std::abs(g.k2[i] - 0.5)});
        EXPECT_LT(dev, prev);
        prev = dev;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(Geometry, SmallerCurvatureIsHalfInverseWidthOnTheReuleauxTube)
{
    // exact rotated Reuleaux profile: on the tube and the cap, the smaller
    // principal curvature is 1/(2w). Checked on the profile itself through
    // the support function of a body of revolution.
    const double width = 2.0, w = 1.0;
    const AxisymmetricProfile prof = rotated_reuleaux(width);
    for (double psi : {0.7, 1.0, 1.3, 2.7, 2.9, 3.05}) {
        // radii of curvature of a body of revolution with support p(psi):
        // meridian r1 = p + p'', parallel r2 = p + p' cot(psi)
        const double d = 1e-5;
        const double p = prof.support(psi);
        const double dp = (prof.support(psi + d) - prof.support(psi - d)) / (2 * d);
        const double d2p = (prof.support(psi + d) - 2 * p + prof.support(psi - d)) / (d * d);
        const double r_meridian = p + d2p, r_parallel = p + dp / std::tan(psi);
        const double k_small = 1.0 / std::max(r_meridian, r_parallel);
        EXPECT_NEAR(2.0 * w * k_small, 1.0, 1e-4) << psi;
    }
}
