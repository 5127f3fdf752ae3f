#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "widthforge/bodies.hpp"
#include "widthforge/functionals.hpp"
#include "widthforge/optimizer.hpp"
#include "widthforge/oracles.hpp"

using namespace widthforge;

namespace {

OptimizerConfig small_config()
{
    OptimizerConfig cfg;
    cfg.lmax = 3;
    cfg.restarts = 2;
    cfg.max_iters = 1500;
    cfg.seed = 11;
    return cfg;
}

const OptimizeResult& small_run()
{
    static const OptimizeResult r = optimize(small_config());
    return r;
}

} // namespace

TEST(Objective, ScaleInvariant)
{
    const OddHarmonicCoeffs c = random_odd(5, 21, 1.0);
    const SphereGrid grid = optimizer_grid(5);
    const Objective f(grid, 5, 2);
    const double base = f(c).value;
    EXPECT_GT(base, 0.0);
    for (double t : {0.5, 2.0, 10.0}) EXPECT_NEAR(f(c.scaled(t)).value, base, 1e-8 * base);
}

TEST(Objective, DegreeThreeMatchesBisection)
{
    OddHarmonicCoeffs c(3);
    c.set(3, 0, 1.0);
    const ObjectiveValue v = objective(c, 3);
    const double w0 = oracle::bisection_floor(c, SphereGrid(64, 128));
    EXPECT_NEAR(v.energy, 5.0, 1e-14);
    EXPECT_NEAR(v.value, 5.0 / (w0 * w0), 1e-6 * v.value);
    EXPECT_FALSE(v.gauge);
}

TEST(Objective, GaugeAndZero)
{
    OddHarmonicCoeffs d1(3, true);
    d1.set(1, 1, 0.7);
    const ObjectiveValue v = objective(d1);
    EXPECT_TRUE(v.gauge);
    EXPECT_EQ(v.value, 0.0);
    EXPECT_THROW(objective(OddHarmonicCoeffs(3)), ValidationError);
}

TEST(Objective, RotationInvariant)
{
    const OddHarmonicCoeffs c = random_odd(5, 4, 1.0);
    const double base = objective(c, 3).value;
    const Mat3 r = rotation_to_z(normalized(Vec3{0.3, -0.5, 0.8}));
    const OddHarmonicCoeffs rc = rotate_coeffs(c, r);
    EXPECT_NEAR(energy(rc), energy(c), 1e-10);
    EXPECT_NEAR(objective(rc, 3).value, base, 1e-5 * base);
}

TEST(Objective, SoftMaxBoundsTheFloorFromAbove)
{
    const OddHarmonicCoeffs c = random_odd(5, 9, 1.0);
    const SphereGrid grid = optimizer_grid(5);
    const double grid_top = w_floor(c, grid, 0).w0;
    const double soft = Objective(grid, 5, 1, 1e-3)(c).w0;
    EXPECT_GE(soft, grid_top);
    EXPECT_LE(soft, grid_top * (1.0 + 1e-3 * std::log(static_cast<double>(grid.size())) + 1e-12));
}

TEST(OptimizerConfig, Validation)
{
    OptimizerConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.lmax = 4;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = OptimizerConfig{};
    cfg.restarts = 0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    cfg = OptimizerConfig{};
    cfg.normalization = -1.0;
    EXPECT_THROW(cfg.validate(), ValidationError);
    EXPECT_EQ(OptimizerConfig{}.grid().n_theta(), optimizer_grid(7).n_theta());
}

TEST(Optimize, BeatsTheBallAndTheBaseline)
{
    const OptimizeResult& r = small_run();
    EXPECT_LT(r.best.ratio, 1.0);
    EXPECT_LE(r.best.ratio, r.baseline_ratio + 1e-9);
    EXPECT_GT(r.best.objective, 0.0);
    EXPECT_NEAR(r.best.ratio, 1.0 - 3.0 / (4.0 * std::numbers::pi) * r.best.objective, 1e-12);
    EXPECT_NEAR(r.best.coeffs.norm(), 1.0, 1e-12);
}

TEST(Optimize, TracesAreMonotone)
{
    for (const RestartRecord& rec : small_run().restarts) {
        ASSERT_FALSE(rec.trace.empty());
        for (std::size_t k = 1; k < rec.trace.size(); ++k) EXPECT_GE(rec.trace[k], rec.trace[k - 1]) << rec.restart;
        EXPECT_GE(rec.best_objective, rec.start_objective);
        EXPECT_LE(rec.evaluations, 1500u);
    }
}

TEST(Optimize, DeterministicForAFixedSeed)
{
    const OptimizeResult again = optimize(small_config());
    EXPECT_EQ(again.best.coeffs, small_run().best.coeffs);
    EXPECT_EQ(again.best.objective, small_run().best.objective);
    EXPECT_EQ(again.best.restart, small_run().best.restart);
}

TEST(Optimize, OptimumIsAFixedPoint)
{
    const OptimizeResult& r = small_run();
    OptimizerConfig cfg = small_config();
    cfg.restarts = 1;
    cfg.initial = r.best.coeffs;
    const OptimizeResult again = optimize(cfg);
    const double before = r.restarts[static_cast<std::size_t>(r.best.restart)].best_objective;
    EXPECT_LE(again.restarts[0].best_objective, before * (1.0 + 1e-6));
}

TEST(SecondVariation, EnergyIsQuadraticAndPositive)
{
    const OddHarmonicCoeffs h = random_odd(7, 1, 1.0);
    for (std::uint64_t s = 0; s < 100; ++s) {
        const OddHarmonicCoeffs v = random_odd(7, 1000 + s, 1.0);
        EXPECT_GT(energy(v), 0.0);
        EXPECT_LE(second_variation_check(h, v, 0.1), 1e-12);
    }
    OddHarmonicCoeffs bad(3, true);
    bad.set(1, 0, 1.0);
    EXPECT_THROW(second_variation_check(h.padded(3), bad, 0.1), ValidationError);
}

TEST(NormalFlow, BallVolumes)
{
    const SphereGrid grid = default_grid(3);
    const auto flow = normal_flow(ball(3), 2.0, 1.0, 5, grid);
    ASSERT_EQ(flow.size(), 5u);
    for (const auto& r : flow) {
        EXPECT_NEAR(r.volume, 4.0 * std::numbers::pi / 3.0 * r.w * r.w * r.w, 1e-12);
        EXPECT_NEAR(r.volume_direct, r.volume, 1e-10);
        EXPECT_DOUBLE_EQ(r.ratio, 1.0);
    }
}

TEST(NormalFlow, RatioDecreasesTowardTheFloor)
{
    const OddHarmonicCoeffs c = random_odd(5, 3, 0.5);
    const SphereGrid grid = default_grid(5);
    WidthFloorOptions opt;
    opt.refine_levels = 3;
    const double w0 = w_floor(c, grid, synth_jet(c, grid), opt).w0;
    const auto flow = normal_flow(c, 3.0 * w0, w0, 8, grid);
    for (std::size_t k = 1; k < flow.size(); ++k) {
        EXPECT_LT(flow[k].ratio, flow[k - 1].ratio);
        EXPECT_LT(flow[k].volume, flow[k - 1].volume);
    }
    EXPECT_NEAR(flow.back().w, w0, 1e-15);
    EXPECT_THROW(normal_flow(c, 3.0 * w0, 0.9 * w0, 4, grid), ValidationError);
    EXPECT_THROW(normal_flow(c, w0, 2.0 * w0, 4, grid), ValidationError);
    EXPECT_THROW(normal_flow(c, 2.0 * w0, w0, 1, grid), ValidationError);
}

TEST(NormalFlow, BoundaryMovesAlongTheNormal)
{
    const OddHarmonicCoeffs c = random_odd(5, 6, 0.5);
    const SphereGrid grid = default_grid(5);
    const SupportJet jet = synth_jet(c, grid);
    const auto a = embed(jet, 2.0, grid), b = embed(jet, 1.75, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec3 d = a[i] - b[i];
        const Vec3 u = grid.node(i).u;
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(d[k], 0.25 * u[k], 1e-12);
    }
}

TEST(Verification, BallFailsBothConditions)
{
    const SphereGrid grid = default_grid(3);
    const VerificationReport rep = verify_necessary_conditions(ball(3), 1.0, grid);
    EXPECT_FALSE(rep.pass);
    EXPECT_NEAR(rep.antipodal_vanishing_score, 1.0, 1e-12);
    EXPECT_NEAR(rep.k2_deviation, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(rep.smooth_fraction, 1.0);
}

TEST(Verification, ReportsTheSettings)
{
    const OddHarmonicCoeffs c = random_odd(5, 2, 1.0);
    const SphereGrid grid = default_grid(5);
    const double w = 2.0 * w_floor(c, grid).w0;
    const VerificationReport rep = verify_necessary_conditions(c, w, grid, 1e-2, 0.2);
    EXPECT_DOUBLE_EQ(rep.delta_smooth, 1e-2 * w * w);
    EXPECT_DOUBLE_EQ(rep.tolerance, 0.2);
    EXPECT_GE(rep.k2_is_smaller, 0.0);
    EXPECT_LE(rep.k2_is_smaller, 1.0);
}

TEST(Canonicalize, PutsTheCubicMaximumOnTheAxis)
{
    const OddHarmonicCoeffs c = random_odd(5, 17, 1.0);
    const OddHarmonicCoeffs k = canonicalize(c);
    EXPECT_NEAR(energy(k), energy(c), 1e-10);
    OddHarmonicCoeffs deg3(3);
    for (int m = -3; m <= 3; ++m) deg3.set(3, m, k.get(3, m));
    const SphereGrid grid(64, 128);
    const SupportJet jet = synth_jet(deg3, grid);
    JetEvaluator eval(3);
    const double top = eval.value(deg3, Vec3{0, 0, 1});
    for (double v : jet.h) EXPECT_LE(v, top + 1e-8);
}

TEST(Bump, DiagnosticIsFiniteAndLeakageDropsWithDegree)
{
    const OddHarmonicCoeffs h5 = random_odd(5, 3, 1.0);
    const BumpDiagnostic d5 = bump_diagnostic(h5, optimizer_grid(5));
    const BumpDiagnostic d9 = bump_diagnostic(h5.padded(9), optimizer_grid(9));
    EXPECT_GT(d5.leakage, 0.0);
    EXPECT_LT(d9.leakage, d5.leakage);
    EXPECT_TRUE(std::isfinite(d5.objective_plus));
    EXPECT_TRUE(std::isfinite(d5.objective_minus));
    EXPECT_NEAR(d5.objective, Objective(optimizer_grid(5), 5, 3)(h5).value, 1e-12);
}

TEST(RotationToZ, MapsTheVectorAndIsOrthogonal)
{
    for (const Vec3& n : {Vec3{0, 0, 1}, Vec3{0, 0, -1}, normalized(Vec3{1, 2, 3}), normalized(Vec3{1e-9, 0, -1})}) {
        const Mat3 r = rotation_to_z(n);
        const Vec3 z = r * n;
        EXPECT_NEAR(z[2], 1.0, 1e-12);
        const Mat3 rt = transpose(r);
        const Vec3 back = rt * z;
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(back[k], n[k], 1e-12);
    }
}
