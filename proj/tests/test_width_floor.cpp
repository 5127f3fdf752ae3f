#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <complex>
#include <random>

#include "widthforge/bodies.hpp"
#include "widthforge/oracles.hpp"
#include "widthforge/width_floor.hpp"

using namespace widthforge;

TEST(WidthRoot, MatchesIndependentRootFinder)
{
    // roots of w^2 + a w + b from the complex quadratic formula
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int k = 0; k < 1000; ++k) {
        const double a = u(rng), b = u(rng);
        const std::complex<double> d = std::sqrt(std::complex<double>(a * a - 4.0 * b, 0.0));
        const std::complex<double> r = 0.5 * (-a + d);
        const double expect = std::abs(r.imag()) > 0.0 ? 0.0 : std::max(0.0, r.real());
        EXPECT_NEAR(width_root(a, b), expect, 1e-12 * (1.0 + std::abs(expect)));
    }
}

TEST(WidthRoot, DegreeThreeNodesBracketTheRoot)
{
    OddHarmonicCoeffs c(3);
    c.set(3, 1, 0.2);
    const SphereGrid grid = default_grid(3);
    const SupportJet jet = synth_jet(c, grid);
    const auto W = w_field(jet);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const JetSample j = jet.at(i);
        const double a = alpha_of(j), b = beta_of(j);
        EXPECT_NEAR(a, -10.0 * j.h, 1e-12);
        if (W[i] > 1e-3 && a * a - 4 * b > 1e-6) {
            EXPECT_GT(area_density(a, b, W[i] + 1e-6), 0.0);
            EXPECT_LT(area_density(a, b, W[i] - 1e-6), 0.0);
        }
    }
}

TEST(WidthFloor, ZeroFieldHasZeroFloor)
{
    const SphereGrid grid(8, 16);
    const auto r = w_floor(OddHarmonicCoeffs(3), grid);
    EXPECT_EQ(r.w0, 0.0);
    for (double v : r.W_field) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(w_floor(OddHarmonicCoeffs(3), grid, -1), ValidationError);
}

TEST(WidthFloor, AgreesWithBisectionOracle)
{
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const int lmax = 3 + 2 * static_cast<int>(seed % 3);
        const OddHarmonicCoeffs c = random_odd(lmax, seed, 0.5);
        const SphereGrid grid = default_grid(lmax);
        const double w0 = w_floor(c, grid).w0;
        const double bis = oracle::bisection_floor(c, SphereGrid(96, 192));
        EXPECT_NEAR(w0 / bis, 1.0, 1e-6) << seed;
    }
}

TEST(WidthFloor, SmallDegreeThreeAgreesWithBisection)
{
    OddHarmonicCoeffs c(3);
    c.set(3, 0, 1e-3);
    const double w0 = w_floor(c, default_grid(3)).w0;
    EXPECT_NEAR(w0 / oracle::bisection_floor(c, SphereGrid(32, 64)), 1.0, 1e-6);
}

TEST(WidthFloor, IsHomogeneous)
{
    const OddHarmonicCoeffs c = random_odd(5, 3, 1.0);
    const SphereGrid grid = default_grid(5);
    const double w0 = w_floor(c, grid, 3).w0;
    for (double t : {0.5, 2.0, 10.0}) EXPECT_NEAR(w_floor(c.scaled(t), grid, 3).w0, t * w0, 1e-8 * t * w0);
}

TEST(WidthFloor, FloorIsAttainedAndDensityNonNegative)
{
    const OddHarmonicCoeffs c = random_odd(7, 5, 1.0);
    const SphereGrid grid = default_grid(7);
    const SupportJet jet = synth_jet(c, grid);
    const auto r = w_floor(c, grid, jet);
    const auto dens = area_element(jet, r.w0);
    for (double d : dens) EXPECT_GE(d, -1e-8 * r.w0 * r.w0);
    ASSERT_FALSE(r.argmax_nodes.empty());
    EXPECT_LE(std::abs(r.argmax_density), 1e-6 * r.w0 * r.w0);
    EXPECT_GE(r.w0, r.grid_max);
    ASSERT_GE(r.refinement_record.size(), 2u);
    for (std::size_t k = 1; k < r.refinement_record.size(); ++k)
        EXPECT_GE(r.refinement_record[k].w0, r.refinement_record[k - 1].w0);
}

TEST(WidthFloor, DensitySignAroundTheFloor)
{
    const OddHarmonicCoeffs c = random_odd(5, 8, 1.0);
    const SphereGrid grid = default_grid(5);
    const SupportJet jet = synth_jet(c, grid);
    const double w0 = w_floor(c, grid, jet).w0;
    EXPECT_GT(oracle::min_density(c, grid, jet, w0 * (1.0 + 1e-6)), 0.0);
    EXPECT_LT(oracle::min_density(c, grid, jet, w0 * (1.0 - 1e-6)), 0.0);
}

TEST(WidthFloor, MaximumOnThePoleIsFound)
{
    // axisymmetric bodies put extremes of W on the axis, where probes end up
    // arbitrarily close to the frame singularity
    const OddHarmonicCoeffs c = profile_to_coeffs(rotated_reuleaux(2.0), 7);
    const SphereGrid grid = default_grid(7);
    const double w0 = w_floor(c, grid, 3).w0;
    EXPECT_NEAR(w0 / oracle::bisection_floor(c, SphereGrid(64, 128)), 1.0, 1e-6);
    EXPECT_LT(w0, 2.0);
}

TEST(WidthFloor, ErratumDiscriminantDisagreesWithBisection)
{
    const OddHarmonicCoeffs c = random_odd(5, 1, 1.0);
    const SphereGrid grid = default_grid(5);
    WidthFloorOptions opt;
    opt.discriminant = Discriminant::Erratum;
    const double wrong = w_floor(c, grid, synth_jet(c, grid), opt).w0;
    const double bis = oracle::bisection_floor(c, SphereGrid(24, 48));
    EXPECT_GT(std::abs(wrong / bis - 1.0), 1e-3);
}

TEST(SingularSet, EmptyForBallAndAboveTheFloor)
{
    const SphereGrid grid = default_grid(5);
    EXPECT_TRUE(singular_set(OddHarmonicCoeffs(5), grid, 1.0, 1e-6).empty());
    const OddHarmonicCoeffs c = random_odd(5, 2, 1.0);
    const double w0 = w_floor(c, grid).w0;
    EXPECT_TRUE(singular_set(c, grid, 1.5 * w0, 1e-6).empty());
}

TEST(SingularSet, ContainsTheArgmaxNodes)
{
    // at the grid-level floor the area element vanishes exactly on the argmax nodes
    const OddHarmonicCoeffs c = random_odd(5, 2, 1.0);
    const SphereGrid grid = default_grid(5);
    const auto r = w_floor(c, grid, 0);
    const auto set = singular_set(c, grid, r.w0, 1e-6);
    ASSERT_FALSE(set.empty());
    for (std::size_t i : r.argmax_nodes) EXPECT_NE(std::find(set.begin(), set.end(), i), set.end());
}
