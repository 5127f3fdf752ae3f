#include <gtest/gtest.h>

#include <map>
#include <numbers>
#include <sstream>

#include "widthforge/bodies.hpp"
#include "widthforge/functionals.hpp"
#include "widthforge/mesh.hpp"

using namespace widthforge;

TEST(Mesh, BallVerticesOnTheUnitSphere)
{
    const Mesh m = build_mesh(ball(3), 1.0, 16, 32);
    EXPECT_EQ(m.vertices.size(), 16u * 32u + 2u);
    for (const Vec3& v : m.vertices) EXPECT_NEAR(norm(v), 1.0, 1e-10);
    EXPECT_LT(mesh_volume(m), 4.0 * std::numbers::pi / 3.0);
    EXPECT_GT(mesh_volume(m), 0.95 * 4.0 * std::numbers::pi / 3.0);
}

TEST(Mesh, IsAClosedOrientedSurface)
{
    const Mesh m = build_mesh(random_odd(5, 1, 0.1), 2.0, 7, 10);
    std::map<std::pair<std::size_t, std::size_t>, int> edges;
    for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k) ++edges[{t[k], t[(k + 1) % 3]}];
    for (const auto& [e, n] : edges) {
        EXPECT_EQ(n, 1);
        EXPECT_EQ(edges.count({e.second, e.first}), 1u);
    }
    // Euler characteristic of a sphere
    EXPECT_EQ(static_cast<long>(m.vertices.size()) - static_cast<long>(edges.size() / 2) + static_cast<long>(m.triangles.size()), 2);
}

TEST(Mesh, AntipodeIndexing)
{
    const Mesh m = build_mesh(ball(3), 1.0, 5, 8);
    for (std::size_t k = 0; k < m.vertices.size(); ++k) {
        EXPECT_EQ(m.antipode(m.antipode(k)), k);
        for (int d = 0; d < 3; ++d) EXPECT_NEAR(m.directions[m.antipode(k)][d], -m.directions[k][d], 1e-15);
    }
}

TEST(Mesh, VolumeMatchesClosedFormAt64By128)
{
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const OddHarmonicCoeffs c = random_odd(7, seed, 0.3);
        const double w0 = w_floor(c, default_grid(7), 3).w0;
        for (double w : {w0, 1.5 * w0}) {
            const Mesh m = build_mesh(c, w, 64, 128);
            EXPECT_NEAR(mesh_volume(m) / volume(c, w), 1.0, 5e-3) << seed;
            EXPECT_NEAR(mesh_area(m) / area(c, w), 1.0, 5e-3) << seed;
            EXPECT_LE(mesh_width_deviation(m), 1e-10 * w);
        }
    }
}

TEST(Mesh, VolumeErrorIsSecondOrder)
{
    const OddHarmonicCoeffs c = random_odd(5, 3, 0.2);
    const double w = 2.0 * w_floor(c, default_grid(5), 3).w0;
    const double exact = volume(c, w);
    const double e1 = std::abs(mesh_volume(build_mesh(c, w, 31, 64)) / exact - 1.0);
    const double e2 = std::abs(mesh_volume(build_mesh(c, w, 63, 128)) / exact - 1.0);
    EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(Mesh, PoleVerticesAreLimitsOfTheirRings)
{
    const OddHarmonicCoeffs c = random_odd(7, 8, 0.3);
    const double w = 1.5 * w_floor(c, default_grid(7), 3).w0;
    const Mesh coarse = build_mesh(c, w, 200, 16);
    JetEvaluator eval(7);
    for (double th : {1e-9, std::numbers::pi - 1e-9}) {
        const Vec3 u = unit_vector(th, 0.7);
        const Vec3 near = embed_point(eval(c, u), w, u);
        const Vec3& pole = th < 1.0 ? coarse.vertices.front() : coarse.vertices.back();
        for (int d = 0; d < 3; ++d) EXPECT_NEAR(near[d], pole[d], 1e-7);
    }
}

TEST(Mesh, RefusesWidthsBelowTheFloor)
{
    const OddHarmonicCoeffs c = random_odd(5, 2, 1.0);
    const double w0 = w_floor(c, default_grid(5), 3).w0;
    EXPECT_THROW(build_mesh(c, 0.9 * w0, 8, 16), ValidationError);
    EXPECT_NO_THROW(build_mesh(c, w0, 8, 16));
    EXPECT_THROW(build_mesh(c, w0, 0, 16), ValidationError);
    EXPECT_THROW(build_mesh(c, w0, 8, 15), ValidationError);
}

TEST(Mesh, ObjOutput)
{
    const Mesh m = build_mesh(ball(3), 1.0, 3, 4);
    std::ostringstream os;
    write_obj(os, m, {"widthforge mesh"});
    std::istringstream is(os.str());
    std::string line;
    std::size_t v = 0, f = 0, comments = 0;
    while (std::getline(is, line)) {
        if (line.rfind("v ", 0) == 0) ++v;
        if (line.rfind("f ", 0) == 0) ++f;
        if (line.rfind("# ", 0) == 0) ++comments;
    }
    EXPECT_EQ(v, m.vertices.size());
    EXPECT_EQ(f, m.triangles.size());
    EXPECT_EQ(comments, 1u);
}
