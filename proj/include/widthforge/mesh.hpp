#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "harmonics.hpp"
#include "width_floor.hpp"

namespace widthforge {

/// Boundary mesh of a body. Vertex k sits at f(directions[k]).
struct Mesh
{
    std::vector<Vec3> directions;
    std::vector<Vec3> vertices;
    std::vector<std::array<std::size_t, 3>> triangles; // counterclockwise seen from outside
    int n_theta = 0;
    int n_phi = 0;
    double w = 0.0;

    /// Index of the vertex in direction -directions[k].
    std::size_t antipode(std::size_t k) const
    {
        const std::size_t last = vertices.size() - 1;
        if (k == 0) return last;
        if (k == last) return 0;
        const std::size_t ring = (k - 1) / static_cast<std::size_t>(n_phi);
        const std::size_t j = (k - 1) % static_cast<std::size_t>(n_phi);
        const std::size_t half = static_cast<std::size_t>(n_phi / 2);
        return 1 + (static_cast<std::size_t>(n_theta) - 1 - ring) * static_cast<std::size_t>(n_phi) + (j + half) % static_cast<std::size_t>(n_phi);
    }
};

/// Relative slack on the width floor when exporting.
inline constexpr double kExportFloorSlack = 1e-9;

/// Mesh on a display lattice of n_theta rings (theta = pi i / (n_theta + 1))
/// by n_phi meridians, closed by the two pole vertices. The rings are
/// antipodally symmetric, so every vertex has its antipode in the mesh.
inline Mesh build_mesh(const OddHarmonicCoeffs& coeffs, double w, int n_theta, int n_phi)
{
    if (n_theta < 1) throw ValidationError("mesh: n_theta must be >= 1");
    if (n_phi < 3 || n_phi % 2 != 0) throw ValidationError("mesh: n_phi must be even and >= 4");
    if (!(w > 0.0)) throw ValidationError("mesh: w must be positive");
    const int lmax = std::max(coeffs.lmax(), 1);
    const SphereGrid check = default_grid(lmax);
    WidthFloorOptions opt;
    opt.refine_levels = 3;
    const double w0 = w_floor(coeffs, check, synth_jet(coeffs, check), opt).w0;
    if (w < w0 * (1.0 - kExportFloorSlack))
        throw ValidationError("mesh: w = " + std::to_string(w) + " is below the width floor " + std::to_string(w0));

    Mesh m;
    m.n_theta = n_theta;
    m.n_phi = n_phi;
    m.w = w;
    const double pi = std::numbers::pi;
    m.directions.push_back({0.0, 0.0, 1.0});
    for (int i = 1; i <= n_theta; ++i)
        for (int j = 0; j < n_phi; ++j) m.directions.push_back(unit_vector(pi * i / (n_theta + 1.0), 2.0 * pi * j / n_phi));
    m.directions.push_back({0.0, 0.0, -1.0});

    JetEvaluator eval(lmax);
    m.vertices.reserve(m.directions.size());
    for (const Vec3& u : m.directions) m.vertices.push_back(embed_point(eval(coeffs, u), w, u));

    const std::size_t np = static_cast<std::size_t>(n_phi);
    auto at = [&](int ring, std::size_t j) { return 1 + static_cast<std::size_t>(ring) * np + j % np; };
    const std::size_t south = m.directions.size() - 1;
    for (std::size_t j = 0; j < np; ++j) m.triangles.push_back({0, at(0, j), at(0, j + 1)});
    for (int i = 0; i + 1 < n_theta; ++i)
        for (std::size_t j = 0; j < np; ++j) {
            const std::size_t a = at(i, j), b = at(i, j + 1), c = at(i + 1, j), d = at(i + 1, j + 1);
            m.triangles.push_back({a, c, d});
            m.triangles.push_back({a, d, b});
        }
    for (std::size_t j = 0; j < np; ++j) m.triangles.push_back({south, at(n_theta - 1, j + 1), at(n_theta - 1, j)});
    return m;
}

/// Enclosed volume by the divergence theorem over the flat triangles.
inline double mesh_volume(const Mesh& m)
{
    double v = 0.0;
    for (const auto& t : m.triangles) v += dot(m.vertices[t[0]], cross(m.vertices[t[1]], m.vertices[t[2]]));
    return v / 6.0;
}

inline double mesh_area(const Mesh& m)
{
    double a = 0.0;
    for (const auto& t : m.triangles)
        a += norm(cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]));
    return a / 2.0;
}

/// max over vertex directions u of |<f(u) - f(-u), u> - 2w|.
inline double mesh_width_deviation(const Mesh& m)
{
    double dev = 0.0;
    for (std::size_t k = 0; k < m.vertices.size(); ++k) {
        const double width = dot(m.vertices[k] - m.vertices[m.antipode(k)], m.directions[k]);
        dev = std::max(dev, std::abs(width - 2.0 * m.w));
    }
    return dev;
}

/// Wavefront OBJ. Each header line is written as a comment.
inline void write_obj(std::ostream& os, const Mesh& m, const std::vector<std::string>& header = {})
{
    for (const auto& line : header) os << "# " << line << '\n';
    const auto old = os.precision(17);
    for (const Vec3& v : m.vertices) os << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    for (const auto& t : m.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    os.precision(old);
}

} // namespace widthforge
