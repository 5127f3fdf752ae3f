#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "harmonics.hpp"
#include "parallel.hpp"
#include "sphere_grid.hpp"

namespace widthforge {

inline OddHarmonicCoeffs ball(int lmax = 3) { return OddHarmonicCoeffs(lmax); }

/// Seeded Gaussian coefficients on degrees 3..lmax, rescaled to the given norm.
inline OddHarmonicCoeffs random_odd(int lmax, std::uint64_t seed, double scale)
{
    if (lmax < 3 || lmax % 2 == 0) throw ValidationError("random_odd: lmax must be odd and >= 3");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    OddHarmonicCoeffs c(lmax);
    for (std::size_t k : c.free_slots()) c.slot(k) = gauss(rng);
    const double n = c.norm();
    return c.scaled(scale / n);
}

/// Support function of a planar body symmetric about the z axis, sampled in
/// the direction (sin psi, cos psi), psi in [0, pi]. Each piece is the
/// support function of a point, <center, n(psi)> + offset, i.e. a vertex
/// (offset 0) or a circular arc of radius `offset` around `center`.
struct ProfilePiece
{
    double psi_begin = 0.0;
    double psi_end = 0.0;
    double center_x = 0.0;
    double center_z = 0.0;
    double offset = 0.0;
};

struct AxisymmetricProfile
{
    double width = 0.0; // = 2w
    std::vector<ProfilePiece> pieces;

    /// psi values where consecutive pieces meet.
    std::vector<double> breakpoints() const
    {
        std::vector<double> out;
        for (std::size_t k = 1; k < pieces.size(); ++k) out.push_back(pieces[k].psi_begin);
        return out;
    }

    const ProfilePiece& piece_at(double psi, bool from_left = false) const
    {
        for (std::size_t k = 0; k < pieces.size(); ++k) {
            const bool last = k + 1 == pieces.size();
            if (from_left ? (psi <= pieces[k].psi_end || last) : (psi < pieces[k].psi_end || last)) return pieces[k];
        }
        return pieces.back();
    }

    double support(double psi) const { return support_on(piece_at(psi), psi); }

    /// d support / d psi, taking the piece on the left (from_left) or right of psi.
    double derivative(double psi, bool from_left = false) const
    {
        const ProfilePiece& p = piece_at(psi, from_left);
        return p.center_x * std::cos(psi) - p.center_z * std::sin(psi);
    }

    static double support_on(const ProfilePiece& p, double psi)
    {
        return p.center_x * std::sin(psi) + p.center_z * std::cos(psi) + p.offset;
    }
};

/// Vertices of the Reuleaux triangle of the given width, centroid at the
/// origin, vertex 0 on the +z axis.
inline std::array<std::array<double, 2>, 3> reuleaux_vertices(double width)
{
    const double a = width / std::sqrt(3.0);
    const double low = a - width * std::sqrt(3.0) / 2.0;
    return {{{0.0, a}, {width / 2.0, low}, {-width / 2.0, low}}};
}

/// Profile of the Reuleaux triangle revolved about its symmetry axis through
/// vertex 0. From the top: vertex 0, the arc centered at vertex 2, vertex 1
/// (which sweeps the rim circle), the arc centered at vertex 0 (spherical cap).
inline AxisymmetricProfile rotated_reuleaux(double width)
{
    if (!(width > 0.0)) throw ValidationError("rotated_reuleaux: width must be positive");
    const auto v = reuleaux_vertices(width);
    const double pi = std::numbers::pi;
    AxisymmetricProfile p;
    p.width = width;
    p.pieces = {
        {0.0, pi / 6.0, v[0][0], v[0][1], 0.0},
        {pi / 6.0, pi / 2.0, v[2][0], v[2][1], width},
        {pi / 2.0, 5.0 * pi / 6.0, v[1][0], v[1][1], 0.0},
        {5.0 * pi / 6.0, pi, v[0][0], v[0][1], width},
    };
    return p;
}

/// Inside the Reuleaux triangle: within `width` of all three vertices.
inline bool inside_reuleaux(double x, double z, double width)
{
    const auto v = reuleaux_vertices(width);
    const double r2 = width * width;
    for (const auto& c : v) {
        const double dx = x - c[0], dz = z - c[1];
        if (dx * dx + dz * dz > r2) return false;
    }
    return true;
}

/// Odd part h = support - width/2 projected onto odd harmonics. Only m = 0
/// terms can appear. The default projection grid is much finer in theta than
/// the band limit requires, since the profile is only C^{1,1}.
inline OddHarmonicCoeffs profile_to_coeffs(const AxisymmetricProfile& profile, int lmax, const SphereGrid& grid)
{
    if (lmax < 1 || lmax % 2 == 0) throw ValidationError("profile_to_coeffs: lmax must be odd");
    std::vector<double> field(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec3& u = grid.node(i).u;
        const double psi = std::atan2(std::hypot(u[0], u[1]), u[2]);
        field[i] = profile.support(psi) - 0.5 * profile.width;
    }
    // the constant-width identity holds to rounding only; symmetrize exactly
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::size_t j = grid.antipode(i);
        if (j > i) {
            const double odd = 0.5 * (field[i] - field[j]);
            field[i] = odd;
            field[j] = -odd;
        }
    }
    return project(field, grid, lmax);
}

inline SphereGrid profile_projection_grid(int lmax) { return SphereGrid(8 * lmax + 64, 4 * lmax + 4); }

inline OddHarmonicCoeffs profile_to_coeffs(const AxisymmetricProfile& profile, int lmax)
{
    return profile_to_coeffs(profile, lmax, profile_projection_grid(lmax));
}

struct MonteCarloVolume
{
    double volume = 0.0;
    double std_error = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t hits = 0;
};

/// Volume of the revolved Reuleaux triangle by rejection sampling in its
/// bounding box. Samples are split into fixed chunks with their own seeded
/// streams, so the result does not depend on the worker count.
inline MonteCarloVolume monte_carlo_rotated_reuleaux_volume(double width, std::uint64_t samples, std::uint64_t seed,
                                                            unsigned workers = 0)
{
    const auto v = reuleaux_vertices(width);
    const double z_hi = v[0][1];
    const double z_lo = v[0][1] - width;
    const double r = width / 2.0;
    const double box = (2.0 * r) * (2.0 * r) * (z_hi - z_lo);

    constexpr std::size_t chunks = 64;
    std::vector<std::uint64_t> hits(chunks, 0);
    parallel_for(chunks, workers, [&](std::size_t k) {
        const std::uint64_t n = samples / chunks + (k < samples % chunks ? 1 : 0);
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + k);
        std::uniform_real_distribution<double> ux(-r, r), uz(z_lo, z_hi);
        std::uint64_t count = 0;
        for (std::uint64_t s = 0; s < n; ++s) {
            const double x = ux(rng), y = ux(rng), z = uz(rng);
            if (inside_reuleaux(std::hypot(x, y), z, width)) ++count;
        }
        hits[k] = count;
    });
    MonteCarloVolume out;
    out.samples = samples;
    for (auto h : hits) out.hits += h;
    const double p = static_cast<double>(out.hits) / static_cast<double>(samples);
    out.volume = p * box;
    out.std_error = box * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
    return out;
}

} // namespace widthforge
