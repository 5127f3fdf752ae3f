#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "harmonics.hpp"
#include "sphere_grid.hpp"
#include "vec3.hpp"

namespace widthforge {

/// Absolute clamp for slightly negative discriminants (treated as umbilic).
inline constexpr double kDiscriminantClamp = 1e-9;

/// Relative scale for "area element is zero".
inline constexpr double kDegeneracyScale = 1e-9;

struct AlphaBeta
{
    std::vector<double> alpha; // 2h + lap h
    std::vector<double> beta;  // h^2 + h lap h + det Hess h
};

inline double alpha_of(const JetSample& j) { return 2.0 * j.h + j.lap(); }
inline double beta_of(const JetSample& j) { return j.h * j.h + j.h * j.lap() + j.dethess(); }

inline AlphaBeta alpha_beta(const SupportJet& jet)
{
    AlphaBeta out{std::vector<double>(jet.size()), std::vector<double>(jet.size())};
    for (std::size_t i = 0; i < jet.size(); ++i) {
        out.alpha[i] = 2.0 * jet.h[i] + jet.lap[i];
        out.beta[i] = jet.h[i] * jet.h[i] + jet.h[i] * jet.lap[i] + jet.dethess[i];
    }
    return out;
}

/// d(area of boundary)/dA = w^2 + alpha w + beta. Can be negative below the
/// width floor; callers decide what that means.
inline double area_density(double alpha, double beta, double w) { return w * w + alpha * w + beta; }

inline std::vector<double> area_element(const SupportJet& jet, double w)
{
    const AlphaBeta ab = alpha_beta(jet);
    std::vector<double> out(jet.size());
    for (std::size_t i = 0; i < jet.size(); ++i) out[i] = area_density(ab.alpha[i], ab.beta[i], w);
    return out;
}

/// Boundary point f(u) = (h + w) u + grad h.
inline Vec3 embed_point(const JetSample& j, double w, double theta, double phi)
{
    const Vec3 u = unit_vector(theta, phi);
    return (j.h + w) * u + j.g_theta * frame_theta(theta, phi) + j.g_phi * frame_phi(phi);
}

inline Vec3 embed_point(const JetSample& j, double w, const Vec3& u)
{
    const auto pt = detail::point_trig(u);
    const Vec3 e_theta{pt.z * pt.cphi, pt.z * pt.sphi, -pt.s};
    const Vec3 e_phi{-pt.sphi, pt.cphi, 0.0};
    return (j.h + w) * u + j.g_theta * e_theta + j.g_phi * e_phi;
}

inline std::vector<Vec3> embed(const SupportJet& jet, double w, const SphereGrid& grid)
{
    if (jet.size() != grid.size()) throw ValidationError("embed: jet does not match grid");
    std::vector<Vec3> out(jet.size());
    for (std::size_t i = 0; i < jet.size(); ++i) out[i] = embed_point(jet.at(i), w, grid.node(i).u);
    return out;
}

/// Principal curvatures at one point. `defined` is false where the area
/// element vanishes (within a scale-aware threshold) or the discriminant is
/// clearly negative.
struct PointCurvature
{
    bool defined = false;
    double k1 = std::numeric_limits<double>::quiet_NaN(); // larger
    double k2 = std::numeric_limits<double>::quiet_NaN(); // smaller
    double gauss = std::numeric_limits<double>::quiet_NaN();
    double mean = std::numeric_limits<double>::quiet_NaN();
};

inline PointCurvature curvature_at(double alpha, double beta, double w)
{
    PointCurvature out;
    const double density = area_density(alpha, beta, w);
    const double eps_deg = kDegeneracyScale * (w * w + std::abs(alpha) * w + std::abs(beta) + 1.0);
    if (density <= eps_deg) return out;
    double disc = alpha * alpha - 4.0 * beta;
    if (disc < -kDiscriminantClamp) return out;
    disc = std::max(disc, 0.0);
    const double root = std::sqrt(disc);
    out.defined = true;
    out.k1 = (2.0 * w + alpha + root) / (2.0 * density);
    out.k2 = (2.0 * w + alpha - root) / (2.0 * density);
    out.gauss = 1.0 / density;
    out.mean = (2.0 * w + alpha) / (2.0 * density);
    return out;
}

/// Pointwise boundary geometry of the body (h, w) on a grid.
struct BodyGeometry
{
    std::vector<double> alpha, beta, density;
    std::vector<double> k1, k2, gauss, mean; // NaN where undefined
    std::vector<bool> defined;
    std::vector<Vec3> points;

    std::size_t size() const { return alpha.size(); }
};

inline BodyGeometry curvatures(const SupportJet& jet, double w)
{
    BodyGeometry g;
    AlphaBeta ab = alpha_beta(jet);
    const std::size_t n = jet.size();
    g.density.resize(n);
    g.k1.resize(n);
    g.k2.resize(n);
    g.gauss.resize(n);
    g.mean.resize(n);
    g.defined.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.density[i] = area_density(ab.alpha[i], ab.beta[i], w);
        const PointCurvature pc = curvature_at(ab.alpha[i], ab.beta[i], w);
        g.defined[i] = pc.defined;
        g.k1[i] = pc.k1;
        g.k2[i] = pc.k2;
        g.gauss[i] = pc.gauss;
        g.mean[i] = pc.mean;
    }
    g.alpha = std::move(ab.alpha);
    g.beta = std::move(ab.beta);
    return g;
}

/// Full geometry including embedded boundary points.
inline BodyGeometry body_geometry(const SupportJet& jet, double w, const SphereGrid& grid)
{
    BodyGeometry g = curvatures(jet, w);
    g.points = embed(jet, w, grid);
    return g;
}

} // namespace widthforge
