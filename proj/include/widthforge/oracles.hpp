#pragma once

// Reference computations that deliberately avoid the production code paths
// they are used to check: explicit-polynomial harmonics, finite differences
// along geodesics, a finite-difference shape operator, and a bisection
// search for the width floor driven only by the sign of the area element.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "geometry.hpp"
#include "harmonics.hpp"
#include "nelder_mead.hpp"
#include "sphere_grid.hpp"
#include "vec3.hpp"

namespace widthforge::oracle {

inline double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

inline double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

/// Associated Legendre function (no Condon-Shortley phase) from the explicit
/// expansion of P_l and exact polynomial differentiation. `s` is
/// sqrt(1 - x^2), passed separately to keep precision near the poles.
inline double associated_legendre(int l, int m, double x, double s)
{
    // P_l(x) = 2^-l sum_k (-1)^k C(l,k) C(2l-2k, l) x^(l-2k)
    std::vector<double> poly(l + 1, 0.0);
    for (int k = 0; 2 * k <= l; ++k)
        poly[l - 2 * k] = std::pow(-1.0, k) * binomial(l, k) * binomial(2 * l - 2 * k, l) / std::pow(2.0, l);
    for (int d = 0; d < m; ++d) {
        for (std::size_t p = 1; p < poly.size(); ++p) poly[p - 1] = p * poly[p];
        poly.back() = 0.0;
    }
    double v = 0.0;
    for (int p = static_cast<int>(poly.size()) - 1; p >= 0; --p) v = v * x + poly[p];
    return std::pow(s, m) * v;
}

inline double associated_legendre(int l, int m, double x)
{
    return associated_legendre(l, m, x, std::sqrt(std::max(0.0, 1.0 - x * x)));
}

/// Real orthonormal harmonic Y_{l,m} at (theta, phi), same convention as the library.
inline double real_harmonic(int l, int m, double theta, double phi)
{
    const int am = std::abs(m);
    const double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * factorial(l - am) / factorial(l + am));
    const double p = norm * associated_legendre(l, am, std::cos(theta), std::sin(theta));
    if (m == 0) return p;
    if (m > 0) return std::numbers::sqrt2 * p * std::cos(m * phi);
    return std::numbers::sqrt2 * p * std::sin(am * phi);
}

inline double real_harmonic(int l, int m, const Vec3& u)
{
    return real_harmonic(l, m, std::atan2(std::hypot(u[0], u[1]), u[2]), std::atan2(u[1], u[0]));
}

/// h(u) as an explicit sum, independent of the recurrence-based synthesis.
inline double reference_value(const OddHarmonicCoeffs& c, const Vec3& u)
{
    double s = 0.0;
    for (int l = 1; l <= c.lmax(); l += 2)
        for (int m = -l; m <= l; ++m)
            if (c.get(l, m) != 0.0) s += c.get(l, m) * real_harmonic(l, m, u);
    return s;
}

/// Point on the great circle through u with unit tangent x, at arc length t.
inline Vec3 geodesic(const Vec3& u, const Vec3& x, double t) { return std::cos(t) * u + std::sin(t) * x; }

/// Gradient and covariant Hessian in the frame {e_theta, e_phi} by central
/// differences of h along great circles (geodesics have zero acceleration,
/// so second differences along them give Hess(X, X) directly).
template <typename F>
JetSample fd_jet(F&& h, double theta, double phi, double step)
{
    const Vec3 u = unit_vector(theta, phi);
    const Vec3 e1 = frame_theta(theta, phi);
    const Vec3 e2 = frame_phi(phi);
    const Vec3 d = (1.0 / std::numbers::sqrt2) * (e1 + e2);
    const double h0 = h(u);
    auto second = [&](const Vec3& x) {
        return (h(geodesic(u, x, step)) - 2.0 * h0 + h(geodesic(u, x, -step))) / (step * step);
    };
    auto first = [&](const Vec3& x) { return (h(geodesic(u, x, step)) - h(geodesic(u, x, -step))) / (2.0 * step); };
    JetSample j;
    j.h = h0;
    j.g_theta = first(e1);
    j.g_phi = first(e2);
    j.a = second(e1);
    j.c = second(e2);
    j.b = second(d) - 0.5 * (j.a + j.c);
    return j;
}

/// Principal curvatures (larger first) and area density |f_t x f_p| / sin t
/// from central differences of a parametrization f(theta, phi) with outward
/// unit normal u(theta, phi).
struct FdShape
{
    double k1 = 0.0, k2 = 0.0;
    double density = 0.0;
};

template <typename Embed>
FdShape fd_shape_operator(Embed&& f, double theta, double phi, double step)
{
    const Vec3 ft = (1.0 / (2.0 * step)) * (f(theta + step, phi) - f(theta - step, phi));
    const Vec3 fp = (1.0 / (2.0 * step)) * (f(theta, phi + step) - f(theta, phi - step));
    const Vec3 nt = (1.0 / (2.0 * step)) * (unit_vector(theta + step, phi) - unit_vector(theta - step, phi));
    const Vec3 np = (1.0 / (2.0 * step)) * (unit_vector(theta, phi + step) - unit_vector(theta, phi - step));
    const double E = dot(ft, ft), F = dot(ft, fp), G = dot(fp, fp);
    const double L = dot(nt, ft), M = 0.5 * (dot(nt, fp) + dot(np, ft)), N = dot(np, fp);
    const double detI = E * G - F * F;
    const double gauss = (L * N - M * M) / detI;
    const double mean = (L * G + N * E - 2.0 * M * F) / (2.0 * detI);
    const double disc = std::sqrt(std::max(0.0, mean * mean - gauss));
    FdShape out;
    out.k1 = mean + disc;
    out.k2 = mean - disc;
    out.density = norm(cross(ft, fp)) / std::sin(theta);
    return out;
}

/// Area element at an arbitrary direction, from the analytic jet.
inline double density_at(JetEvaluator& eval, const OddHarmonicCoeffs& c, double theta, double phi, double w)
{
    const JetSample j = eval(c, theta, phi);
    const double lap = j.a + j.c;
    return w * w + (2.0 * j.h + lap) * w + (j.h * j.h + j.h * lap + j.a * j.c - j.b * j.b);
}

/// min over the sphere of the area element at width parameter w: the grid
/// minimum, then polished by local minimization from the lowest nodes.
inline double min_density(const OddHarmonicCoeffs& c, const SphereGrid& grid, const SupportJet& jet, double w,
                          std::size_t seeds = 5)
{
    std::vector<double> dens(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double lap = jet.a[i] + jet.c[i];
        dens[i] = w * w + (2.0 * jet.h[i] + lap) * w +
                  (jet.h[i] * jet.h[i] + jet.h[i] * lap + jet.a[i] * jet.c[i] - jet.b[i] * jet.b[i]);
    }
    std::vector<std::size_t> order(grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::partial_sort(order.begin(), order.begin() + std::min(seeds, order.size()), order.end(),
                      [&](std::size_t a, std::size_t b) { return dens[a] < dens[b]; });
    double best = dens[order[0]];
    JetEvaluator eval(c.lmax());
    NelderMeadOptions nm;
    nm.max_evals = 400;
    nm.x_tolerance = 1e-11;
    const double cell = std::numbers::pi / grid.n_theta();
    for (std::size_t s = 0; s < std::min(seeds, order.size()); ++s) {
        const auto& node = grid.node(order[s]);
        auto r = nelder_mead([&](const std::vector<double>& x) { return density_at(eval, c, x[0], x[1], w); },
                             {node.theta, node.phi}, {0.5 * cell, 0.5 * cell / std::max(std::sin(node.theta), 0.2)},
                             nm);
        best = std::min(best, r.f);
    }
    return best;
}

/// Width floor by bisection on the sign of the minimum area element.
inline double bisection_floor(const OddHarmonicCoeffs& c, const SphereGrid& grid, double rel_tol = 1e-12)
{
    const SupportJet jet = synth_jet(c, grid);
    auto g = [&](double w) { return min_density(c, grid, jet, w); };
    // scale of the problem: max |alpha|, sqrt|beta|
    double hi = 0.0;
    for (std::size_t i = 0; i < jet.size(); ++i) {
        const double lap = jet.a[i] + jet.c[i];
        const double alpha = 2.0 * jet.h[i] + lap;
        const double beta = jet.h[i] * jet.h[i] + jet.h[i] * lap + jet.a[i] * jet.c[i] - jet.b[i] * jet.b[i];
        hi = std::max(hi, std::abs(alpha) + std::sqrt(std::abs(beta)));
    }
    if (hi == 0.0 || g(1e-300) >= 0.0) return 0.0;
    hi = 2.0 * hi + 1e-300;
    while (g(hi) < 0.0) hi *= 2.0;
    double lo = 0.0;
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) >= 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// Random rotation from a uniformly random unit quaternion built from three
/// uniforms in [0, 1).
inline Mat3 rotation_from_uniforms(double u1, double u2, double u3)
{
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const double q0 = a * std::sin(2.0 * std::numbers::pi * u2), q1 = a * std::cos(2.0 * std::numbers::pi * u2);
    const double q2 = b * std::sin(2.0 * std::numbers::pi * u3), q3 = b * std::cos(2.0 * std::numbers::pi * u3);
    // q = q3 + q0 i + q1 j + q2 k
    const double w = q3, x = q0, y = q1, z = q2;
    return {Vec3{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
            Vec3{2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
            Vec3{2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}};
}

} // namespace widthforge::oracle
