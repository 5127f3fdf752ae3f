#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"
#include "harmonics.hpp"
#include "sphere_grid.hpp"

namespace widthforge {

// Lengths: h and w share one unit, and the body has constant width 2w.

/// Wirtinger energy: integral of |grad h|^2 / 2 - h^2, in spectral form
/// sum over (l, m) of (l(l+1)/2 - 1) c^2.
inline double energy(const OddHarmonicCoeffs& coeffs)
{
    double s = 0.0;
    for (int l = 1; l <= coeffs.lmax(); l += 2) {
        const double factor = 0.5 * l * (l + 1.0) - 1.0;
        for (int m = -l; m <= l; ++m) s += factor * coeffs.get(l, m) * coeffs.get(l, m);
    }
    return s;
}

/// Same energy by quadrature of the synthesized jet.
inline double energy_quadrature(const SupportJet& jet, const SphereGrid& grid)
{
    std::vector<double> f(jet.size());
    for (std::size_t i = 0; i < jet.size(); ++i)
        f[i] = 0.5 * (jet.g_theta[i] * jet.g_theta[i] + jet.g_phi[i] * jet.g_phi[i]) - jet.h[i] * jet.h[i];
    return grid.integrate(f);
}

inline double volume(const OddHarmonicCoeffs& coeffs, double w)
{
    return 4.0 * std::numbers::pi / 3.0 * w * w * w - w * energy(coeffs);
}

inline double area(const OddHarmonicCoeffs& coeffs, double w) { return 4.0 * std::numbers::pi * w * w - energy(coeffs); }

/// Volume over the volume of the ball of radius w.
inline double ratio_I(const OddHarmonicCoeffs& coeffs, double w)
{
    if (!(w > 0.0)) throw ValidationError("ratio_I: w must be positive");
    return 1.0 - energy(coeffs) / (4.0 * std::numbers::pi * w * w / 3.0);
}

/// (1/3) integral of s dAbar, the divergence-theorem volume.
inline double volume_direct(const SupportJet& jet, double w, const SphereGrid& grid)
{
    const auto density = area_element(jet, w);
    std::vector<double> f(jet.size());
    for (std::size_t i = 0; i < jet.size(); ++i) f[i] = (jet.h[i] + w) * density[i] / 3.0;
    return grid.integrate(f);
}

inline double area_direct(const SupportJet& jet, double w, const SphereGrid& grid)
{
    return grid.integrate(area_element(jet, w));
}

/// |integral det Hess h - (1/2) integral |grad h|^2|.
inline double lemmaH_residual(const SupportJet& jet, const SphereGrid& grid)
{
    std::vector<double> grad2(jet.size());
    for (std::size_t i = 0; i < jet.size(); ++i)
        grad2[i] = jet.g_theta[i] * jet.g_theta[i] + jet.g_phi[i] * jet.g_phi[i];
    return std::abs(grid.integrate(jet.dethess) - 0.5 * grid.integrate(grad2));
}

/// Integral of h^3 + h^2 lap h + h det Hess h, the cubic part of the volume
/// integrand; zero for odd h.
inline double cubic_parity_integral(const SupportJet& jet, const SphereGrid& grid)
{
    std::vector<double> f(jet.size());
    for (std::size_t i = 0; i < jet.size(); ++i)
        f[i] = jet.h[i] * jet.h[i] * jet.h[i] + jet.h[i] * jet.h[i] * jet.lap[i] + jet.h[i] * jet.dethess[i];
    return grid.integrate(f);
}

struct FunctionalReport
{
    double w = 0.0;
    double energy = 0.0;
    double energy_quadrature = 0.0;
    double volume = 0.0;
    double area = 0.0;
    double ratio = 0.0;
    double volume_direct = 0.0;
    double area_direct = 0.0;
    double blaschke_residual = 0.0; // |V - w A + 8 pi w^3 / 3| on the quadrature values
    double lemmaH_residual = 0.0;
    double min_density = 0.0;
};

/// Closed forms and their quadrature counterparts for the body (h, w).
inline FunctionalReport evaluate_functionals(const OddHarmonicCoeffs& coeffs, const SupportJet& jet, double w,
                                             const SphereGrid& grid)
{
    FunctionalReport r;
    r.w = w;
    r.energy = energy(coeffs);
    r.energy_quadrature = energy_quadrature(jet, grid);
    r.volume = volume(coeffs, w);
    r.area = area(coeffs, w);
    r.ratio = ratio_I(coeffs, w);
    r.volume_direct = volume_direct(jet, w, grid);
    r.area_direct = area_direct(jet, w, grid);
    r.blaschke_residual = std::abs(r.volume_direct - w * r.area_direct + 8.0 * std::numbers::pi * w * w * w / 3.0);
    r.lemmaH_residual = lemmaH_residual(jet, grid);
    const auto density = area_element(jet, w);
    r.min_density = density.empty() ? 0.0 : *std::min_element(density.begin(), density.end());
    return r;
}

inline FunctionalReport evaluate_functionals(const OddHarmonicCoeffs& coeffs, double w, const SphereGrid& grid)
{
    return evaluate_functionals(coeffs, synth_jet(coeffs, grid), w, grid);
}

} // namespace widthforge
