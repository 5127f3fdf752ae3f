#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "vec3.hpp"

namespace widthforge {

namespace detail {

/// (P_n(z), P_n'(z)) by the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double z)
{
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
    }
    return {p1, n * (z * p1 - p0) / (z * z - 1.0)};
}

} // namespace detail

/// Gauss-Legendre nodes and weights on [-1, 1], ascending, exactly
/// mirror-symmetric (x[n-1-i] == -x[i] bit for bit).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n)
{
    if (n < 1) throw ValidationError("gauss_legendre: n must be >= 1");
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const auto [p, dp] = detail::legendre_with_derivative(n, z);
            const double dz = p / dp;
            z -= dz;
            if (std::abs(dz) <= 1e-16 * std::abs(z)) break;
        }
        const double dp = detail::legendre_with_derivative(n, z).second;
        const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[n - 1 - i] = z;
        x[i] = -z;
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    if (n % 2 == 1) {
        const double dp = detail::legendre_with_derivative(n, 0.0).second;
        x[n / 2] = 0.0;
        w[n / 2] = 2.0 / (dp * dp);
    }
    return {x, w};
}

struct SphereNode
{
    double theta = 0.0; // colatitude
    double phi = 0.0;   // longitude
    Vec3 u{};
};

/// Product quadrature grid on the unit sphere with an exact antipodal pairing.
///
/// Nodes are Gauss-Legendre in cos(theta) times uniform in phi, stored
/// ring-major (index = ring * n_phi + column). No node sits on a pole.
class SphereGrid
{
public:
    SphereGrid() = default;

    SphereGrid(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi)
    {
        if (n_theta < 1) throw ValidationError("build_grid: n_theta must be >= 1");
        if (n_phi < 2 || n_phi % 2 != 0) throw ValidationError("build_grid: n_phi must be even and >= 2");

        auto [x, wx] = gauss_legendre(n_theta);
        const int half_phi = n_phi / 2;
        std::vector<double> cphi(n_phi), sphi(n_phi);
        for (int p = 0; p < half_phi; ++p) {
            const double phi = 2.0 * std::numbers::pi * p / n_phi;
            cphi[p] = std::cos(phi);
            sphi[p] = std::sin(phi);
            cphi[p + half_phi] = -cphi[p];
            sphi[p + half_phi] = -sphi[p];
        }
        const double dphi = 2.0 * std::numbers::pi / n_phi;

        nodes_.reserve(static_cast<std::size_t>(n_theta) * n_phi);
        weights_.reserve(nodes_.capacity());
        antipode_.reserve(nodes_.capacity());
        for (int t = 0; t < n_theta; ++t) {
            // ascending cos(theta) would put the south pole first; flip so ring 0 is northmost
            const double z = x[n_theta - 1 - t];
            const double st = std::sqrt((1.0 - z) * (1.0 + z));
            const double theta = std::acos(z);
            for (int p = 0; p < n_phi; ++p) {
                SphereNode node;
                node.theta = theta;
                node.phi = 2.0 * std::numbers::pi * p / n_phi;
                node.u = {st * cphi[p], st * sphi[p], z};
                nodes_.push_back(node);
                weights_.push_back(wx[n_theta - 1 - t] * dphi);
                const int ta = n_theta - 1 - t;
                const int pa = (p + half_phi) % n_phi;
                antipode_.push_back(static_cast<std::size_t>(ta) * n_phi + pa);
            }
        }
    }

    std::size_t size() const { return nodes_.size(); }
    int n_theta() const { return n_theta_; }
    int n_phi() const { return n_phi_; }

    /// Largest polynomial degree integrated exactly.
    int band_limit() const { return std::min(2 * n_theta_ - 1, n_phi_ - 1); }

    const std::vector<SphereNode>& nodes() const { return nodes_; }
    const SphereNode& node(std::size_t i) const { return nodes_.at(i); }
    std::span<const double> weights() const { return weights_; }

    std::size_t antipode(std::size_t i) const
    {
        if (i >= antipode_.size()) throw ValidationError("antipode: node index out of range");
        return antipode_[i];
    }
    std::span<const std::size_t> antipode_index() const { return antipode_; }

    /// Sum of weights[i] * field[i]. Antipodal pairs are summed first, so an
    /// exactly odd field integrates to exactly zero.
    double integrate(std::span<const double> field) const
    {
        if (field.size() != nodes_.size())
            throw ValidationError("integrate: field length " + std::to_string(field.size()) +
                                  " does not match node count " + std::to_string(nodes_.size()));
        double sum = 0.0, comp = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const std::size_t j = antipode_[i];
            if (j < i) continue;
            const double term = weights_[i] * (field[i] + field[j]);
            const double t = sum + term;
            if (std::abs(sum) >= std::abs(term))
                comp += (sum - t) + term;
            else
                comp += (term - t) + sum;
            sum = t;
        }
        return sum + comp;
    }

    /// The same quadrature with every node rotated by `rotation`. Quadrature
    /// exactness and the antipodal pairing are preserved; nodes may come
    /// arbitrarily close to (but generically not onto) the poles.
    SphereGrid rotated(const Mat3& rotation) const
    {
        SphereGrid out = *this;
        for (auto& node : out.nodes_) {
            node.u = rotation * node.u;
            const double z = std::clamp(node.u[2], -1.0, 1.0);
            node.theta = std::acos(z);
            node.phi = std::atan2(node.u[1], node.u[0]);
        }
        return out;
    }

private:
    int n_theta_ = 0;
    int n_phi_ = 0;
    std::vector<SphereNode> nodes_;
    std::vector<double> weights_;
    std::vector<std::size_t> antipode_;
};

inline SphereGrid build_grid(int n_theta, int n_phi) { return SphereGrid(n_theta, n_phi); }

/// Grid sized for coefficients up to degree `lmax`: exact for integrands of
/// harmonic degree up to 4*lmax + 3.
inline SphereGrid default_grid(int lmax) { return SphereGrid(2 * lmax + 2, 4 * lmax + 4); }

} // namespace widthforge
