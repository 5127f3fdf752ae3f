#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "geometry.hpp"
#include "harmonics.hpp"
#include "nelder_mead.hpp"
#include "sphere_grid.hpp"

namespace widthforge {

/// Which discriminant the root function uses. `Erratum` (alpha^2 - beta) is
/// wrong and exists only so the verification suite can prove it notices.
enum class Discriminant { Quadratic, Erratum };

/// Largest root of w^2 + alpha w + beta, clamped at 0; 0 when there is no
/// real root (the density is then positive for every w).
inline double width_root(double alpha, double beta, Discriminant mode = Discriminant::Quadratic)
{
    const double disc = mode == Discriminant::Quadratic ? alpha * alpha - 4.0 * beta : alpha * alpha - beta;
    if (disc < 0.0) return 0.0;
    const double root = std::sqrt(disc);
    double r;
    if (mode == Discriminant::Quadratic && alpha > 0.0)
        r = -2.0 * beta / (alpha + root); // same root without cancellation
    else
        r = 0.5 * (-alpha + root);
    return std::max(0.0, r);
}

inline double width_root(const JetSample& j, Discriminant mode = Discriminant::Quadratic)
{
    return width_root(alpha_of(j), beta_of(j), mode);
}

inline std::vector<double> w_field(const SupportJet& jet, Discriminant mode = Discriminant::Quadratic)
{
    std::vector<double> out(jet.size());
    for (std::size_t i = 0; i < jet.size(); ++i) out[i] = width_root(jet.at(i), mode);
    return out;
}

struct RefinementStep
{
    int level = 0;
    double w0 = 0.0;
    double theta = 0.0;
    double phi = 0.0;
    std::size_t evals = 0;
};

struct WidthFloorResult
{
    double w0 = 0.0;
    double grid_max = 0.0;                // max of W over grid nodes
    std::vector<std::size_t> argmax_nodes; // nodes whose W is within 1e-6 (relative) of the grid max
    double argmax_theta = 0.0;            // location of the refined maximum
    double argmax_phi = 0.0;
    double argmax_density = 0.0;          // density there at w0
    std::vector<double> W_field;
    std::vector<RefinementStep> refinement_record;
};

struct WidthFloorOptions
{
    int refine_levels = 2;
    std::size_t seeds = 5;          // at least this many seeds (strongest local maxima first)
    double seed_margin = 0.1;       // plus every local maximum within this fraction of the grid max
    std::size_t max_seeds = 64;
    bool margin_all_nodes = true;   // seed every node within the margin, not only the local maxima
    std::size_t evals_per_seed = 300;
    double x_tolerance = 1e-11; // in radians
    Discriminant discriminant = Discriminant::Quadratic;
};

/// W at an arbitrary direction.
inline double width_root_at(JetEvaluator& eval, const OddHarmonicCoeffs& coeffs, double theta, double phi,
                            Discriminant mode = Discriminant::Quadratic)
{
    return width_root(eval(coeffs, unit_vector(theta, phi)), mode);
}

/// Least w keeping w^2 + alpha w + beta >= 0 on the sphere: the max of W over
/// the grid, then refined by local derivative-free maximization of the
/// continuous W around the best nodes.
inline WidthFloorResult w_floor(const OddHarmonicCoeffs& coeffs, const SphereGrid& grid, const SupportJet& jet,
                                const WidthFloorOptions& opt = {})
{
    if (opt.refine_levels < 0) throw ValidationError("w_floor: refine_levels must be >= 0");
    WidthFloorResult res;
    res.W_field = w_field(jet, opt.discriminant);
    const std::size_t n = grid.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return res.W_field[a] > res.W_field[b]; });
    res.grid_max = n ? res.W_field[order[0]] : 0.0;
    res.w0 = res.grid_max;
    if (!(res.grid_max > 0.0)) {
        res.w0 = 0.0;
        return res;
    }
    for (std::size_t i : order) {
        if (res.W_field[i] < res.grid_max * (1.0 - 1e-6)) break;
        res.argmax_nodes.push_back(i);
    }
    res.argmax_theta = grid.node(order[0]).theta;
    res.argmax_phi = grid.node(order[0]).phi;
    res.refinement_record.push_back({0, res.w0, res.argmax_theta, res.argmax_phi, 0});

    if (opt.refine_levels > 0) {
        const double cell_theta = std::numbers::pi / grid.n_theta();
        const double cell_phi = 2.0 * std::numbers::pi / grid.n_phi();
        JetEvaluator eval(coeffs.lmax());
        auto neg_w = [&](const std::vector<double>& x) {
            return -width_root_at(eval, coeffs, x[0], x[1], opt.discriminant);
        };
        NelderMeadOptions nm;
        nm.max_evals = opt.evals_per_seed;
        nm.x_tolerance = opt.x_tolerance;

        // level 1: one search per seed node; later levels restart from the best point with smaller steps
        double step_scale = 0.5;
        std::vector<double> best_x{res.argmax_theta, res.argmax_phi};
        double best = res.w0;
        std::size_t evals = 0;
        // seeds: local maxima of W over the ring neighbourhood, strongest first,
        // so that nearby nodes on one peak do not crowd out a second peak
        const int nt = grid.n_theta(), np = grid.n_phi();
        auto is_local_max = [&](std::size_t i) {
            const int t = static_cast<int>(i) / np, p = static_cast<int>(i) % np;
            for (int dt = -1; dt <= 1; ++dt)
                for (int dp = -1; dp <= 1; ++dp) {
                    const int tt = t + dt;
                    if ((dt == 0 && dp == 0) || tt < 0 || tt >= nt) continue;
                    const std::size_t j = static_cast<std::size_t>(tt * np + (p + dp + np) % np);
                    if (res.W_field[j] > res.W_field[i] || (res.W_field[j] == res.W_field[i] && j < i)) return false;
                }
            return true;
        };
        std::vector<std::size_t> seed_nodes;
        for (std::size_t i : order) {
            if (seed_nodes.size() >= opt.max_seeds || !(res.W_field[i] > 0.0)) break;
            if (seed_nodes.size() >= opt.seeds && res.W_field[i] < res.grid_max * (1.0 - opt.seed_margin)) break;
            if (is_local_max(i)) seed_nodes.push_back(i);
        }
        // a peak narrower than the node spacing can leave no local maximum of
        // its own; the remaining nodes within the margin catch it
        for (std::size_t i : order) {
            const bool in_margin = res.W_field[i] >= res.grid_max * (1.0 - opt.seed_margin) && res.W_field[i] > 0.0;
            const bool wanted = seed_nodes.size() < std::min(opt.seeds, n) || (opt.margin_all_nodes && in_margin);
            if (!wanted || seed_nodes.size() >= opt.max_seeds) break;
            if (std::find(seed_nodes.begin(), seed_nodes.end(), i) == seed_nodes.end()) seed_nodes.push_back(i);
        }
        for (std::size_t s : seed_nodes) {
            const auto& node = grid.node(s);
            // rotated grids can place seeds near a pole; the phi step is in longitude
            const double sin_t = std::max(std::sin(node.theta), 1e-3);
            auto r = nelder_mead(neg_w, {node.theta, node.phi},
                                 {step_scale * cell_theta, step_scale * std::min(cell_phi, cell_theta / sin_t)}, nm);
            evals += r.evals;
            if (-r.f > best) {
                best = -r.f;
                best_x = r.x;
            }
        }
        res.refinement_record.push_back({1, best, best_x[0], best_x[1], evals});
        for (int level = 2; level <= opt.refine_levels; ++level) {
            step_scale *= 0.1;
            const double sin_t = std::max(std::abs(std::sin(best_x[0])), 1e-3);
            auto r = nelder_mead(neg_w, best_x,
                                 {step_scale * cell_theta, step_scale * std::min(cell_phi, cell_theta / sin_t)}, nm);
            if (-r.f > best) {
                best = -r.f;
                best_x = r.x;
            }
            res.refinement_record.push_back({level, best, best_x[0], best_x[1], r.evals});
        }
        res.w0 = best;
        res.argmax_theta = best_x[0];
        res.argmax_phi = best_x[1];
    }
    const JetSample j = evaluate_jet(coeffs, res.argmax_theta, res.argmax_phi);
    res.argmax_density = area_density(alpha_of(j), beta_of(j), res.w0);
    return res;
}

inline WidthFloorResult w_floor(const OddHarmonicCoeffs& coeffs, const SphereGrid& grid, int refine_levels = 2)
{
    WidthFloorOptions opt;
    opt.refine_levels = refine_levels;
    return w_floor(coeffs, grid, synth_jet(coeffs, grid), opt);
}

/// Nodes where the area element is at most tol * w^2.
inline std::vector<std::size_t> singular_set(const SupportJet& jet, double w, double tol)
{
    const auto density = area_element(jet, w);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < density.size(); ++i)
        if (density[i] <= tol * w * w) out.push_back(i);
    return out;
}

inline std::vector<std::size_t> singular_set(const OddHarmonicCoeffs& coeffs, const SphereGrid& grid, double w,
                                             double tol)
{
    return singular_set(synth_jet(coeffs, grid), w, tol);
}

} // namespace widthforge
