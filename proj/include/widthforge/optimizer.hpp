#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "functionals.hpp"
#include "geometry.hpp"
#include "harmonics.hpp"
#include "nelder_mead.hpp"
#include "parallel.hpp"
#include "sphere_grid.hpp"
#include "width_floor.hpp"

namespace widthforge {

struct OptimizerConfig
{
    int lmax = 7;
    int n_theta = 0; // 0: optimizer_grid(lmax)
    int n_phi = 0;
    std::uint64_t seed = 1;
    int restarts = 4;
    std::size_t max_iters = 20000;    // objective evaluations per restart and degree stage
    double objective_tolerance = 1e-9; // relative improvement that counts as progress
    double initial_step = 0.25;        // simplex edge, in coefficient units on the unit sphere
    double x_tolerance = 1e-7;
    double soft_max_temperature = 0.0; // > 0: log-sum-exp of node W (relative temperature) instead of the refined max
    double normalization = 1.0;
    bool axisymmetric = false;          // restrict to m = 0 coefficients
    bool continuation = true;           // climb the degrees 3, 5, ..., lmax within each restart
    double continuation_noise = 0.05;   // size of the seeded terms added with each new degree (restarts > 0)
    int refine_levels = 1;              // width-floor refinement inside the objective
    double delta_smooth = 1e-3;         // smooth-set threshold, relative to w0^2
    double verify_tolerance = 5e-2;
    std::optional<OddHarmonicCoeffs> initial; // start of restart 0, if given

    void validate() const
    {
        if (lmax < 3 || lmax % 2 == 0) throw ValidationError("optimizer: lmax must be odd and >= 3");
        if (restarts < 1) throw ValidationError("optimizer: restarts must be >= 1");
        if (max_iters < 1) throw ValidationError("optimizer: max_iters must be >= 1");
        if (!(normalization > 0.0)) throw ValidationError("optimizer: normalization must be positive");
        if (!(initial_step > 0.0)) throw ValidationError("optimizer: initial_step must be positive");
        if (continuation_noise < 0.0) throw ValidationError("optimizer: continuation_noise must be >= 0");
        if (soft_max_temperature < 0.0) throw ValidationError("optimizer: soft_max_temperature must be >= 0");
        if ((n_theta != 0 || n_phi != 0) && (n_theta < 1 || n_phi < 2 || n_phi % 2 != 0))
            throw ValidationError("optimizer: invalid grid size");
        if (initial && initial->lmax() > lmax) throw ValidationError("optimizer: initial coefficients exceed lmax");
    }

    SphereGrid grid() const;
};

/// Twice as fine as the default grid in each direction: W has ridges narrower
/// than the default node spacing, and a coarse floor lets the search exploit them.
inline SphereGrid optimizer_grid(int lmax) { return SphereGrid(4 * lmax + 4, 8 * lmax + 8); }

inline SphereGrid OptimizerConfig::grid() const { return n_theta > 0 ? SphereGrid(n_theta, n_phi) : optimizer_grid(lmax); }

struct VerificationReport
{
    double antipodal_vanishing_score = 0.0; // max over smooth u of min(density(u), density(-u)) / w^2
    double k2_deviation = 0.0;              // max over smooth u of |2 w k2 - 1|
    double k2_is_smaller = 1.0;             // fraction of smooth nodes with k2 <= k1
    double smooth_fraction = 0.0;
    double delta_smooth = 0.0; // absolute threshold used
    double tolerance = 0.0;
    double w = 0.0;
    bool pass = false;
};

/// Checks the two necessary conditions for a minimizer at width parameter w:
/// on the smooth set (density >= delta_smooth_rel * w^2) the area element
/// vanishes at the antipode, and the smaller principal curvature is 1/(2w).
inline VerificationReport verify_necessary_conditions(const SupportJet& jet, double w, const SphereGrid& grid,
                                                      double delta_smooth_rel = 1e-3, double tol = 5e-2)
{
    VerificationReport rep;
    rep.w = w;
    rep.tolerance = tol;
    rep.delta_smooth = delta_smooth_rel * w * w;
    const BodyGeometry geo = curvatures(jet, w);
    const double w2 = w * w;
    std::size_t smooth = 0, defined = 0, ordered = 0;
    for (std::size_t i = 0; i < geo.size(); ++i) {
        if (geo.density[i] < rep.delta_smooth) continue;
        ++smooth;
        const double other = geo.density[grid.antipode(i)];
        if (w2 > 0.0) rep.antipodal_vanishing_score = std::max(rep.antipodal_vanishing_score, std::min(geo.density[i], other) / w2);
        if (geo.defined[i]) {
            ++defined;
            if (geo.k2[i] <= geo.k1[i]) ++ordered;
            rep.k2_deviation = std::max(rep.k2_deviation, std::abs(2.0 * w * geo.k2[i] - 1.0));
        }
    }
    rep.smooth_fraction = geo.size() ? static_cast<double>(smooth) / static_cast<double>(geo.size()) : 0.0;
    rep.k2_is_smaller = defined ? static_cast<double>(ordered) / static_cast<double>(defined) : 1.0;
    rep.pass = smooth > 0 && rep.antipodal_vanishing_score <= tol && rep.k2_deviation <= tol;
    return rep;
}

inline VerificationReport verify_necessary_conditions(const OddHarmonicCoeffs& coeffs, double w, const SphereGrid& grid,
                                                      double delta_smooth_rel = 1e-3, double tol = 5e-2)
{
    return verify_necessary_conditions(synth_jet(coeffs, grid), w, grid, delta_smooth_rel, tol);
}

inline constexpr double kGaugeFloor = 1e-6; // relative to the coefficient norm

struct ObjectiveValue
{
    double value = 0.0; // E(h) / w0(h)^2
    double w0 = 0.0;
    double energy = 0.0;
    bool gauge = false; // w0 == 0: h is zero or lies in the degree-1 span
};

/// E(h) / w0(h)^2 on a fixed grid. Maximizing it minimizes the volume ratio
/// at the width floor, since I = 1 - (3 / 4 pi) * objective.
class Objective
{
public:
    Objective(const SphereGrid& grid, int lmax, int refine_levels = 1, double soft_max_temperature = 0.0)
        : grid_(grid), basis_(grid_, lmax), temperature_(soft_max_temperature)
    {
        floor_.refine_levels = refine_levels;
        floor_.seeds = 5;
        floor_.evals_per_seed = 200;
        floor_.x_tolerance = 1e-9;
        floor_.margin_all_nodes = false; // hot path; candidates are rescored with full seeding
    }

    Objective(const Objective&) = delete;
    Objective& operator=(const Objective&) = delete;

    const SphereGrid& grid() const { return grid_; }
    const HarmonicBasis& basis() const { return basis_; }

    ObjectiveValue operator()(const OddHarmonicCoeffs& coeffs) const
    {
        if (coeffs.is_zero()) throw ValidationError("objective: coefficients are zero");
        ObjectiveValue out;
        out.energy = energy(coeffs);
        const SupportJet jet = basis_.synth(coeffs);
        if (temperature_ > 0.0) {
            const auto wf = w_field(jet);
            const double top = *std::max_element(wf.begin(), wf.end());
            if (top > 0.0) {
                const double t = temperature_ * top;
                double s = 0.0;
                for (double v : wf) s += std::exp((v - top) / t);
                out.w0 = top + t * std::log(s);
            }
        } else {
            out.w0 = w_floor(coeffs, grid_, jet, floor_).w0;
        }
        // degree-1 fields give W = 0 up to rounding, which the root amplifies to sqrt(eps)
        if (!(out.w0 > kGaugeFloor * coeffs.norm())) {
            out.w0 = 0.0;
            out.gauge = true;
            return out;
        }
        out.value = out.energy / (out.w0 * out.w0);
        return out;
    }

private:
    SphereGrid grid_;
    HarmonicBasis basis_;
    WidthFloorOptions floor_;
    double temperature_;
};

/// Convenience one-shot evaluation on the default grid.
inline ObjectiveValue objective(const OddHarmonicCoeffs& coeffs, int refine_levels = 2)
{
    const SphereGrid grid = default_grid(coeffs.lmax());
    return Objective(grid, coeffs.lmax(), refine_levels)(coeffs);
}

struct CandidateBody
{
    OddHarmonicCoeffs coeffs;
    double w0 = 0.0;
    double ratio = 1.0;
    double objective = 0.0;
    VerificationReport verification;
    int restart = 0;
    std::size_t evaluations = 0;
};

struct RestartRecord
{
    int restart = 0;
    double start_objective = 0.0;
    double best_objective = 0.0;
    std::size_t evaluations = 0;
    std::size_t rounds = 0;
    OddHarmonicCoeffs coeffs; // best point of this restart
    std::vector<double> trace; // best objective after each simplex iteration, all rounds concatenated
};

struct OptimizeResult
{
    CandidateBody best;
    std::vector<RestartRecord> restarts;
    double baseline_objective = 0.0; // axially symmetric unit degree-3 start
    double baseline_ratio = 1.0;
};

/// Free coefficient slots searched by the optimizer.
inline std::vector<std::size_t> search_slots(int lmax, bool axisymmetric)
{
    std::vector<std::size_t> out;
    for (int l = 3; l <= lmax; l += 2)
        for (int m = -l; m <= l; ++m)
            if (!axisymmetric || m == 0) out.push_back(OddHarmonicCoeffs::degree_offset(l) + static_cast<std::size_t>(m + l));
    return out;
}

/// Final evaluation of a coefficient set at its (tightly refined) floor.
inline CandidateBody evaluate_candidate(const OddHarmonicCoeffs& coeffs, const SphereGrid& grid,
                                        double delta_smooth_rel = 1e-3, double tol = 5e-2)
{
    CandidateBody c;
    c.coeffs = coeffs;
    const SupportJet jet = synth_jet(coeffs, grid);
    WidthFloorOptions opt;
    opt.refine_levels = 3;
    c.w0 = w_floor(coeffs, grid, jet, opt).w0;
    c.objective = c.w0 > 0.0 ? energy(coeffs) / (c.w0 * c.w0) : 0.0;
    c.ratio = c.w0 > 0.0 ? ratio_I(coeffs, c.w0) : 1.0;
    c.verification = verify_necessary_conditions(jet, c.w0, grid, delta_smooth_rel, tol);
    return c;
}

namespace detail {

inline void project_to_sphere(std::vector<double>& x, double radius)
{
    double n = 0.0;
    for (double v : x) n += v * v;
    n = std::sqrt(n);
    if (n == 0.0) {
        x[0] = radius;
        return;
    }
    for (double& v : x) v *= radius / n;
}

} // namespace detail

/// Seeded Nelder-Mead search for maximizers of E / w0^2 on the coefficient
/// sphere, with independent restarts. Each search stage reruns the simplex
/// from its best point until a round no longer improves the objective. With
/// continuation on, a restart climbs the odd degrees 3, 5, ..., lmax, padding
/// the previous optimum with small seeded terms in the new degree.
inline OptimizeResult optimize(const OptimizerConfig& cfg)
{
    cfg.validate();
    const SphereGrid grid = cfg.grid();

    OptimizeResult result;
    {
        OddHarmonicCoeffs base(cfg.lmax);
        base.set(3, 0, cfg.normalization);
        const CandidateBody b = evaluate_candidate(base, grid, cfg.delta_smooth, cfg.verify_tolerance);
        result.baseline_objective = b.objective;
        result.baseline_ratio = b.ratio;
    }

    std::vector<RestartRecord> records(static_cast<std::size_t>(cfg.restarts));

    parallel_for(records.size(), 0, [&](std::size_t r) {
        RestartRecord& rec = records[r];
        rec.restart = static_cast<int>(r);
        std::mt19937_64 rng(cfg.seed * 1000003ULL + r);
        std::normal_distribution<double> gauss(0.0, 1.0);

        int first = cfg.continuation ? 3 : cfg.lmax;
        OddHarmonicCoeffs current(first);
        if (r == 0 && cfg.initial) {
            first = std::max(first, cfg.initial->lmax());
            current = cfg.initial->padded(first);
        } else {
            for (std::size_t k : search_slots(first, cfg.axisymmetric)) current.slot(k) = gauss(rng);
        }

        bool started = false;
        for (int stage = first; stage <= cfg.lmax; stage += 2) {
            const std::vector<std::size_t> slots = search_slots(stage, cfg.axisymmetric);
            const std::size_t dim = slots.size();
            std::vector<double> x(dim, 0.0);
            const OddHarmonicCoeffs padded = current.padded(stage);
            for (std::size_t k = 0; k < dim; ++k) {
                x[k] = padded.slot(slots[k]);
                // restart 0 pads with zeros, so its value cannot drop when the degree grows
                if (r > 0 && stage > first && OddHarmonicCoeffs::degree_of_slot(slots[k]) == stage)
                    x[k] = cfg.continuation_noise * cfg.normalization * gauss(rng);
            }
            detail::project_to_sphere(x, cfg.normalization);

            const SphereGrid stage_grid = stage == cfg.lmax ? grid : optimizer_grid(stage);
            const Objective objective_fn(stage_grid, stage, cfg.refine_levels, cfg.soft_max_temperature);
            auto to_coeffs = [&](const std::vector<double>& v) {
                OddHarmonicCoeffs c(stage);
                for (std::size_t k = 0; k < dim; ++k) c.slot(slots[k]) = v[k];
                return c;
            };
            auto f = [&](const std::vector<double>& v) { return -objective_fn(to_coeffs(v)).value; };
            auto project = [&](std::vector<double>& v) { detail::project_to_sphere(v, cfg.normalization); };

            double best = f(x);
            if (!started) rec.start_objective = -best;
            started = true;
            std::size_t evals = 1;
            double step = cfg.initial_step * cfg.normalization;
            while (evals < cfg.max_iters) {
                NelderMeadOptions nm;
                nm.max_evals = cfg.max_iters - evals;
                nm.x_tolerance = cfg.x_tolerance * cfg.normalization;
                nm.record_trace = true;
                NelderMeadResult res = nelder_mead(f, x, std::vector<double>(dim, step), nm, project);
                evals += res.evals;
                ++rec.rounds;
                for (double t : res.best_trace) rec.trace.push_back(std::max(-t, -best));
                const bool improved = res.f < best - cfg.objective_tolerance * std::abs(best);
                if (res.f < best) {
                    best = res.f;
                    x = res.x;
                }
                if (!improved) break;
                step = std::max(0.5 * step, 1e-3 * cfg.normalization);
            }
            rec.evaluations += evals;
            rec.best_objective = -best;
            current = to_coeffs(x);
        }
        rec.coeffs = current.padded(cfg.lmax);
    });

    // deterministic merge: highest objective, ties to the lowest restart index
    std::size_t winner = 0;
    for (std::size_t r = 1; r < records.size(); ++r)
        if (records[r].best_objective > records[winner].best_objective) winner = r;

    result.restarts = records;
    result.best = evaluate_candidate(records[winner].coeffs, grid, cfg.delta_smooth, cfg.verify_tolerance);
    result.best.restart = static_cast<int>(winner);
    for (const auto& rec : records) result.best.evaluations += rec.evaluations;
    return result;
}

/// |E(h + eps v) - 2 E(h) + E(h - eps v) - 2 eps^2 E(v)|; zero because E is quadratic.
inline double second_variation_check(const OddHarmonicCoeffs& h, const OddHarmonicCoeffs& v, double eps)
{
    if (v.include_degree_one())
        for (int m = -1; m <= 1; ++m)
            if (v.get(1, m) != 0.0) throw ValidationError("second_variation_check: v has degree-1 terms");
    const double plus = energy(OddHarmonicCoeffs::combine(1.0, h, eps, v));
    const double minus = energy(OddHarmonicCoeffs::combine(1.0, h, -eps, v));
    return std::abs(plus - 2.0 * energy(h) + minus - 2.0 * eps * eps * energy(v));
}

/// The parallel bodies of h for w from w_start down to w_end (inclusive,
/// `steps` equally spaced values). h is fixed along the flow.
inline std::vector<FunctionalReport> normal_flow(const OddHarmonicCoeffs& coeffs, double w_start, double w_end,
                                                 int steps, const SphereGrid& grid)
{
    if (steps < 2) throw ValidationError("normal_flow: steps must be >= 2");
    if (w_start < w_end) throw ValidationError("normal_flow: w_start must be >= w_end");
    const SupportJet jet = synth_jet(coeffs, grid);
    WidthFloorOptions opt;
    opt.refine_levels = 3;
    const double w0 = w_floor(coeffs, grid, jet, opt).w0;
    if (w_end < w0 * (1.0 - 1e-9)) throw ValidationError("normal_flow: w_end is below the width floor");
    if (!(w_end > 0.0)) throw ValidationError("normal_flow: w_end must be positive");
    std::vector<FunctionalReport> out;
    for (int k = 0; k < steps; ++k) {
        const double w = w_start + (w_end - w_start) * k / (steps - 1.0);
        out.push_back(evaluate_functionals(coeffs, jet, w, grid));
    }
    return out;
}

/// Rotation taking unit vector n to +z.
inline Mat3 rotation_to_z(const Vec3& n)
{
    const Vec3 z{0, 0, 1};
    const Vec3 axis = cross(n, z);
    const double s = norm(axis), cth = dot(n, z);
    if (s < 1e-15) return cth > 0 ? identity3() : Mat3{Vec3{1, 0, 0}, Vec3{0, -1, 0}, Vec3{0, 0, -1}};
    const Vec3 k = (1.0 / s) * axis;
    const double v = 1.0 - cth;
    return {Vec3{cth + k[0] * k[0] * v, k[0] * k[1] * v - k[2] * s, k[0] * k[2] * v + k[1] * s},
            Vec3{k[1] * k[0] * v + k[2] * s, cth + k[1] * k[1] * v, k[1] * k[2] * v - k[0] * s},
            Vec3{k[2] * k[0] * v - k[1] * s, k[2] * k[1] * v + k[0] * s, cth + k[2] * k[2] * v}};
}

/// Rotation that puts the direction maximizing the degree-3 part of h on
/// the +z axis. Azimuth is left as is; this is for human comparison only.
inline OddHarmonicCoeffs canonicalize(const OddHarmonicCoeffs& c)
{
    if (c.lmax() < 3) return c;
    OddHarmonicCoeffs deg3(3);
    for (int m = -3; m <= 3; ++m) deg3.set(3, m, c.get(3, m));
    if (deg3.is_zero()) return c;
    const SphereGrid grid = default_grid(3);
    const SupportJet jet = synth_jet(deg3, grid);
    const auto top = static_cast<std::size_t>(std::max_element(jet.h.begin(), jet.h.end()) - jet.h.begin());
    JetEvaluator eval(3);
    auto r = nelder_mead([&](const std::vector<double>& x) { return -eval(deg3, x[0], x[1]).h; },
                         {grid.node(top).theta, grid.node(top).phi}, {0.1, 0.1}, NelderMeadOptions{500, 1e-12, 0.0, false});
    return rotate_coeffs(c, rotation_to_z(unit_vector(r.x[0], r.x[1])));
}

/// Odd bump concentrated around +-center, band-limited by projection, and
/// the effect of perturbing h along it.
struct BumpDiagnostic
{
    std::size_t center = 0;
    double leakage = 0.0;       // ||v - P_L v|| / ||v|| on the grid
    double objective = 0.0;     // at h
    double objective_plus = 0.0; // at h + eps v
    double objective_minus = 0.0;
    double eps = 0.0;
};

/// Probes the second-variation argument at a candidate: a perturbation
/// supported where both u and -u are smooth should not raise the objective.
/// The node with the largest min(density(u), density(-u)) is the center.
inline BumpDiagnostic bump_diagnostic(const OddHarmonicCoeffs& h, const SphereGrid& grid, double radius = 0.5,
                                      double eps = 1e-2)
{
    BumpDiagnostic d;
    d.eps = eps;
    const SupportJet jet = synth_jet(h, grid);
    WidthFloorOptions opt;
    opt.refine_levels = 3;
    const double w0 = w_floor(h, grid, jet, opt).w0;
    const auto dens = area_element(jet, w0);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double m = std::min(dens[i], dens[grid.antipode(i)]);
        if (m > best) {
            best = m;
            d.center = i;
        }
    }
    const Vec3 c = grid.node(d.center).u;
    auto bump = [&](const Vec3& u) {
        const double ang = std::acos(std::clamp(dot(u, c), -1.0, 1.0));
        if (ang >= radius) return 0.0;
        const double t = ang / radius;
        return std::exp(1.0 - 1.0 / (1.0 - t * t));
    };
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = bump(grid.node(i).u) - bump(-grid.node(i).u);
    const OddHarmonicCoeffs vl = project(v, grid, h.lmax());
    const SupportJet vj = synth_jet(vl, grid);
    std::vector<double> diff2(grid.size()), v2(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        diff2[i] = (v[i] - vj.h[i]) * (v[i] - vj.h[i]);
        v2[i] = v[i] * v[i];
    }
    const double vn = std::sqrt(grid.integrate(v2));
    d.leakage = vn > 0.0 ? std::sqrt(grid.integrate(diff2)) / vn : 0.0;
    const Objective obj(grid, h.lmax(), 3);
    const double scale = h.norm() / std::max(vl.norm(), 1e-300);
    d.objective = obj(h).value;
    d.objective_plus = obj(OddHarmonicCoeffs::combine(1.0, h, eps * scale, vl)).value;
    d.objective_minus = obj(OddHarmonicCoeffs::combine(1.0, h, -eps * scale, vl)).value;
    return d;
}

} // namespace widthforge
