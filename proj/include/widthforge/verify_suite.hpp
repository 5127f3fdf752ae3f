#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bodies.hpp"
#include "functionals.hpp"
#include "io.hpp"
#include "optimizer.hpp"
#include "oracles.hpp"
#include "width_floor.hpp"

namespace widthforge {

/// Deliberate bugs the suite must catch.
enum class Corruption { None, ErratumDiscriminant };

struct VerifySuiteOptions
{
    std::uint64_t seed = 1;
    int samples = 20; // random bodies per identity
    Corruption corruption = Corruption::None;
};

struct IdentityCheck
{
    std::string name;
    double worst = 0.0;     // largest observed residual (or score)
    double threshold = 0.0; // pass iff worst <= threshold
    int cases = 0;
    bool pass = false;
};

struct VerifySuiteReport
{
    std::vector<IdentityCheck> checks;
    bool all_pass() const
    {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Runs the library's identities on seeded random odd bodies.
inline VerifySuiteReport run_verify_suite(const VerifySuiteOptions& opt)
{
    VerifySuiteReport rep;
    auto add = [&](std::string name, double worst, double threshold, int cases) {
        rep.checks.push_back({std::move(name), worst, threshold, cases, worst <= threshold});
    };
    const int n = std::max(opt.samples, 1);
    auto body = [&](int k, int lmax, double scale) {
        return random_odd(lmax, opt.seed * 7919ULL + static_cast<std::uint64_t>(k), scale);
    };
    WidthFloorOptions floor_opt;
    floor_opt.refine_levels = 3;
    if (opt.corruption == Corruption::ErratumDiscriminant) floor_opt.discriminant = Discriminant::Erratum;
    auto floor_of = [&](const OddHarmonicCoeffs& c, const SphereGrid& g, const SupportJet& jet) {
        return w_floor(c, g, jet, floor_opt).w0;
    };

    {
        const double pi = std::numbers::pi;
        const double e = std::max({std::abs(volume(ball(), 1.0) / (4.0 * pi / 3.0) - 1.0),
                                   std::abs(area(ball(), 1.0) / (4.0 * pi) - 1.0), std::abs(ratio_I(ball(), 1.0) - 1.0)});
        add("ball_exactness", e, 1e-12, 1);
    }
    {
        double neg = 0.0, deg1 = 0.0, paths = 0.0;
        for (int k = 0; k < n; ++k) {
            const int lmax = 3 + 2 * (k % 4);
            const OddHarmonicCoeffs c = body(k, lmax, 1.0);
            const SphereGrid g = default_grid(lmax);
            neg = std::max(neg, -energy(c));
            paths = std::max(paths, std::abs(energy_quadrature(synth_jet(c, g), g) - energy(c)));
            OddHarmonicCoeffs d(3, true);
            for (int m = -1; m <= 1; ++m) d.set(1, m, c.get(3, m));
            deg1 = std::max(deg1, std::abs(energy(d)));
        }
        add("wirtinger_nonnegative", neg, 0.0, n);
        add("wirtinger_degree_one_zero", deg1, 0.0, n);
        add("energy_spectral_vs_quadrature", paths, 1e-10, n);
    }
    {
        double worst = 0.0, parity = 0.0;
        for (int k = 0; k < n; ++k) {
            const int lmax = 3 + 2 * (k % 3);
            const OddHarmonicCoeffs c = body(k, lmax, 1.0);
            const SphereGrid g = default_grid(lmax);
            const SupportJet jet = synth_jet(c, g);
            worst = std::max(worst, lemmaH_residual(jet, g));
            parity = std::max(parity, std::abs(cubic_parity_integral(jet, g)));
        }
        add("lemma_h", worst, 1e-9, n);
        add("cubic_parity", parity, 1e-10, n);
    }
    {
        double blaschke = 0.0, dual = 0.0, floor_err = 0.0, floor_density = 0.0, homog = 0.0;
        for (int k = 0; k < n; ++k) {
            const int lmax = 3 + 2 * (k % 3);
            const OddHarmonicCoeffs c = body(k, lmax, 0.5);
            const SphereGrid g = default_grid(lmax);
            const SupportJet jet = synth_jet(c, g);
            const double w0 = floor_of(c, g, jet);
            const SphereGrid fine = optimizer_grid(lmax);
            // the oracle only sees its own nodes, so it needs a much finer grid
            const double bis = oracle::bisection_floor(c, SphereGrid(96, 192));
            floor_err = std::max(floor_err, std::abs(w0 / bis - 1.0));
            const double w = w0 * (1.0 + 0.25 * (k % 4));
            const FunctionalReport r = evaluate_functionals(c, jet, w, g);
            blaschke = std::max(blaschke, r.blaschke_residual / (1.0 + r.volume));
            dual = std::max({dual, std::abs(r.volume_direct / r.volume - 1.0), std::abs(r.area_direct / r.area - 1.0)});
            // the floor is where the area element first touches zero
            floor_density = std::max(floor_density, std::abs(oracle::min_density(c, fine, synth_jet(c, fine), w0)) / (w0 * w0));
            if (k < 5)
                for (double t : {0.5, 2.0, 10.0}) {
                    const OddHarmonicCoeffs s = c.scaled(t);
                    homog = std::max(homog, std::abs(floor_of(s, g, synth_jet(s, g)) / (t * w0) - 1.0));
                }
        }
        add("blaschke", blaschke, 1e-10, n);
        add("volume_area_dual_path", dual, 1e-8, n);
        add("floor_vs_bisection", floor_err, 1e-6, n);
        add("floor_density_touches_zero", floor_density, 1e-6, n);
        add("floor_homogeneity", homog, 1e-8, std::min(n, 5));
    }
    {
        double quad = 0.0, gauge = 0.0;
        for (int k = 0; k < n; ++k) {
            const OddHarmonicCoeffs h = body(k, 7, 1.0), v = body(k + 100000, 7, 1.0);
            quad = std::max(quad, second_variation_check(h, v, 0.1));
        }
        for (int k = 0; k < std::min(n, 5); ++k) {
            const OddHarmonicCoeffs c = body(k, 5, 1.0);
            const Objective f(optimizer_grid(5), 5, 2);
            const double base = f(c).value;
            for (double t : {0.5, 2.0, 10.0}) gauge = std::max(gauge, std::abs(f(c.scaled(t)).value / base - 1.0));
        }
        add("energy_quadratic", quad, 1e-12, n);
        add("objective_gauge_invariance", gauge, 1e-8, std::min(n, 5));
    }
    return rep;
}

inline json to_json(const VerifySuiteReport& r)
{
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back(
            {{"name", c.name}, {"worst", c.worst}, {"threshold", c.threshold}, {"cases", c.cases}, {"pass", c.pass}});
    return json{{"checks", checks}, {"all_pass", r.all_pass()}};
}

} // namespace widthforge
