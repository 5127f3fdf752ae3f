#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace widthforge {

struct NelderMeadOptions
{
    std::size_t max_evals = 1000;
    double x_tolerance = 1e-10; // simplex diameter (max abs coordinate spread)
    double f_tolerance = 0.0;   // spread of vertex values, absolute
    bool record_trace = false;
};

struct NelderMeadResult
{
    std::vector<double> x;
    double f = std::numeric_limits<double>::infinity();
    std::size_t evals = 0;
    std::size_t iterations = 0;
    std::vector<double> best_trace; // best value after each iteration, if recorded
};

/// Minimizes f starting from the simplex {x0, x0 + step_k e_k}.
///
/// `transform` maps every candidate point before it is evaluated and stored
/// (used to keep iterates on a constraint manifold); pass an identity for
/// plain unconstrained search.
template <typename F, typename Transform>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const std::vector<double>& steps,
                             const NelderMeadOptions& opt, Transform&& transform)
{
    const std::size_t n = x0.size();
    NelderMeadResult res;
    std::vector<std::vector<double>> simplex(n + 1);
    std::vector<double> values(n + 1);

    // the budget is hard: points past it are not evaluated and never accepted
    auto eval = [&](std::vector<double>& x) {
        transform(x);
        if (res.evals >= opt.max_evals) return std::numeric_limits<double>::infinity();
        ++res.evals;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    simplex[0] = x0;
    values[0] = eval(simplex[0]);
    for (std::size_t k = 0; k < n; ++k) {
        simplex[k + 1] = x0;
        simplex[k + 1][k] += steps[k];
        values[k + 1] = eval(simplex[k + 1]);
    }

    // adaptive coefficients help in higher dimensions
    const double dim = static_cast<double>(std::max<std::size_t>(n, 1));
    const double rho = 1.0;
    const double chi = n > 2 ? 1.0 + 2.0 / dim : 2.0;
    const double gamma = n > 2 ? 0.75 - 1.0 / (2.0 * dim) : 0.5;
    const double sigma = n > 2 ? 1.0 - 1.0 / dim : 0.5;

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);

    while (res.evals < opt.max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        {
            std::vector<std::vector<double>> s2(n + 1);
            std::vector<double> v2(n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                s2[k] = std::move(simplex[order[k]]);
                v2[k] = values[order[k]];
            }
            simplex = std::move(s2);
            values = std::move(v2);
        }
        ++res.iterations;
        if (opt.record_trace) res.best_trace.push_back(values[0]);

        double diameter = 0.0;
        for (std::size_t k = 1; k <= n; ++k)
            for (std::size_t d = 0; d < n; ++d) diameter = std::max(diameter, std::abs(simplex[k][d] - simplex[0][d]));
        const double spread = values[n] - values[0];
        if (diameter <= opt.x_tolerance) break;
        if (opt.f_tolerance > 0.0 && std::isfinite(spread) && spread <= opt.f_tolerance) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t d = 0; d < n; ++d) centroid[d] += simplex[k][d] / dim;

        for (std::size_t d = 0; d < n; ++d) xr[d] = centroid[d] + rho * (centroid[d] - simplex[n][d]);
        const double fr = eval(xr);
        if (fr < values[0]) {
            for (std::size_t d = 0; d < n; ++d) xe[d] = centroid[d] + chi * (xr[d] - centroid[d]);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if (fr < values[n - 1]) {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        bool shrink = false;
        if (fr < values[n]) {
            for (std::size_t d = 0; d < n; ++d) xc[d] = centroid[d] + gamma * (xr[d] - centroid[d]);
            const double fc = eval(xc);
            if (fc <= fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                shrink = true;
            }
        } else {
            for (std::size_t d = 0; d < n; ++d) xc[d] = centroid[d] - gamma * (centroid[d] - simplex[n][d]);
            const double fc = eval(xc);
            if (fc < values[n]) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            for (std::size_t k = 1; k <= n; ++k) {
                for (std::size_t d = 0; d < n; ++d)
                    simplex[k][d] = simplex[0][d] + sigma * (simplex[k][d] - simplex[0][d]);
                values[k] = eval(simplex[k]);
            }
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    res.x = simplex[best];
    res.f = values[best];
    return res;
}

template <typename F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const std::vector<double>& steps,
                             const NelderMeadOptions& opt)
{
    return nelder_mead(std::forward<F>(f), std::move(x0), steps, opt, [](std::vector<double>&) {});
}

} // namespace widthforge
