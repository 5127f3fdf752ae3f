#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "sphere_grid.hpp"
#include "vec3.hpp"

namespace widthforge {

// Real, fully normalized spherical harmonics without the Condon-Shortley
// phase:
//   Y_{l,0}  = Pbar_l^0(cos t)
//   Y_{l,m}  = sqrt(2) Pbar_l^m(cos t) cos(m p)      m > 0
//   Y_{l,-m} = sqrt(2) Pbar_l^m(cos t) sin(m p)      m > 0
// with Pbar normalized so that the Y are orthonormal for dA on the unit sphere.

/// Coefficients of an odd function on the sphere: degrees 1, 3, ..., lmax.
///
/// Storage is dense. Degree-1 slots always exist but are held at zero unless
/// `include_degree_one` is set (degree-1 terms only translate the body).
class OddHarmonicCoeffs
{
public:
    OddHarmonicCoeffs() = default;

    explicit OddHarmonicCoeffs(int lmax, bool include_degree_one = false)
        : lmax_(lmax), include_degree_one_(include_degree_one)
    {
        if (lmax < 1 || lmax % 2 == 0) throw ValidationError("OddHarmonicCoeffs: lmax must be odd and >= 1");
        values_.assign(slot_count(lmax), 0.0);
    }

    /// First storage slot of degree l (l odd).
    static std::size_t degree_offset(int l)
    {
        const std::size_t j = static_cast<std::size_t>(l - 1) / 2;
        return 2 * j * j + j;
    }
    static std::size_t slot_count(int lmax) { return degree_offset(lmax + 2); }

    int lmax() const { return lmax_; }
    bool include_degree_one() const { return include_degree_one_; }
    std::size_t size() const { return values_.size(); }

    static bool valid_index(int l, int m) { return l >= 1 && l % 2 == 1 && std::abs(m) <= l; }

    std::size_t index(int l, int m) const
    {
        if (!valid_index(l, m) || l > lmax_)
            throw ValidationError("OddHarmonicCoeffs: invalid index (l=" + std::to_string(l) +
                                  ", m=" + std::to_string(m) + ")");
        return degree_offset(l) + static_cast<std::size_t>(m + l);
    }

    double get(int l, int m) const { return values_[index(l, m)]; }

    void set(int l, int m, double value)
    {
        if (l == 1 && !include_degree_one_ && value != 0.0)
            throw ValidationError("OddHarmonicCoeffs: degree-1 entry with include_degree_one = false");
        values_[index(l, m)] = value;
    }

    std::span<const double> values() const { return values_; }

    /// Degree of storage slot k.
    static int degree_of_slot(std::size_t k)
    {
        int l = 1;
        while (degree_offset(l + 2) <= k) l += 2;
        return l;
    }

    /// Slots that are free parameters (degree >= 3, plus degree 1 when included).
    std::vector<std::size_t> free_slots() const
    {
        std::vector<std::size_t> out;
        for (std::size_t k = include_degree_one_ ? 0 : 3; k < values_.size(); ++k) out.push_back(k);
        return out;
    }

    double norm() const
    {
        double s = 0.0;
        for (double v : values_) s += v * v;
        return std::sqrt(s);
    }

    bool is_zero() const
    {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
    }

    OddHarmonicCoeffs scaled(double t) const
    {
        OddHarmonicCoeffs out = *this;
        for (double& v : out.values_) v *= t;
        return out;
    }

    /// a*x + b*y; the result keeps degree 1 if either operand does.
    static OddHarmonicCoeffs combine(double a, const OddHarmonicCoeffs& x, double b, const OddHarmonicCoeffs& y)
    {
        OddHarmonicCoeffs out(std::max(x.lmax_, y.lmax_), x.include_degree_one_ || y.include_degree_one_);
        for (std::size_t k = 0; k < x.values_.size(); ++k) out.values_[k] += a * x.values_[k];
        for (std::size_t k = 0; k < y.values_.size(); ++k) out.values_[k] += b * y.values_[k];
        return out;
    }

    /// Same function, stored with a larger (odd) lmax.
    OddHarmonicCoeffs padded(int lmax) const
    {
        if (lmax < lmax_) throw ValidationError("OddHarmonicCoeffs::padded: cannot shrink");
        OddHarmonicCoeffs out(lmax, include_degree_one_);
        std::copy(values_.begin(), values_.end(), out.values_.begin());
        return out;
    }

    /// Raw slot access, for optimizers working on flat vectors.
    double& slot(std::size_t k) { return values_.at(k); }
    double slot(std::size_t k) const { return values_.at(k); }

    bool operator==(const OddHarmonicCoeffs&) const = default;

private:
    int lmax_ = 1;
    bool include_degree_one_ = false;
    std::vector<double> values_ = std::vector<double>(3, 0.0);
};

/// h and its first and second covariant derivatives at one point, in the
/// orthonormal frame {d/dtheta, (1/sin theta) d/dphi}.
struct JetSample
{
    double h = 0.0;
    double g_theta = 0.0;
    double g_phi = 0.0;
    double a = 0.0; // Hess(e_theta, e_theta)
    double b = 0.0; // Hess(e_theta, e_phi)
    double c = 0.0; // Hess(e_phi, e_phi)

    double lap() const { return a + c; }
    double dethess() const { return a * c - b * b; }
};

/// Per-node samples of h, grad h and Hess h on a grid.
struct SupportJet
{
    std::vector<double> h, g_theta, g_phi, a, b, c, lap, dethess;

    std::size_t size() const { return h.size(); }

    explicit SupportJet(std::size_t n = 0)
        : h(n), g_theta(n), g_phi(n), a(n), b(n), c(n), lap(n), dethess(n)
    {
    }

    JetSample at(std::size_t i) const { return {h[i], g_theta[i], g_phi[i], a[i], b[i], c[i]}; }

    void set(std::size_t i, const JetSample& s)
    {
        h[i] = s.h;
        g_theta[i] = s.g_theta;
        g_phi[i] = s.g_phi;
        a[i] = s.a;
        b[i] = s.b;
        c[i] = s.c;
        lap[i] = s.lap();
        dethess[i] = s.dethess();
    }
};

namespace detail {

/// Trigonometric data at a point, derived from the unit vector so that the
/// antipodal point gives exactly negated values.
struct PointTrig
{
    double z = 1.0;    // cos theta
    double s = 0.0;    // sin theta
    double cphi = 1.0; // cos phi
    double sphi = 0.0; // sin phi
};

inline PointTrig point_trig(const Vec3& u)
{
    PointTrig t;
    t.z = u[2];
    t.s = std::hypot(u[0], u[1]);
    if (t.s > 0.0) {
        t.cphi = u[0] / t.s;
        t.sphi = u[1] / t.s;
    }
    return t;
}

/// Recurrence constants for normalized associated Legendre functions up to lmax.
struct LegendreTables
{
    int lmax = 0;
    std::vector<double> diag;  // Pbar_m^m / (s Pbar_{m-1}^{m-1})
    std::vector<double> sub;   // Pbar_{m+1}^m / (z Pbar_m^m)
    std::vector<double> an, bn; // three-term recurrence, indexed l*(L+1)+m
    std::vector<double> dk;    // coefficient of Pbar_{l-1}^m in d/dtheta Pbar_l^m

    explicit LegendreTables(int L) : lmax(L), diag(L + 1), sub(L + 1), an((L + 1) * (L + 1)), bn(an.size()), dk(an.size())
    {
        for (int m = 1; m <= L; ++m) diag[m] = std::sqrt((2.0 * m + 1.0) / (2.0 * m));
        for (int m = 0; m <= L; ++m) sub[m] = std::sqrt(2.0 * m + 3.0);
        for (int m = 0; m <= L; ++m) {
            for (int l = m; l <= L; ++l) {
                const double lm2 = static_cast<double>(l) * l - static_cast<double>(m) * m;
                const std::size_t k = static_cast<std::size_t>(l * (L + 1) + m);
                if (l >= m + 2) {
                    an[k] = std::sqrt((4.0 * l * l - 1.0) / lm2);
                    bn[k] = std::sqrt(((l - 1.0) * (l - 1.0) - static_cast<double>(m) * m) /
                                      (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
                }
                dk[k] = l > 0 ? std::sqrt((2.0 * l + 1.0) * lm2 / (2.0 * l - 1.0)) : 0.0;
            }
        }
    }
};

/// Visits every real harmonic (l, m) with l <= lmax at a point, passing the
/// frame-component jet of Y_{l,m}. Even degrees are skipped unless
/// `with_even`. Requires sin(theta) > 0.
class HarmonicVisitor
{
public:
    explicit HarmonicVisitor(int lmax) : tables_(lmax), p_((lmax + 1) * (lmax + 1)), cm_(lmax + 1), sm_(lmax + 1) {}

    int lmax() const { return tables_.lmax; }

    template <typename Visitor>
    void operator()(const PointTrig& pt, bool with_even, Visitor&& visit)
    {
        const int L = tables_.lmax;
        const double z = pt.z, s = pt.s;
        const double inv_s = 1.0 / s;
        const double cot = z * inv_s;

        cm_[0] = 1.0;
        sm_[0] = 0.0;
        if (L >= 1) {
            cm_[1] = pt.cphi;
            sm_[1] = pt.sphi;
        }
        for (int m = 2; m <= L; ++m) {
            cm_[m] = 2.0 * pt.cphi * cm_[m - 1] - cm_[m - 2];
            sm_[m] = 2.0 * pt.cphi * sm_[m - 1] - sm_[m - 2];
        }

        auto P = [&](int l, int m) -> double& { return p_[static_cast<std::size_t>(l * (L + 1) + m)]; };
        P(0, 0) = 0.5 / std::sqrt(std::numbers::pi);
        for (int m = 1; m <= L; ++m) P(m, m) = tables_.diag[m] * s * P(m - 1, m - 1);
        for (int m = 0; m < L; ++m) P(m + 1, m) = tables_.sub[m] * z * P(m, m);
        for (int m = 0; m <= L; ++m)
            for (int l = m + 2; l <= L; ++l) {
                const std::size_t k = static_cast<std::size_t>(l * (L + 1) + m);
                P(l, m) = tables_.an[k] * (z * P(l - 1, m) - tables_.bn[k] * P(l - 2, m));
            }

        const double root2 = std::numbers::sqrt2;
        for (int l = with_even ? 0 : 1; l <= L; l += with_even ? 1 : 2) {
            const double ll1 = l * (l + 1.0);
            for (int m = 0; m <= l; ++m) {
                const std::size_t k = static_cast<std::size_t>(l * (L + 1) + m);
                const double pv = p_[k];
                const double prev = (l - 1 >= m) ? P(l - 1, m) : 0.0;
                const double dp = (l * z * pv - tables_.dk[k] * prev) * inv_s;
                const double d2p = -cot * dp + (m * m * inv_s * inv_s - ll1) * pv;

                // raw partials: Y = P T, Y_t = P' T, Y_p = P T', Y_tp = P' T', Y_pp = -m^2 P T
                auto emit = [&](int signed_m, double t, double t1) {
                    const double y = pv * t;
                    const double yt = dp * t;
                    const double yp = pv * t1;
                    const double ypp = -static_cast<double>(m) * m * y;
                    JetSample js;
                    js.h = y;
                    js.g_theta = yt;
                    js.g_phi = yp * inv_s;
                    js.a = d2p * t;
                    js.b = (dp * t1 - cot * yp) * inv_s;
                    js.c = ypp * inv_s * inv_s + cot * yt;
                    visit(l, signed_m, js);
                };
                if (m == 0) {
                    emit(0, 1.0, 0.0);
                } else {
                    emit(m, root2 * cm_[m], -root2 * m * sm_[m]);
                    emit(-m, root2 * sm_[m], root2 * m * cm_[m]);
                }
            }
        }
    }

private:
    LegendreTables tables_;
    std::vector<double> p_, cm_, sm_;
};

} // namespace detail

/// Reusable point evaluator for coefficient sets up to a fixed lmax. Holds
/// scratch space, so one instance per thread.
class JetEvaluator
{
public:
    explicit JetEvaluator(int lmax) : visitor_(lmax) {}

    /// Below this sin(theta) the frame formulas lose accuracy (they divide by
    /// sin^2 theta); such points are evaluated in a rotated copy of h instead.
    static constexpr double kPoleGuard = 1e-2;

    JetSample operator()(const OddHarmonicCoeffs& coeffs, const Vec3& u)
    {
        if (coeffs.lmax() > visitor_.lmax()) throw ValidationError("JetEvaluator: coefficient lmax too large");
        if (std::hypot(u[0], u[1]) < kPoleGuard) return near_pole(coeffs, u);
        return direct(coeffs, u);
    }

    JetSample operator()(const OddHarmonicCoeffs& coeffs, double theta, double phi)
    {
        return (*this)(coeffs, unit_vector(theta, phi));
    }

    /// Value of h at any point (no derivatives, so no pole restriction).
    double value(const OddHarmonicCoeffs& coeffs, const Vec3& u)
    {
        double out = 0.0;
        const auto values = coeffs.values();
        const int L = coeffs.lmax();
        visitor_(detail::point_trig(u), false, [&](int l, int m, const JetSample& y) {
            if (l <= L) out += values[OddHarmonicCoeffs::degree_offset(l) + static_cast<std::size_t>(m + l)] * y.h;
        });
        return out;
    }

private:
    JetSample near_pole(const OddHarmonicCoeffs& coeffs, const Vec3& u);

    JetSample direct(const OddHarmonicCoeffs& coeffs, const Vec3& u)
    {
        JetSample out;
        const auto values = coeffs.values();
        const int L = coeffs.lmax();
        visitor_(detail::point_trig(u), false, [&](int l, int m, const JetSample& y) {
            if (l > L) return;
            const double cv = values[OddHarmonicCoeffs::degree_offset(l) + static_cast<std::size_t>(m + l)];
            if (cv == 0.0) return;
            out.h += cv * y.h;
            out.g_theta += cv * y.g_theta;
            out.g_phi += cv * y.g_phi;
            out.a += cv * y.a;
            out.b += cv * y.b;
            out.c += cv * y.c;
        });
        return out;
    }

    detail::HarmonicVisitor visitor_;
    std::optional<OddHarmonicCoeffs> pole_source_, pole_rotated_;
};

/// Jet of the function with the given coefficients at the point u.
inline JetSample evaluate_jet(const OddHarmonicCoeffs& coeffs, const Vec3& u)
{
    return JetEvaluator(coeffs.lmax())(coeffs, u);
}

inline JetSample evaluate_jet(const OddHarmonicCoeffs& coeffs, double theta, double phi)
{
    return evaluate_jet(coeffs, unit_vector(theta, phi));
}

/// Value of h only.
inline double evaluate(const OddHarmonicCoeffs& coeffs, const Vec3& u) { return evaluate_jet(coeffs, u).h; }

/// Precomputed odd-degree basis jets on a grid; synthesis is then a dense
/// matrix-vector product per jet component.
class HarmonicBasis
{
public:
    HarmonicBasis(const SphereGrid& grid, int lmax) : grid_(&grid), lmax_(lmax)
    {
        if (lmax < 1 || lmax % 2 == 0) throw ValidationError("HarmonicBasis: lmax must be odd and >= 1");
        if (grid.band_limit() < 2 * lmax)
            throw ValidationError("synth_jet: lmax " + std::to_string(lmax) + " exceeds grid design order (band limit " +
                                  std::to_string(grid.band_limit()) + ")");
        slots_ = OddHarmonicCoeffs::slot_count(lmax);
        table_.assign(grid.size() * slots_ * 6, 0.0);
        detail::HarmonicVisitor visit(lmax);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            double* row = &table_[i * slots_ * 6];
            visit(detail::point_trig(grid.node(i).u), false, [&](int l, int m, const JetSample& y) {
                double* e = row + 6 * (OddHarmonicCoeffs::degree_offset(l) + static_cast<std::size_t>(m + l));
                e[0] = y.h;
                e[1] = y.g_theta;
                e[2] = y.g_phi;
                e[3] = y.a;
                e[4] = y.b;
                e[5] = y.c;
            });
        }
    }

    const SphereGrid& grid() const { return *grid_; }
    int lmax() const { return lmax_; }

    SupportJet synth(const OddHarmonicCoeffs& coeffs) const
    {
        if (coeffs.lmax() > lmax_)
            throw ValidationError("synth_jet: coefficient lmax exceeds the basis lmax");
        const auto values = coeffs.values();
        const std::size_t n = grid_->size();
        SupportJet jet(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = &table_[i * slots_ * 6];
            double acc[6] = {0, 0, 0, 0, 0, 0};
            for (std::size_t k = 0; k < values.size(); ++k) {
                const double cv = values[k];
                if (cv == 0.0) continue;
                const double* e = row + 6 * k;
                for (int q = 0; q < 6; ++q) acc[q] += cv * e[q];
            }
            jet.set(i, {acc[0], acc[1], acc[2], acc[3], acc[4], acc[5]});
        }
        return jet;
    }

private:
    const SphereGrid* grid_;
    int lmax_;
    std::size_t slots_ = 0;
    std::vector<double> table_;
};

/// Analytic jet of h on every grid node.
inline SupportJet synth_jet(const OddHarmonicCoeffs& coeffs, const SphereGrid& grid)
{
    return HarmonicBasis(grid, coeffs.lmax()).synth(coeffs);
}

/// Analysis transform onto odd degrees 1..lmax.
///
/// Rejects fields that are not antipodally odd (relative tolerance 1e-8) or
/// whose even-degree content exceeds the same tolerance.
inline OddHarmonicCoeffs project(std::span<const double> field, const SphereGrid& grid, int lmax,
                                 bool include_degree_one = false)
{
    if (field.size() != grid.size()) throw ValidationError("project: field length does not match grid");
    if (grid.band_limit() < 2 * lmax) throw ValidationError("project: grid not exact to degree 2*lmax");

    double scale = 0.0, asym = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        scale = std::max(scale, std::abs(field[i]));
        asym = std::max(asym, std::abs(field[i] + field[grid.antipode(i)]));
    }
    const double tol = 1e-8 * (1.0 + scale);
    if (asym > tol)
        throw ParityViolation("project: field is not antipodally odd (max |f(u)+f(-u)| = " + std::to_string(asym) + ")");

    OddHarmonicCoeffs out(lmax, include_degree_one);
    std::vector<double> odd(out.size(), 0.0);
    double even_energy = 0.0;
    const auto w = grid.weights();
    // sum degree by degree over nodes; projection is a pure quadrature
    std::vector<double> all((lmax + 1) * (lmax + 1), 0.0);
    detail::HarmonicVisitor visit(lmax);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double fw = field[i] * w[i];
        visit(detail::point_trig(grid.node(i).u), true, [&](int l, int m, const JetSample& y) {
            all[static_cast<std::size_t>(l * l + l + m)] += fw * y.h;
        });
    }
    for (int l = 0; l <= lmax; ++l) {
        for (int m = -l; m <= l; ++m) {
            const double cv = all[static_cast<std::size_t>(l * l + l + m)];
            if (l % 2 == 0) {
                even_energy += cv * cv;
            } else if (l > 1 || include_degree_one) {
                out.slot(OddHarmonicCoeffs::degree_offset(l) + static_cast<std::size_t>(m + l)) = cv;
            }
        }
    }
    if (std::sqrt(even_energy) > tol)
        throw ParityViolation("project: even-degree content " + std::to_string(std::sqrt(even_energy)) +
                              " above tolerance");
    return out;
}

/// Quarter turn about the x axis; takes the poles to the equator.
inline constexpr Mat3 kQuarterTurnX{Vec3{1.0, 0.0, 0.0}, Vec3{0.0, 0.0, -1.0}, Vec3{0.0, 1.0, 0.0}};

/// Coefficients of h o R^T, i.e. h carried along by the rotation R. Exact for
/// band-limited h (sampled values only, projected on an exact grid).
inline OddHarmonicCoeffs rotate_coeffs(const OddHarmonicCoeffs& c, const Mat3& R)
{
    const SphereGrid grid = default_grid(c.lmax());
    const Mat3 Rt = {Vec3{R[0][0], R[1][0], R[2][0]}, Vec3{R[0][1], R[1][1], R[2][1]}, Vec3{R[0][2], R[1][2], R[2][2]}};
    JetEvaluator eval(c.lmax());
    std::vector<double> field(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) field[i] = eval.value(c, Rt * grid.node(i).u);
    // restore exact oddness lost to rounding in the rotation
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::size_t j = grid.antipode(i);
        if (j > i) {
            const double odd = 0.5 * (field[i] - field[j]);
            field[i] = odd;
            field[j] = -odd;
        }
    }
    return project(field, grid, c.lmax(), c.include_degree_one());
}

inline JetSample JetEvaluator::near_pole(const OddHarmonicCoeffs& coeffs, const Vec3& u)
{
    if (!pole_source_ || !(*pole_source_ == coeffs)) {
        pole_rotated_ = rotate_coeffs(coeffs, kQuarterTurnX);
        pole_source_ = coeffs;
    }
    // h'(v) = h(R^T v): grad h'(Ru) = R grad h(u), Hess h'(Ru)(RX, RY) = Hess h(u)(X, Y)
    const Vec3 v = kQuarterTurnX * u;
    const JetSample r = direct(*pole_rotated_, v);
    const detail::PointTrig tu = detail::point_trig(u), tv = detail::point_trig(v);
    const Vec3 et{tu.z * tu.cphi, tu.z * tu.sphi, -tu.s}, ep{-tu.sphi, tu.cphi, 0.0};
    const Vec3 ft{tv.z * tv.cphi, tv.z * tv.sphi, -tv.s}, fp{-tv.sphi, tv.cphi, 0.0};
    const Vec3 X1 = kQuarterTurnX * et, X2 = kQuarterTurnX * ep;
    const double x1t = dot(X1, ft), x1p = dot(X1, fp), x2t = dot(X2, ft), x2p = dot(X2, fp);
    JetSample out;
    out.h = r.h;
    out.g_theta = r.g_theta * x1t + r.g_phi * x1p;
    out.g_phi = r.g_theta * x2t + r.g_phi * x2p;
    out.a = r.a * x1t * x1t + 2.0 * r.b * x1t * x1p + r.c * x1p * x1p;
    out.b = r.a * x1t * x2t + r.b * (x1t * x2p + x1p * x2t) + r.c * x1p * x2p;
    out.c = r.a * x2t * x2t + 2.0 * r.b * x2t * x2p + r.c * x2p * x2p;
    return out;
}

/// sum over coefficients of l(l+1) c^2, i.e. the integral of |grad h|^2.
inline double dirichlet_energy_spectral(const OddHarmonicCoeffs& coeffs)
{
    double s = 0.0;
    for (int l = 1; l <= coeffs.lmax(); l += 2)
        for (int m = -l; m <= l; ++m) s += l * (l + 1.0) * coeffs.get(l, m) * coeffs.get(l, m);
    return s;
}

} // namespace widthforge
