#include "reinforce/cell_solutions.hpp"

#include "reinforce/errors.hpp"
#include "reinforce/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

namespace reinforce {

namespace {

struct FieldJet {
    Vec2 value{};
    Mat2 grad{};
};

// Value and gradient of the closed forms; no domain checks.
FieldJet field_jet(const CellField& field, double y1, double y2)
{
    const double r2 = y1 * y1 + y2 * y2;
    const double r4 = r2 * r2;
    FieldJet out;
    const double log_r = 0.5 * std::log(r2);
    const Vec2 dlog{y1 / r2, y2 / r2};
    if (field.kind == CellFieldKind::WLog) {
        out.value = {-log_r, 0.0};
        out.grad[0] = {-dlog[0], -dlog[1]};
        return out;
    }

    const double k = field.kappa;
    const double q = y2 * y2 - y1 * y1;
    const double p = y1 * y2;
    const Vec2 dq{-2.0 * y1, 2.0 * y2};
    const Vec2 dp{y2, y1};
    const Vec2 y{y1, y2};

    // Angular part h/r^2 - h/r^4 and its gradient, for h = q or p.
    auto shape = [&](double h, const Vec2& dh, double& value, Vec2& grad) {
        value = h / r2 - h / r4;
        for (int j = 0; j < 2; ++j)
            grad[j] = dh[j] / r2 - 2.0 * h * y[j] / (r2 * r2) - dh[j] / r4 + 4.0 * h * y[j] / (r4 * r2);
    };
    double sq = 0.0, sp = 0.0;
    Vec2 gq{}, gp{};
    shape(q, dq, sq, gq);
    shape(p, dp, sp, gp);

    const double sign = field.kind == CellFieldKind::W1 ? -1.0 : 1.0;
    const int main = field.kind == CellFieldKind::W1 ? 0 : 1;
    const int other = 1 - main;
    out.value[main] = -log_r + sign * sq / (2.0 * k);
    out.value[other] = sp / k;
    for (int j = 0; j < 2; ++j) {
        out.grad[main][j] = -dlog[j] + sign * gq[j] / (2.0 * k);
        out.grad[other][j] = gp[j] / k;
    }
    return out;
}

void require_outside_disc(PlanePoint y, bool strict, const char* what)
{
    const double r = y.norm();
    const bool ok = strict ? r > 1.0 : r >= 1.0 - 1e-12;
    if (!ok)
        throw DomainError(fmt::format("{}: |y| = {} is inside the unit disc", what, r));
}

Mat2 plane_stress(const Mat2& grad, const LameCoefficients& base)
{
    const double e12 = 0.5 * (grad[0][1] + grad[1][0]);
    const double tr = grad[0][0] + grad[1][1];
    return Mat2{{{base.lambda * tr + 2.0 * base.mu * grad[0][0], 2.0 * base.mu * e12},
                 {2.0 * base.mu * e12, base.lambda * tr + 2.0 * base.mu * grad[1][1]}}};
}

// sigma(a):b for symmetric 3D strains.
double energy_bilinear(const Mat3& a, const Mat3& b, const LameCoefficients& base)
{
    const double tra = a[0][0] + a[1][1] + a[2][2];
    const double trb = b[0][0] + b[1][1] + b[2][2];
    double ab = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            ab += a[i][j] * b[i][j];
    return base.lambda * tra * trb + 2.0 * base.mu * ab;
}

void require_index(int m, const char* what)
{
    if (m < 1 || m > 3)
        throw PreconditionError(fmt::format("{}: index {} outside 1..3", what, m));
}

struct Integral {
    double value = 0.0;
    double magnitude = 0.0;
};

// Integral of f(t, theta) * exp(2t) over the given t-intervals and theta in (0, 2 pi).
template <class F>
Integral polar_integral(const std::vector<std::pair<double, double>>& t_ranges, std::size_t panels,
                        const AnnulusQuadrature& q, std::size_t n_theta, F&& f)
{
    const QuadratureRule th = gauss_legendre(n_theta, 0.0, 2.0 * pi);
    std::vector<double> rows;
    std::vector<double> abs_rows;
    for (const auto& [lo, hi] : t_ranges) {
        const QuadratureRule tr = composite_gauss(panels, q.per_panel, lo, hi);
        for (std::size_t i = 0; i < tr.points.size(); ++i) {
            const double t = tr.points[i];
            const double jac = std::exp(2.0 * t) * tr.weights[i];
            double row = 0.0;
            double abs_row = 0.0;
            for (std::size_t j = 0; j < th.points.size(); ++j) {
                const double v = f(t, th.points[j]) * th.weights[j];
                row += v;
                abs_row += std::abs(v);
            }
            rows.push_back(row * jac);
            abs_rows.push_back(abs_row * jac);
        }
    }
    return {pairwise_sum(rows.data(), rows.size()), pairwise_sum(abs_rows.data(), abs_rows.size())};
}

template <class F>
double refined_polar_integral(const std::vector<std::pair<double, double>>& t_ranges, const AnnulusQuadrature& q,
                              const char* what, F&& f)
{
    if (q.n_r == 0 || q.n_theta == 0 || q.per_panel == 0)
        throw PreconditionError(fmt::format("{}: quadrature counts must be positive", what));
    const Integral coarse = polar_integral(t_ranges, q.n_r, q, q.n_theta, f);
    const Integral fine = polar_integral(t_ranges, 2 * q.n_r, q, 2 * q.n_theta, f);
    if (std::abs(fine.value - coarse.value) > q.tolerance * fine.magnitude)
        throw AccuracyError(fmt::format("{}: quadrature changed from {} to {} on refinement", what, coarse.value,
                                        fine.value),
                            coarse.value, fine.value);
    return fine.value;
}

} // namespace

Vec2 eval_w(const CellField& field, PlanePoint y)
{
    require_outside_disc(y, false, "eval_w");
    return field_jet(field, y.y1, y.y2).value;
}

Mat2 eval_gradient(const CellField& field, PlanePoint y)
{
    require_outside_disc(y, false, "eval_gradient");
    return field_jet(field, y.y1, y.y2).grad;
}

Mat2 eval_stress(const CellField& field, PlanePoint y, const LameCoefficients& base)
{
    if (field.kind == CellFieldKind::WLog)
        throw PreconditionError("eval_stress: w_log is antiplane, use eval_antiplane_stress");
    require_outside_disc(y, true, "eval_stress");
    return plane_stress(field_jet(field, y.y1, y.y2).grad, base);
}

Vec2 eval_antiplane_stress(PlanePoint y, const LameCoefficients& base)
{
    require_outside_disc(y, true, "eval_antiplane_stress");
    const Mat2 g = field_jet(CellField{CellFieldKind::WLog, 0.0}, y.y1, y.y2).grad;
    return {base.mu * g[0][0], base.mu * g[0][1]};
}

double annulus_energy(int m, int l, double R, const LameCoefficients& base, const AnnulusQuadrature& q)
{
    require_index(m, "annulus_energy");
    require_index(l, "annulus_energy");
    if (!(R > 1.0))
        throw PreconditionError(fmt::format("annulus_energy: outer radius {} must exceed 1", R));
    base.require_valid("annulus_energy");
    if ((m == 3) != (l == 3))
        return 0.0;

    const double log_R = std::log(R);
    const double k = kappa(base);
    const CellField fm{m == 1 ? CellFieldKind::W1 : CellFieldKind::W2, k};
    const CellField fl{l == 1 ? CellFieldKind::W1 : CellFieldKind::W2, k};
    auto integrand = [&](double t, double theta) {
        const double rho = std::exp(t);
        const double y1 = rho * std::cos(theta);
        const double y2 = rho * std::sin(theta);
        if (m == 3)
            return 1.0 / (rho * rho);
        const Mat2 gm = field_jet(fm, y1, y2).grad;
        const Mat2 gl = field_jet(fl, y1, y2).grad;
        const Mat2 sm = plane_stress(gm, base);
        const double el12 = 0.5 * (gl[0][1] + gl[1][0]);
        return sm[0][0] * gl[0][0] + sm[1][1] * gl[1][1] + 2.0 * sm[0][1] * el12;
    };
    return refined_polar_integral({{0.0, log_R}}, q, "annulus_energy", integrand) / log_R;
}

LogFit fit_log_limit(std::span<const double> radii, std::span<const double> values)
{
    if (radii.size() != values.size())
        throw PreconditionError("fit_log_limit: radii and values differ in length");
    if (radii.size() < 2)
        throw PreconditionError("fit_log_limit: need at least two radii to fit a limit");
    const double n = static_cast<double>(radii.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 1.0))
            throw PreconditionError("fit_log_limit: radii must exceed 1");
        const double x = 1.0 / std::log(radii[i]);
        sx += x;
        sy += values[i];
        sxx += x * x;
        sxy += x * values[i];
    }
    const double det = n * sxx - sx * sx;
    if (!(std::abs(det) > 1e-14 * n * sxx))
        throw PreconditionError("fit_log_limit: radii must not all coincide");
    LogFit fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.limit = (sy - fit.slope * sx) / n;
    return fit;
}

double truncation_phi(double R, double s)
{
    if (R <= 0.5 * s)
        return 1.0;
    if (R >= s)
        return 0.0;
    return -4.0 / (3.0 * s * s) * (R * R - s * s);
}

CorrectorSample corrector_z_sample(const Vec3& x, int m, const FiberLayout& layout, const LameCoefficients& base)
{
    require_index(m, "corrector_z");
    CorrectorSample out;
    const FiberHit hit = nearest_fiber(layout, x[0], x[1]);
    const double R = hit.distance;
    const double r = layout.radius;
    const double s = layout.support;
    if (R <= r) {
        out.value[m - 1] = 1.0;
        return out;
    }
    if (R >= s)
        return out;

    const double c = 1.0 / std::log(r);
    const double phi = truncation_phi(R, s);
    const double dphi = R > 0.5 * s ? -8.0 * R / (3.0 * s * s) : 0.0;
    const Vec2 dR{hit.offset[0] / R, hit.offset[1] / R};

    Vec3 g{};
    Mat3 dg{};
    if (m == 3) {
        g[2] = 1.0 + c * std::log(R / r);
        dg[2][0] = c * dR[0] / R;
        dg[2][1] = c * dR[1] / R;
    } else {
        const CellField field{m == 1 ? CellFieldKind::W1 : CellFieldKind::W2, kappa(base)};
        const FieldJet jet = field_jet(field, hit.offset[0] / r, hit.offset[1] / r);
        g[m - 1] = 1.0;
        for (int i = 0; i < 2; ++i) {
            g[i] -= c * jet.value[i];
            for (int j = 0; j < 2; ++j)
                dg[i][j] = -c * jet.grad[i][j] / r;
        }
    }
    for (int i = 0; i < 3; ++i) {
        out.value[i] = phi * g[i];
        for (int j = 0; j < 2; ++j)
            out.grad[i][j] = phi * dg[i][j] + g[i] * dphi * dR[j];
    }
    return out;
}

Vec3 corrector_z(const Vec3& x, int m, const FiberLayout& layout, const LameCoefficients& base)
{
    return corrector_z_sample(x, m, layout, base).value;
}

double predicted_corrector_energy(int m, int l, double gamma, const LameCoefficients& base, double volume)
{
    require_index(m, "predicted_corrector_energy");
    require_index(l, "predicted_corrector_energy");
    if (!std::isfinite(gamma) || gamma < 0.0)
        throw PreconditionError(fmt::format("predicted_corrector_energy: gamma {} must be finite", gamma));
    if (!(volume > 0.0))
        throw PreconditionError("predicted_corrector_energy: volume must be positive");
    if (m != l)
        return 0.0;
    if (m == 3)
        return 2.0 * pi * gamma * base.mu * volume;
    return 2.0 * pi * gamma * coupling_matrix(base)(0) * volume;
}

double corrector_energy_numeric(int m, int l, const FiberLayout& layout, const LameCoefficients& base, double length,
                                const AnnulusQuadrature& q)
{
    require_index(m, "corrector_energy_numeric");
    require_index(l, "corrector_energy_numeric");
    base.require_valid("corrector_energy_numeric");
    if (!(length > 0.0))
        throw PreconditionError("corrector_energy_numeric: length must be positive");
    if (!supports_separated(layout))
        throw PreconditionError("corrector_energy_numeric: truncation discs overlap or leave the cross-section");

    const double r = layout.radius;
    const double s = layout.support;
    const double t_knot = std::max(std::log(r), std::log(0.5 * s));
    const std::vector<std::pair<double, double>> ranges{{std::log(r), t_knot}, {t_knot, std::log(s)}};
    std::vector<double> per_fiber;
    for (const Vec2& c : layout.centers) {
        auto integrand = [&](double t, double theta) {
            const double R = std::exp(t);
            const Vec3 x{c[0] + R * std::cos(theta), c[1] + R * std::sin(theta), 0.0};
            const Mat3 em = symmetric_part(corrector_z_sample(x, m, layout, base).grad);
            const Mat3 el = m == l ? em : symmetric_part(corrector_z_sample(x, l, layout, base).grad);
            return energy_bilinear(em, el, base);
        };
        per_fiber.push_back(refined_polar_integral(ranges, q, "corrector_energy_numeric", integrand));
    }
    return length * pairwise_sum(per_fiber.data(), per_fiber.size());
}

} // namespace reinforce
