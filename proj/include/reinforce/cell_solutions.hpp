#pragma once

#include "reinforce/fiber_layout.hpp"
#include "reinforce/material_law.hpp"
#include "reinforce/types.hpp"

#include <span>

namespace reinforce {

/// Point of the plane cell problem, in units of the fiber radius.
struct PlanePoint {
    double y1 = 0.0;
    double y2 = 0.0;

    double norm() const noexcept { return std::hypot(y1, y2); }
};

enum class CellFieldKind { W1, W2, WLog };

/// One of the exterior cell fields on |y| >= 1.
///
/// W1 and W2 are the plane elasticity fields with far-field behaviour
/// -ln|y| e_m; they depend on the matrix through kappa. WLog is -ln|y|.
struct CellField {
    CellFieldKind kind = CellFieldKind::W1;
    double kappa = 2.0;
};

/// Closed-form value. For WLog the scalar is returned in component 0.
Vec2 eval_w(const CellField& field, PlanePoint y);

/// grad[i][j] = d w_i / d y_j. For WLog only row 0 is used.
Mat2 eval_gradient(const CellField& field, PlanePoint y);

/// Plane stress lambda tr(e) I + 2 mu e of W1 or W2; requires |y| > 1.
Mat2 eval_stress(const CellField& field, PlanePoint y, const LameCoefficients& base);

/// Antiplane stress mu grad w of WLog; requires |y| > 1.
Vec2 eval_antiplane_stress(PlanePoint y, const LameCoefficients& base);

struct AnnulusQuadrature {
    /// Panels in t = ln|y|, each carrying `per_panel` Gauss points.
    std::size_t n_r = 128;
    std::size_t n_theta = 64;
    std::size_t per_panel = 4;
    /// Allowed change, relative to the integral of |integrand|, when both counts double.
    double tolerance = 1e-8;
};

/// (1/ln R) * integral over 1 < |y| < R of sigma(w^m):e(w^l).
///
/// m, l in {1, 2, 3}; index 3 is the scalar field w with integrand |grad w|^2.
/// Mixed pairs (3, 1..2) vanish since the fields act in orthogonal directions.
double annulus_energy(int m, int l, double R, const LameCoefficients& base, const AnnulusQuadrature& q = {});

struct LogFit {
    double limit = 0.0;
    double slope = 0.0;
};

/// Least-squares fit value(R) = limit + slope / ln R; needs two distinct radii.
LogFit fit_log_limit(std::span<const double> radii, std::span<const double> values);

/// 1 for R <= s/2, -4/(3 s^2)(R^2 - s^2) on [s/2, s], 0 beyond.
double truncation_phi(double R, double s);

struct CorrectorSample {
    Vec3 value{};
    /// grad[i][j] = d z_i / d x_j (the x3 column vanishes).
    Mat3 grad{};
};

/// Truncated corrector z^m at x: e_m on the fibers, phi (e_m - w_eps) inside the
/// truncation discs, zero elsewhere. The cell fields use kappa of `base`.
Vec3 corrector_z(const Vec3& x, int m, const FiberLayout& layout, const LameCoefficients& base);
CorrectorSample corrector_z_sample(const Vec3& x, int m, const FiberLayout& layout, const LameCoefficients& base);

/// Limit of integral sigma(z^m):e(z^l) over a body of the given volume.
double predicted_corrector_energy(int m, int l, double gamma, const LameCoefficients& base, double volume);

/// Polar quadrature of integral sigma(z^m):e(z^l) over the truncation annuli,
/// summed over the fibers and multiplied by the cylinder length.
double corrector_energy_numeric(int m, int l, const FiberLayout& layout, const LameCoefficients& base, double length,
                                const AnnulusQuadrature& q = {});

} // namespace reinforce
