#pragma once

#include "reinforce/grid.hpp"
#include "reinforce/material_law.hpp"
#include "reinforce/sparse.hpp"
#include "reinforce/types.hpp"

#include <functional>
#include <vector>

namespace reinforce {

/// Volume load f, either closed form or a per-node table (interpolated
/// trilinearly), plus an optional traction on the faces other than x3 = 0.
struct BodyForce {
    std::function<Vec3(const Vec3&)> field;
    std::vector<Vec3> nodal;
    /// traction(x, outward normal); empty means traction free.
    std::function<Vec3(const Vec3&, const Vec3&)> traction;

    static BodyForce constant(const Vec3& f);
    bool is_zero() const noexcept { return !field && nodal.empty() && !traction; }
    Vec3 at(const StructuredGrid& grid, const Vec3& x) const;
};

/// Jacobian weight |grad theta^-1|(x1, x2) of a mapped fiber distribution and an
/// optional x3-dependent fiber Young modulus replacing E_o.
struct WeightField {
    std::function<double(double, double)> jacobian;
    std::function<double(double)> young_profile;

    bool is_unit() const noexcept { return !jacobian && !young_profile; }
};

/// Nodal unknowns of the limit problems.
///
/// u has three components per node, v3 one. In the flexion regime the fiber
/// displacement is carried by `flexion`: (v1, d3 v1, v2, d3 v2) per node and v3 = 0.
struct LimitState {
    std::vector<double> u;
    std::vector<double> v3;
    std::vector<double> flexion;

    static LimitState zero(const StructuredGrid& grid, bool with_flexion = false);
};

struct EnergyBreakdown {
    double elastic = 0.0;
    double coupling = 0.0;
    double fiber = 0.0;
    double total = 0.0;
};

struct LimitSolution {
    LimitState state;
    EnergyBreakdown energy;
    /// Integral of f.u plus the traction work.
    double load_work = 0.0;
    /// energy - 2 load_work, the minimized quantity.
    double objective = 0.0;
    SolveStats stats;
    /// |b - K x| / |b| over the free dofs.
    double residual_norm = 0.0;
};

/// integral sigma(u):e(u) + 2 pi gamma integral (v-u)' A (v-u) w + pi E_o integral e33(v)^2 w,
/// with v = (u1, u2, v3), by 2x2x2 Gauss quadrature.
EnergyBreakdown limit_energy(const LimitState& state, const StructuredGrid& grid, const LameCoefficients& base,
                             const EffectiveCoefficients& eff, const WeightField& weight = {});

/// integral sigma(u):e(u) + pi E_o integral e33(u)^2.
EnergyBreakdown stiff_energy(const LimitState& state, const StructuredGrid& grid, const LameCoefficients& base,
                             double E_o);

/// integral sigma(u):e(u) + 2 pi gamma integral (v-u)' A (v-u) + (pi E_1/4) integral (d33 v_a)^2 with v3 = 0.
EnergyBreakdown flexion_energy(const LimitState& state, const StructuredGrid& grid, const LameCoefficients& base,
                               double E_1, double gamma, const DiagonalMatrix3& A);

double load_work(const LimitState& state, const StructuredGrid& grid, const BodyForce& f);

/// Minimizer of limit_energy - 2 integral f.u with u = 0 and v3 = 0 on x3 = 0.
/// With gamma = 0 and E_o = 0 the fiber unknown drops out and v3 is reported equal to u3.
LimitSolution solve_limit(const StructuredGrid& grid, const LameCoefficients& base, const EffectiveCoefficients& eff,
                          const BodyForce& f, const WeightField& weight = {}, const SolverOptions& options = {});

/// Minimizer of stiff_energy - 2 integral f.u; v3 is reported equal to u3.
LimitSolution solve_stiff_limit(const StructuredGrid& grid, const LameCoefficients& base, double E_o,
                                const BodyForce& f, const SolverOptions& options = {});

/// Minimizer of flexion_energy - 2 integral f.u. The fiber deflections use
/// bilinear x cubic Hermite (in x3) elements; values vanish on x3 = 0, slopes are free.
LimitSolution solve_flexion_limit(const StructuredGrid& grid, const LameCoefficients& base, double E_1, double gamma,
                                  const DiagonalMatrix3& A, const BodyForce& f, const SolverOptions& options = {});

/// Fiber deflections minimizing flexion_energy for a prescribed matrix displacement u.
LimitState solve_flexion_fibers(const StructuredGrid& grid, double E_1, double gamma, const DiagonalMatrix3& A,
                                const std::vector<double>& u, const SolverOptions& options = {});

/// Homogeneous isotropic elasticity; used as the reference reduction.
LimitSolution solve_elasticity(const StructuredGrid& grid, const LameCoefficients& base, const BodyForce& f,
                               const SolverOptions& options = {});

struct ResidualNorms {
    double u_block = 0.0;
    double v_block = 0.0;
    double total = 0.0;
    double load_norm = 0.0;
};

/// Residual b - K x of the discrete Euler-Lagrange system of solve_limit at the given
/// state, split into the equilibrium (u) rows and the fiber (v3) rows.
ResidualNorms el_residual(const LimitState& state, const StructuredGrid& grid, const LameCoefficients& base,
                          const EffectiveCoefficients& eff, const BodyForce& f, const WeightField& weight = {});

} // namespace reinforce
