#pragma once

#include "reinforce/fiber_layout.hpp"
#include "reinforce/grid.hpp"
#include "reinforce/limit_solver.hpp"
#include "reinforce/material_law.hpp"
#include "reinforce/sparse.hpp"

#include <functional>
#include <string>
#include <vector>

namespace reinforce {

/// Mesh sizing for the heterogeneous problem. The in-plane element count is
/// chosen from the fiber radius; nz is fixed.
struct FineGridOptions {
    double elements_per_radius = 2.0;
    int min_elements_per_side = 8;
    int max_elements_per_side = 256;
    int nz = 8;
};

/// Grid of (0,a) x (0,b) x (0,L) resolving the fiber radius of `layout`.
/// Throws ResolutionError when the side cap leaves less than one element per radius.
StructuredGrid fine_grid(const FiberLayout& layout, double L, const FineGridOptions& options = {});

/// Fiber radius measured in the larger in-plane element size.
double elements_per_radius(const StructuredGrid& grid, const FiberLayout& layout);

/// Per-element material tags: an element is fiber when its centroid lies
/// within the radius of a fiber axis.
struct CompositeAssignment {
    std::vector<char> fiber;
    LameCoefficients matrix;
    LameCoefficients fiber_lame;
    std::size_t n_fiber_elements = 0;

    double fiber_volume(const StructuredGrid& grid) const noexcept
    {
        return static_cast<double>(n_fiber_elements) * grid.element_volume();
    }
    /// Voxelized fiber volume over |Omega|.
    double volume_fraction(const StructuredGrid& grid) const noexcept { return fiber_volume(grid) / grid.volume(); }
};

CompositeAssignment assign_materials(const StructuredGrid& grid, const FiberLayout& layout,
                                     const LameCoefficients& matrix, const LameCoefficients& fiber);

/// integral sigma_eps(u):e(u) with the element-wise Lame coefficients.
double fine_energy(const std::vector<double>& u, const StructuredGrid& grid, const CompositeAssignment& materials);

struct FineSolution {
    std::vector<double> u;
    CompositeAssignment materials;
    /// F_eps(u_eps).
    double energy = 0.0;
    double load_work = 0.0;
    SolveStats stats;
    double residual_norm = 0.0;
    std::vector<std::string> warnings;
};

/// Throws ResolutionError below one element per radius; adds a warning below two.
std::vector<std::string> check_resolution(const StructuredGrid& grid, const FiberLayout& layout);

/// Minimizer of F_eps(u) - 2 integral f.u with u = 0 on x3 = 0 and traction free elsewhere.
FineSolution solve_fine(const StructuredGrid& grid, const FiberLayout& layout, const LameCoefficients& matrix,
                        const LameCoefficients& fiber, const BodyForce& f, const SolverOptions& options = {});

struct Restriction {
    /// (|Omega| / |T_eps|) integral over T_eps of u phi.
    Vec3 value{};
    /// (1 / |T_eps|) integral over T_eps of u.
    Vec3 fiber_average{};
};

Restriction rescaled_restriction(const std::vector<double>& u, const StructuredGrid& grid,
                                 const CompositeAssignment& materials, const std::function<double(const Vec3&)>& phi);

/// Closed-form vector field with its gradient, grad[i][j] = d f_i / d x_j.
struct SmoothField {
    std::function<Vec3(const Vec3&)> value;
    std::function<Mat3(const Vec3&)> gradient;
};

/// The fiber displacement R_eps(v) at x, built from v on the nearest fiber axis.
Vec3 fiber_recovery(const SmoothField& v, const Vec3& x, const FiberLayout& layout, const LameCoefficients& fiber);

/// Cut-off in x3: 0 below eps, 1 above 2 eps, linear in between.
double end_ramp(double x3, double epsilon);

/// Nodal values of u - psi sum_m z^m (u_m - R_eps(v)_m).
std::vector<double> recovery_field(const SmoothField& u, const SmoothField& v, const StructuredGrid& grid,
                                   const FiberLayout& layout, const LameCoefficients& base,
                                   const LameCoefficients& fiber);

/// F_eps of the interpolated recovery field.
double recovery_energy(const SmoothField& u, const SmoothField& v, const StructuredGrid& grid,
                       const FiberLayout& layout, const LameCoefficients& base, const LameCoefficients& fiber);

/// (1/|T_eps|) integral_T u^2 over (integral_Omega |grad u|^2 - eps^2 ln r + eps^2); zero for u = 0.
double korn_ratio(const std::vector<double>& u, const StructuredGrid& grid, const CompositeAssignment& materials,
                  const FiberLayout& layout);

/// Nodal interpolant of a closed-form field (3 components per node).
std::vector<double> interpolate_field(const SmoothField& f, const StructuredGrid& grid);

} // namespace reinforce
