#pragma once

// Element kernels shared by the limit and fine-scale solvers.

#include "reinforce/grid.hpp"
#include "reinforce/limit_solver.hpp"
#include "reinforce/types.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace reinforce::detail {

/// 24 x 24 elastic element matrices on a uniform grid: K = lambda K_lambda + mu K_mu,
/// local dof 3 a + c, so that u' K u is the 2x2x2 Gauss value of integral sigma(u):e(u).
struct ElasticKernels {
    HexRule rule;
    std::vector<double> K_lambda;
    std::vector<double> K_mu;
};

ElasticKernels elastic_kernels(const StructuredGrid& grid);

/// Adds lambda K_lambda + mu K_mu into components 0..2 of an element matrix with `block` dofs per node.
void add_elastic(const ElasticKernels& k, double lambda, double mu, int block, std::vector<double>& Ke);

/// Displacement gradient grad[i][j] = d u_i / d x_j at a rule point.
Mat3 displacement_gradient(const std::array<std::size_t, 8>& nodes, const std::array<Vec3, 8>& dN,
                           const std::vector<double>& u, int stride);

/// Load vector with f in components 0..2 of each `block`-sized node block,
/// including the traction on the faces other than x3 = 0.
std::vector<double> assemble_load(const StructuredGrid& grid, int block, const BodyForce& f);

/// Integral of f.u (and the traction work) with the same quadrature as assemble_load.
double load_work(const StructuredGrid& grid, const std::vector<double>& u, int stride, const BodyForce& f);

/// Dof mask fixing components `fixed_components` of every node on x3 = 0.
std::vector<char> clamped_mask(const StructuredGrid& grid, int block, const std::vector<int>& fixed_components);

/// Sum of element_term(i, j, k) over all elements, reproducible for any thread count.
double sum_over_elements(const StructuredGrid& grid, const std::function<double(int, int, int)>& element_term);

} // namespace reinforce::detail
