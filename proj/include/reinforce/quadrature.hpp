#pragma once

#include <cstddef>
#include <vector>

namespace reinforce {

struct QuadratureRule {
    std::vector<double> points;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [lo, hi].
QuadratureRule gauss_legendre(std::size_t n, double lo = -1.0, double hi = 1.0);

/// Composite rule: `panels` equal panels on [lo, hi], `per_panel` Gauss points each.
QuadratureRule composite_gauss(std::size_t panels, std::size_t per_panel, double lo, double hi);

/// Sum in fixed pairwise order; the result depends only on the input sequence.
double pairwise_sum(const double* values, std::size_t n);

} // namespace reinforce
