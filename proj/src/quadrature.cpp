#include "reinforce/quadrature.hpp"

#include "reinforce/errors.hpp"
#include "reinforce/types.hpp"

#include <cmath>

namespace reinforce {

QuadratureRule gauss_legendre(std::size_t n, double lo, double hi)
{
    if (n == 0)
        throw PreconditionError("gauss_legendre: need at least one point");
    if (n == 1)
        return QuadratureRule{{0.5 * (lo + hi)}, {hi - lo}};
    QuadratureRule rule;
    rule.points.resize(n);
    rule.weights.resize(n);
    const unsigned nu = static_cast<unsigned>(n);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        // Newton from the Chebyshev-like initial guess.
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        auto derivative = [&](double t) {
            return static_cast<double>(n) * (t * std::legendre(nu, t) - std::legendre(nu - 1, t)) / (t * t - 1.0);
        };
        for (int it = 0; it < 100; ++it) {
            const double dx = std::legendre(nu, x) / derivative(x);
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        const double dp = derivative(x);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.points[i] = mid - half * x;
        rule.weights[i] = half * w;
        rule.points[n - 1 - i] = mid + half * x;
        rule.weights[n - 1 - i] = half * w;
    }
    if (n % 2 == 1)
        rule.points[n / 2] = mid;
    return rule;
}

QuadratureRule composite_gauss(std::size_t panels, std::size_t per_panel, double lo, double hi)
{
    if (panels == 0)
        throw PreconditionError("composite_gauss: need at least one panel");
    const QuadratureRule ref = gauss_legendre(per_panel);
    QuadratureRule rule;
    rule.points.reserve(panels * per_panel);
    rule.weights.reserve(panels * per_panel);
    const double h = (hi - lo) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double a = lo + h * static_cast<double>(p);
        for (std::size_t q = 0; q < per_panel; ++q) {
            rule.points.push_back(a + 0.5 * h * (ref.points[q] + 1.0));
            rule.weights.push_back(0.5 * h * ref.weights[q]);
        }
    }
    return rule;
}

double pairwise_sum(const double* values, std::size_t n)
{
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            s += values[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(values, h) + pairwise_sum(values + h, n - h);
}

} // namespace reinforce
