#include "reinforce/fiber_layout.hpp"

#include "reinforce/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace reinforce {

double FiberLayout::volume_fraction() const noexcept
{
    return pi * radius * radius * static_cast<double>(centers.size()) / (a * b);
}

double default_support(double epsilon, double radius)
{
    const double s = std::min(std::exp(-1.0 / std::sqrt(epsilon)), epsilon / 2.0);
    return std::max(2.0 * radius, s);
}

FiberLayout build_layout(double a, double b, double epsilon, double radius)
{
    return build_layout(a, b, epsilon, radius, default_support(epsilon, radius));
}

FiberLayout build_layout(double a, double b, double epsilon, double radius, double support)
{
    if (!(a > 0.0) || !(b > 0.0))
        throw PreconditionError(fmt::format("build_layout: cross-section ({}, {}) must be positive", a, b));
    if (!(epsilon > 0.0) || !(radius > 0.0) || !(radius < epsilon / 2.0))
        throw PreconditionError(fmt::format("build_layout: need 0 < r < eps/2 (eps={}, r={})", epsilon, radius));
    if (!(support > radius))
        throw PreconditionError(fmt::format("build_layout: support {} must exceed the radius {}", support, radius));

    // Cell k eps +- eps/2 fits in (0, a) iff 1/2 <= k <= a/eps - 1/2.
    constexpr double slack = 1e-12;
    const int n1 = static_cast<int>(std::floor(a / epsilon - 0.5 + slack));
    const int n2 = static_cast<int>(std::floor(b / epsilon - 0.5 + slack));
    if (n1 < 1 || n2 < 1)
        throw EmptyLayoutError(
            fmt::format("no period cell of size {} fits in ({}, {}) x ({}, {})", epsilon, 0, a, 0, b));

    FiberLayout layout;
    layout.epsilon = epsilon;
    layout.radius = radius;
    layout.support = support;
    layout.a = a;
    layout.b = b;
    layout.n1 = n1;
    layout.n2 = n2;
    layout.centers.reserve(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2));
    for (int k2 = 1; k2 <= n2; ++k2)
        for (int k1 = 1; k1 <= n1; ++k1)
            layout.centers.push_back({epsilon * k1, epsilon * k2});
    return layout;
}

FiberHit nearest_fiber(const FiberLayout& layout, double x1, double x2)
{
    const int k1 = std::clamp(static_cast<int>(std::lround(x1 / layout.epsilon)), 1, layout.n1);
    const int k2 = std::clamp(static_cast<int>(std::lround(x2 / layout.epsilon)), 1, layout.n2);
    FiberHit hit;
    hit.index = static_cast<std::size_t>(k2 - 1) * static_cast<std::size_t>(layout.n1) + static_cast<std::size_t>(k1 - 1);
    const Vec2& c = layout.centers[hit.index];
    hit.offset = {x1 - c[0], x2 - c[1]};
    hit.distance = std::hypot(hit.offset[0], hit.offset[1]);
    return hit;
}

bool supports_separated(const FiberLayout& layout)
{
    const double s = layout.support;
    const bool single_fiber = layout.n1 == 1 && layout.n2 == 1;
    if (!single_fiber && s > layout.epsilon / 2.0 * (1.0 + 1e-12))
        return false;
    for (const Vec2& c : layout.centers) {
        if (c[0] - s < -1e-12 || c[0] + s > layout.a + 1e-12 || c[1] - s < -1e-12 || c[1] + s > layout.b + 1e-12)
            return false;
    }
    return true;
}

} // namespace reinforce
