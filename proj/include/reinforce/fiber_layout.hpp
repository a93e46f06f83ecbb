#pragma once

#include "reinforce/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace reinforce {

/// Periodic array of fibers parallel to x3 inside the cross-section (0,a) x (0,b).
///
/// Centers sit at (k1 eps, k2 eps) for every cell (k eps) + (-eps/2, eps/2)^2
/// contained in the cross-section, k1 = 1..n1, k2 = 1..n2.
struct FiberLayout {
    double epsilon = 0.0;
    double radius = 0.0;
    /// Outer radius of the truncation support around each fiber.
    double support = 0.0;
    double a = 0.0;
    double b = 0.0;
    int n1 = 0;
    int n2 = 0;
    std::vector<Vec2> centers;

    std::size_t n_fibers() const noexcept { return centers.size(); }
    /// pi r^2 N / |omega|
    double volume_fraction() const noexcept;
};

/// exp(-eps^(-1/2)) clamped to [2r, eps/2]; the lower bound wins if they cross.
double default_support(double epsilon, double radius);

/// Throws PreconditionError unless 0 < r < eps/2, EmptyLayoutError if no cell fits.
FiberLayout build_layout(double a, double b, double epsilon, double radius);
FiberLayout build_layout(double a, double b, double epsilon, double radius, double support);

struct FiberHit {
    std::size_t index = 0;
    /// In-plane offset x - center.
    Vec2 offset{};
    double distance = 0.0;
};

/// Closest fiber axis to the in-plane point (x1, x2).
FiberHit nearest_fiber(const FiberLayout& layout, double x1, double x2);

/// Truncation supports of different fibers are disjoint and stay inside the cross-section.
bool supports_separated(const FiberLayout& layout);

} // namespace reinforce
