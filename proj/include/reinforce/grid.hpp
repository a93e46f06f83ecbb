#pragma once

#include "reinforce/types.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace reinforce {

/// Uniform box grid of (0,a) x (0,b) x (0,L) with trilinear hexahedra.
///
/// Node (i,j,k) has index i + nx (j + ny k). The face x3 = 0 is the clamped
/// end, x3 = L the free end, the remaining faces the lateral boundary.
struct StructuredGrid {
    double a = 1.0;
    double b = 1.0;
    double L = 1.0;
    int nx = 2;
    int ny = 2;
    int nz = 2;
    double hx = 1.0;
    double hy = 1.0;
    double hz = 1.0;

    /// Grid with ex x ey x ez elements; each count must be at least 1.
    static StructuredGrid box(double a, double b, double L, int ex, int ey, int ez);

    int ex() const noexcept { return nx - 1; }
    int ey() const noexcept { return ny - 1; }
    int ez() const noexcept { return nz - 1; }
    std::size_t n_nodes() const noexcept
    {
        return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
    }
    std::size_t n_elements() const noexcept
    {
        return static_cast<std::size_t>(ex()) * static_cast<std::size_t>(ey()) * static_cast<std::size_t>(ez());
    }
    double volume() const noexcept { return a * b * L; }
    double element_volume() const noexcept { return hx * hy * hz; }

    std::size_t node(int i, int j, int k) const noexcept
    {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(nx) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny) * static_cast<std::size_t>(k));
    }
    std::array<int, 3> node_ijk(std::size_t n) const noexcept;
    Vec3 coord(std::size_t n) const noexcept;
    Vec3 coord(int i, int j, int k) const noexcept { return {i * hx, j * hy, k * hz}; }

    std::size_t element(int i, int j, int k) const noexcept
    {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(ex()) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(ey()) * static_cast<std::size_t>(k));
    }
    std::array<int, 3> element_ijk(std::size_t e) const noexcept;
    /// Local node l = bx + 2 by + 4 bz sits at corner (i + bx, j + by, k + bz).
    std::array<std::size_t, 8> element_nodes(int i, int j, int k) const noexcept;
    Vec3 element_centroid(int i, int j, int k) const noexcept
    {
        return {(i + 0.5) * hx, (j + 0.5) * hy, (k + 0.5) * hz};
    }
};

/// Tensor Gauss rule on one element with trilinear shape data.
///
/// Offsets are relative to the element origin; the rule is the same for
/// every element of a uniform grid.
struct HexRule {
    std::vector<Vec3> offset;
    std::vector<double> weight;
    std::vector<std::array<double, 8>> N;
    std::vector<std::array<Vec3, 8>> dN;

    std::size_t size() const noexcept { return weight.size(); }
};

HexRule hex_rule(const StructuredGrid& grid, int qx, int qy, int qz);

/// Trilinear interpolation of a nodal field with `stride` components per node.
double interpolate(const StructuredGrid& grid, const std::vector<double>& field, int stride, int component,
                   const Vec3& x);

} // namespace reinforce
