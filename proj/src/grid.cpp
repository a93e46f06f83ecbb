#include "reinforce/grid.hpp"

#include "reinforce/errors.hpp"
#include "reinforce/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace reinforce {

StructuredGrid StructuredGrid::box(double a, double b, double L, int ex, int ey, int ez)
{
    if (!(a > 0.0) || !(b > 0.0) || !(L > 0.0))
        throw PreconditionError(fmt::format("grid: box ({}, {}, {}) must have positive sides", a, b, L));
    if (ex < 1 || ey < 1 || ez < 1)
        throw PreconditionError(fmt::format("grid: element counts ({}, {}, {}) must be positive", ex, ey, ez));
    StructuredGrid g;
    g.a = a;
    g.b = b;
    g.L = L;
    g.nx = ex + 1;
    g.ny = ey + 1;
    g.nz = ez + 1;
    g.hx = a / ex;
    g.hy = b / ey;
    g.hz = L / ez;
    return g;
}

std::array<int, 3> StructuredGrid::node_ijk(std::size_t n) const noexcept
{
    const auto sx = static_cast<std::size_t>(nx);
    const auto sy = static_cast<std::size_t>(ny);
    return {static_cast<int>(n % sx), static_cast<int>((n / sx) % sy), static_cast<int>(n / (sx * sy))};
}

Vec3 StructuredGrid::coord(std::size_t n) const noexcept
{
    const auto [i, j, k] = node_ijk(n);
    return coord(i, j, k);
}

std::array<int, 3> StructuredGrid::element_ijk(std::size_t e) const noexcept
{
    const auto sx = static_cast<std::size_t>(ex());
    const auto sy = static_cast<std::size_t>(ey());
    return {static_cast<int>(e % sx), static_cast<int>((e / sx) % sy), static_cast<int>(e / (sx * sy))};
}

std::array<std::size_t, 8> StructuredGrid::element_nodes(int i, int j, int k) const noexcept
{
    std::array<std::size_t, 8> out{};
    for (int l = 0; l < 8; ++l)
        out[static_cast<std::size_t>(l)] = node(i + (l & 1), j + ((l >> 1) & 1), k + ((l >> 2) & 1));
    return out;
}

HexRule hex_rule(const StructuredGrid& grid, int qx, int qy, int qz)
{
    const QuadratureRule rx = gauss_legendre(static_cast<std::size_t>(qx), 0.0, 1.0);
    const QuadratureRule ry = gauss_legendre(static_cast<std::size_t>(qy), 0.0, 1.0);
    const QuadratureRule rz = gauss_legendre(static_cast<std::size_t>(qz), 0.0, 1.0);
    const double h[3] = {grid.hx, grid.hy, grid.hz};
    HexRule rule;
    for (std::size_t c = 0; c < rz.points.size(); ++c) {
        for (std::size_t b = 0; b < ry.points.size(); ++b) {
            for (std::size_t a = 0; a < rx.points.size(); ++a) {
                const double xi[3] = {rx.points[a], ry.points[b], rz.points[c]};
                rule.offset.push_back({xi[0] * h[0], xi[1] * h[1], xi[2] * h[2]});
                rule.weight.push_back(rx.weights[a] * ry.weights[b] * rz.weights[c] * grid.element_volume());
                std::array<double, 8> N{};
                std::array<Vec3, 8> dN{};
                for (int l = 0; l < 8; ++l) {
                    double f[3], df[3];
                    for (int d = 0; d < 3; ++d) {
                        const bool hi = (l >> d) & 1;
                        f[d] = hi ? xi[d] : 1.0 - xi[d];
                        df[d] = (hi ? 1.0 : -1.0) / h[d];
                    }
                    N[static_cast<std::size_t>(l)] = f[0] * f[1] * f[2];
                    dN[static_cast<std::size_t>(l)] = {df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]};
                }
                rule.N.push_back(N);
                rule.dN.push_back(dN);
            }
        }
    }
    return rule;
}

double interpolate(const StructuredGrid& grid, const std::vector<double>& field, int stride, int component,
                   const Vec3& x)
{
    const double h[3] = {grid.hx, grid.hy, grid.hz};
    const int n[3] = {grid.nx, grid.ny, grid.nz};
    int idx[3];
    double t[3];
    for (int d = 0; d < 3; ++d) {
        const double s = x[static_cast<std::size_t>(d)] / h[d];
        idx[d] = std::clamp(static_cast<int>(std::floor(s)), 0, n[d] - 2);
        t[d] = s - idx[d];
    }
    double v = 0.0;
    for (int l = 0; l < 8; ++l) {
        double w = 1.0;
        for (int d = 0; d < 3; ++d)
            w *= ((l >> d) & 1) ? t[d] : 1.0 - t[d];
        const std::size_t node = grid.node(idx[0] + (l & 1), idx[1] + ((l >> 1) & 1), idx[2] + ((l >> 2) & 1));
        v += w * field[node * static_cast<std::size_t>(stride) + static_cast<std::size_t>(component)];
    }
    return v;
}

} // namespace reinforce
