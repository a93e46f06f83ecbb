#pragma once

#include <array>
#include <cmath>

namespace reinforce {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;
using Mat2 = std::array<std::array<double, 2>, 2>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline constexpr double pi = 3.141592653589793238462643383279502884;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Isotropic strain energy density sigma(e):e for a symmetric strain.
inline double isotropic_energy_density(const Mat3& e, double lambda, double mu)
{
    const double tr = e[0][0] + e[1][1] + e[2][2];
    double ee = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            ee += e[i][j] * e[i][j];
    return lambda * tr * tr + 2.0 * mu * ee;
}

/// Symmetric part of a displacement gradient (grad[i][j] = d u_i / d x_j).
inline Mat3 symmetric_part(const Mat3& grad)
{
    Mat3 e{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            e[i][j] = 0.5 * (grad[i][j] + grad[j][i]);
    return e;
}

} // namespace reinforce
