#pragma once

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace reinforce {

/// Isotropic Lame pair. Valid when mu > 0 and lambda >= 0.
struct LameCoefficients {
    double lambda = 0.0;
    double mu = 1.0;

    bool valid() const noexcept { return mu > 0.0 && lambda >= 0.0; }
    /// Throws PreconditionError naming `what` if the pair is not admissible.
    void require_valid(const char* what) const;
};

/// Diagonal 3x3 matrix stored by its diagonal.
struct DiagonalMatrix3 {
    std::array<double, 3> diag{};

    double operator()(int i) const { return diag[static_cast<std::size_t>(i)]; }
};

/// Fiber radius and fiber stiffness as functions of the period.
struct ScalingFamily {
    std::function<double(double)> radius_rule;
    std::function<LameCoefficients(double)> lame_rule;
};

/// Constants entering the homogenized energies.
///
/// Entries that do not apply to a regime are NaN (for example E_1 in the
/// critical regime); gamma may be +infinity in the stiff regimes.
struct EffectiveCoefficients {
    double gamma = 0.0;
    double kappa = 0.0;
    DiagonalMatrix3 A{};
    double E_o = 0.0;
    double E_1 = std::numeric_limits<double>::quiet_NaN();
    double gamma_star = std::numeric_limits<double>::quiet_NaN();
    double lambda_o_star = std::numeric_limits<double>::quiet_NaN();
    double mu_o_star = std::numeric_limits<double>::quiet_NaN();
    double E_o_star = std::numeric_limits<double>::quiet_NaN();
};

enum class RegimeTag { Critical, Soft, StiffGammaInfinite, Flexion, GammaZeroConjectural, Unsupported };

std::string to_string(RegimeTag tag);
/// Accepts the lower-case names used in scenario files ("critical", "soft",
/// "stiff", "flexion", "gamma-zero"); throws ConfigError otherwise.
RegimeTag parse_regime_tag(const std::string& name);

/// Result of classifying a scaling family.
struct Regime {
    RegimeTag tag = RegimeTag::Unsupported;
    double gamma = 0.0;
    double lambda_o = 0.0;
    double mu_o = 0.0;
    double lambda_1 = 0.0;
    double mu_1 = 0.0;
    std::vector<std::string> diagnostics;
};

/// Per-period transverse-fiber constants and the resulting Young modulus.
struct TransverseCoefficients {
    double gamma_star = 0.0;
    double lambda_o_star = 0.0;
    double mu_o_star = 0.0;
    double E_o_star = 0.0;
};

/// Thresholds for reading limits off finite samples.
struct LimitTolerances {
    double zero_relative = 1e-6;
    double infinity_threshold = 1e6;
};

double kappa(const LameCoefficients& base);
DiagonalMatrix3 coupling_matrix(const LameCoefficients& base);

/// Young modulus mu(3 lambda + 2 mu)/(lambda + mu) of a limit Lame pair.
double young_effective(double lambda_o, double mu_o);
double flexion_young(double lambda_1, double mu_1);

/// -1/(eps^2 ln r). Requires 0 < r < 1 and eps > 0.
double gamma_of(double epsilon, double radius);

TransverseCoefficients transverse_coefficients(double epsilon, double radius, const LameCoefficients& lame_eps);

/// Fiber Lame pair realizing the given limit pair at period eps and radius r.
///
/// Critical: (lambda_o, mu_o) * eps^2 / r^2. Flexion: (lambda_1, mu_1) * eps^2 / r^4.
LameCoefficients fiber_lame_for(RegimeTag tag, double epsilon, double radius, const LameCoefficients& targets);

/// Extrapolates the limits of the family over decreasing samples and assigns a regime.
Regime classify_regime(const ScalingFamily& family, std::span<const double> epsilon_samples,
                       const LimitTolerances& tol = {});

/// Assembles the coefficient set of a regime over a base (matrix) material.
EffectiveCoefficients effective_coefficients(const LameCoefficients& base, const Regime& regime);

/// Linear extrapolation a + b*eps through two samples, evaluated at eps = 0.
double extrapolate_to_zero(double eps_a, double value_a, double eps_b, double value_b);

} // namespace reinforce
