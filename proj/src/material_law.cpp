#include "reinforce/material_law.hpp"

#include "reinforce/errors.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace reinforce {

void LameCoefficients::require_valid(const char* what) const
{
    if (!valid())
        throw PreconditionError(fmt::format("{}: Lame pair (lambda={}, mu={}) needs mu > 0 and lambda >= 0", what,
                                            lambda, mu));
}

std::string to_string(RegimeTag tag)
{
    switch (tag) {
    case RegimeTag::Critical: return "critical";
    case RegimeTag::Soft: return "soft";
    case RegimeTag::StiffGammaInfinite: return "stiff";
    case RegimeTag::Flexion: return "flexion";
    case RegimeTag::GammaZeroConjectural: return "gamma-zero";
    case RegimeTag::Unsupported: return "unsupported";
    }
    return "unsupported";
}

RegimeTag parse_regime_tag(const std::string& name)
{
    for (auto tag : {RegimeTag::Critical, RegimeTag::Soft, RegimeTag::StiffGammaInfinite, RegimeTag::Flexion,
                     RegimeTag::GammaZeroConjectural, RegimeTag::Unsupported}) {
        if (to_string(tag) == name)
            return tag;
    }
    throw ConfigError(fmt::format("unknown regime '{}'", name));
}

double kappa(const LameCoefficients& base)
{
    base.require_valid("kappa");
    return (base.lambda + 3.0 * base.mu) / (base.lambda + base.mu);
}

DiagonalMatrix3 coupling_matrix(const LameCoefficients& base)
{
    const double k = kappa(base);
    const double in_plane = base.mu * (1.0 + k) / k;
    return DiagonalMatrix3{{in_plane, in_plane, base.mu}};
}

double young_effective(double lambda_o, double mu_o)
{
    if (!(mu_o > 0.0) || !(lambda_o >= 0.0))
        throw PreconditionError(fmt::format("young modulus needs mu > 0 and lambda >= 0 (got {}, {})", lambda_o, mu_o));
    return mu_o * (3.0 * lambda_o + 2.0 * mu_o) / (lambda_o + mu_o);
}

double flexion_young(double lambda_1, double mu_1) { return young_effective(lambda_1, mu_1); }

double gamma_of(double epsilon, double radius)
{
    if (!(epsilon > 0.0))
        throw DomainError(fmt::format("gamma_of: epsilon must be positive (got {})", epsilon));
    if (!(radius > 0.0) || !(radius < 1.0))
        throw DomainError(fmt::format("gamma_of: radius must lie in (0, 1) (got {})", radius));
    return -1.0 / (epsilon * epsilon * std::log(radius));
}

TransverseCoefficients transverse_coefficients(double epsilon, double radius, const LameCoefficients& lame_eps)
{
    if (!(epsilon > 0.0))
        throw DomainError(fmt::format("transverse_coefficients: epsilon must be positive (got {})", epsilon));
    if (!(radius > 0.0) || !(radius < 1.0))
        throw DomainError(fmt::format("transverse_coefficients: radius must lie in (0, 1) (got {})", radius));
    lame_eps.require_valid("transverse_coefficients");

    TransverseCoefficients out;
    out.gamma_star = -1.0 / (epsilon * std::log(radius));
    const double scale = radius * radius / epsilon;
    out.lambda_o_star = lame_eps.lambda * scale;
    out.mu_o_star = lame_eps.mu * scale;
    out.E_o_star = young_effective(out.lambda_o_star, out.mu_o_star);
    return out;
}

LameCoefficients fiber_lame_for(RegimeTag tag, double epsilon, double radius, const LameCoefficients& targets)
{
    if (!(radius > 0.0) || !(radius < epsilon / 2.0))
        throw PreconditionError(
            fmt::format("fiber_lame_for: need 0 < r < eps/2 (eps={}, r={})", epsilon, radius));
    double scale = 0.0;
    switch (tag) {
    case RegimeTag::Critical: scale = epsilon * epsilon / (radius * radius); break;
    case RegimeTag::Flexion: scale = epsilon * epsilon / std::pow(radius, 4); break;
    default: throw RegimeError(fmt::format("fiber_lame_for: no inverse scaling for regime '{}'", to_string(tag)));
    }
    return LameCoefficients{targets.lambda * scale, targets.mu * scale};
}

double extrapolate_to_zero(double eps_a, double value_a, double eps_b, double value_b)
{
    if (eps_a == eps_b)
        throw PreconditionError("extrapolate_to_zero: samples at identical epsilon");
    return (value_a * eps_b - value_b * eps_a) / (eps_b - eps_a);
}

namespace {

enum class LimitKind { Zero, Finite, Infinite };

struct LimitEstimate {
    LimitKind kind = LimitKind::Finite;
    double value = 0.0;
};

const char* kind_name(LimitKind k)
{
    switch (k) {
    case LimitKind::Zero: return "zero";
    case LimitKind::Finite: return "finite";
    case LimitKind::Infinite: return "infinite";
    }
    return "?";
}

LimitEstimate estimate_limit(const char* name, std::span<const double> eps, const std::vector<double>& values,
                             const LimitTolerances& tol, std::vector<std::string>& diagnostics)
{
    double scale = 0.0;
    for (double v : values) {
        if (std::isnan(v))
            throw ClassificationError(fmt::format("{} is NaN for some sample", name), diagnostics);
        if (std::isfinite(v))
            scale = std::max(scale, std::abs(v));
    }

    const std::size_t n = values.size();
    LimitEstimate est;
    if (!std::isfinite(values[n - 1]) || !std::isfinite(values[n - 2])) {
        est.kind = LimitKind::Infinite;
        est.value = std::numeric_limits<double>::infinity();
    } else {
        // Monotone trend required; stalls within the zero tolerance are allowed.
        const double slack = tol.zero_relative * scale;
        bool up = false;
        bool down = false;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double d = values[i + 1] - values[i];
            up = up || d > slack;
            down = down || d < -slack;
        }
        if (up && down) {
            diagnostics.push_back(fmt::format("{}: samples {} are not monotone", name, values));
            throw ClassificationError(fmt::format("inconsistent family: {} is not monotone over the samples", name),
                                      diagnostics);
        }
        const double a = extrapolate_to_zero(eps[n - 1], values[n - 1], eps[n - 2], values[n - 2]);
        if (std::abs(a) > tol.infinity_threshold || std::abs(values[n - 1]) > tol.infinity_threshold) {
            est.kind = LimitKind::Infinite;
            est.value = std::numeric_limits<double>::infinity();
        } else if (a <= tol.zero_relative * scale) {
            est.kind = LimitKind::Zero;
            est.value = 0.0;
        } else {
            est.kind = LimitKind::Finite;
            est.value = a;
        }
    }
    diagnostics.push_back(fmt::format("{}: samples {} -> {} ({})", name, values, est.value, kind_name(est.kind)));
    return est;
}

} // namespace

Regime classify_regime(const ScalingFamily& family, std::span<const double> epsilon_samples,
                       const LimitTolerances& tol)
{
    if (epsilon_samples.size() < 2)
        throw PreconditionError("classify_regime: need at least two epsilon samples");
    for (std::size_t i = 0; i < epsilon_samples.size(); ++i) {
        if (!(epsilon_samples[i] > 0.0))
            throw PreconditionError("classify_regime: epsilon samples must be positive");
        if (i > 0 && !(epsilon_samples[i] < epsilon_samples[i - 1]))
            throw PreconditionError("classify_regime: epsilon samples must be strictly decreasing");
    }
    if (!family.radius_rule || !family.lame_rule)
        throw PreconditionError("classify_regime: family has no radius or Lame rule");

    const std::size_t n = epsilon_samples.size();
    std::vector<double> gamma(n), lambda_o(n), mu_o(n), lambda_1(n), mu_1(n);
    std::vector<std::string> diagnostics;
    for (std::size_t i = 0; i < n; ++i) {
        const double eps = epsilon_samples[i];
        const double r = family.radius_rule(eps);
        if (!(r > 0.0) || !(r < eps / 2.0)) {
            diagnostics.push_back(fmt::format("eps={}: radius {} outside (0, eps/2)", eps, r));
            throw ClassificationError("family radius outside (0, eps/2)", diagnostics);
        }
        const LameCoefficients lame = family.lame_rule(eps);
        if (!lame.valid()) {
            diagnostics.push_back(fmt::format("eps={}: Lame pair ({}, {}) not admissible", eps, lame.lambda, lame.mu));
            throw ClassificationError("family Lame pair not admissible", diagnostics);
        }
        const double e2 = eps * eps;
        gamma[i] = gamma_of(eps, r);
        lambda_o[i] = lame.lambda * r * r / e2;
        mu_o[i] = lame.mu * r * r / e2;
        lambda_1[i] = lame.lambda * std::pow(r, 4) / e2;
        mu_1[i] = lame.mu * std::pow(r, 4) / e2;
    }

    const auto g = estimate_limit("gamma", epsilon_samples, gamma, tol, diagnostics);
    const auto lo = estimate_limit("lambda_o", epsilon_samples, lambda_o, tol, diagnostics);
    const auto mo = estimate_limit("mu_o", epsilon_samples, mu_o, tol, diagnostics);
    const auto l1 = estimate_limit("lambda_1", epsilon_samples, lambda_1, tol, diagnostics);
    const auto m1 = estimate_limit("mu_1", epsilon_samples, mu_1, tol, diagnostics);

    Regime out;
    out.gamma = g.value;
    out.lambda_o = lo.value;
    out.mu_o = mo.value;
    out.lambda_1 = l1.value;
    out.mu_1 = m1.value;

    const bool o_bounded = lo.kind != LimitKind::Infinite && mo.kind != LimitKind::Infinite;
    const bool o_critical = o_bounded && mo.kind == LimitKind::Finite;
    const bool o_soft = lo.kind == LimitKind::Zero && mo.kind == LimitKind::Zero;
    const bool o_infinite = lo.kind == LimitKind::Infinite && mo.kind == LimitKind::Infinite;
    const bool flexion_pair = l1.kind == LimitKind::Finite && m1.kind == LimitKind::Finite;

    switch (g.kind) {
    case LimitKind::Zero:
        out.tag = o_critical ? RegimeTag::GammaZeroConjectural : RegimeTag::Unsupported;
        break;
    case LimitKind::Finite:
        if (o_critical)
            out.tag = RegimeTag::Critical;
        else if (o_soft)
            out.tag = RegimeTag::Soft;
        else if (o_infinite && flexion_pair)
            out.tag = RegimeTag::Flexion;
        else
            out.tag = RegimeTag::Unsupported;
        break;
    case LimitKind::Infinite:
        if (o_bounded)
            out.tag = RegimeTag::StiffGammaInfinite;
        else if (o_infinite && flexion_pair)
            out.tag = RegimeTag::Flexion;
        else
            out.tag = RegimeTag::Unsupported;
        break;
    }
    diagnostics.push_back("regime: " + to_string(out.tag));
    out.diagnostics = std::move(diagnostics);
    return out;
}

EffectiveCoefficients effective_coefficients(const LameCoefficients& base, const Regime& regime)
{
    EffectiveCoefficients eff;
    eff.kappa = kappa(base);
    eff.A = coupling_matrix(base);
    eff.gamma = regime.gamma;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    switch (regime.tag) {
    case RegimeTag::Critical:
    case RegimeTag::GammaZeroConjectural:
        eff.E_o = young_effective(regime.lambda_o, regime.mu_o);
        break;
    case RegimeTag::StiffGammaInfinite:
        eff.E_o = regime.mu_o > 0.0 ? young_effective(regime.lambda_o, regime.mu_o) : 0.0;
        break;
    case RegimeTag::Soft:
        eff.E_o = 0.0;
        break;
    case RegimeTag::Flexion:
        eff.E_o = nan;
        eff.E_1 = flexion_young(regime.lambda_1, regime.mu_1);
        break;
    case RegimeTag::Unsupported:
        eff.E_o = nan;
        break;
    }
    return eff;
}

} // namespace reinforce
