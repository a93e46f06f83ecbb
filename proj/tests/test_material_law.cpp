#include "doctest.h"

#include "reinforce/errors.hpp"
#include "reinforce/material_law.hpp"

#include <cmath>
#include <vector>

using namespace reinforce;

TEST_CASE("kappa and coupling matrix")
{
    CHECK(kappa({0.0, 1.0}) == 3.0);
    CHECK(kappa({1.0, 1.0}) == 2.0);
    CHECK(kappa({98.0, 1.0}) == doctest::Approx(101.0 / 99.0).epsilon(1e-15));
    CHECK(kappa({0.0, 7.5}) == 3.0);

    auto A = coupling_matrix({1.0, 1.0});
    CHECK(A(0) == doctest::Approx(1.5));
    CHECK(A(1) == doctest::Approx(1.5));
    CHECK(A(2) == 1.0);
    A = coupling_matrix({0.0, 1.0});
    CHECK(A(0) == doctest::Approx(4.0 / 3.0));
    A = coupling_matrix({0.0, 2.0});
    CHECK(A(0) == doctest::Approx(8.0 / 3.0));
    CHECK(A(2) == 2.0);

    double previous = 3.0 + 1e-9;
    for (double lam : {0.0, 0.1, 1.0, 10.0, 1e3}) {
        const LameCoefficients base{lam, 1.3};
        const double k = kappa(base);
        CHECK(k < previous);
        CHECK(k > 1.0);
        previous = k;
        const auto a = coupling_matrix(base);
        CHECK(a(0) * k == doctest::Approx(base.mu * (1.0 + k)).epsilon(1e-14));
        CHECK(a(0) / a(2) >= 4.0 / 3.0 - 1e-14);
        CHECK(a(0) / a(2) < 2.0);
    }
    CHECK_THROWS_AS(kappa({1.0, 0.0}), PreconditionError);
}

TEST_CASE("Young moduli")
{
    CHECK(young_effective(1.0, 1.0) == doctest::Approx(2.5));
    CHECK(young_effective(0.0, 1.0) == 2.0);
    CHECK(young_effective(3.0, 2.0) == doctest::Approx(5.2));
    CHECK(flexion_young(1.0, 1.0) == doctest::Approx(2.5));
    CHECK(flexion_young(0.0, 1.0) == 2.0);
    CHECK(flexion_young(2.0, 3.0) == doctest::Approx(7.2));
    CHECK_THROWS_AS(young_effective(1.0, 0.0), PreconditionError);
    CHECK_THROWS_AS(young_effective(1.0, -1.0), PreconditionError);

    double previous = 0.0;
    for (double lam : {0.0, 0.5, 1.0, 5.0, 50.0}) {
        const double e = young_effective(lam, 2.0);
        CHECK(e >= previous);
        CHECK(e >= 4.0);
        previous = e;
    }
}

TEST_CASE("gamma_of")
{
    CHECK(gamma_of(0.5, std::exp(-2.0)) == doctest::Approx(2.0).epsilon(1e-15));
    for (double eps : {0.1, 0.3, 0.9})
        CHECK(gamma_of(eps, std::exp(-1.0 / (eps * eps))) == doctest::Approx(1.0).epsilon(1e-14));
    // -1/(0.01 ln 0.1), evaluated in extended precision.
    CHECK(gamma_of(0.1, 0.1) == doctest::Approx(43.42944819032518).epsilon(1e-14));
    CHECK_THROWS_AS(gamma_of(0.5, 1.0), DomainError);
    CHECK_THROWS_AS(gamma_of(0.5, 2.0), DomainError);
    CHECK_THROWS_AS(gamma_of(0.0, 0.1), DomainError);
}

TEST_CASE("transverse coefficients")
{
    const double r = std::exp(-2.0);
    auto t = transverse_coefficients(0.5, r, {0.5 / (r * r), 0.5 / (r * r)});
    CHECK(t.gamma_star == doctest::Approx(1.0));
    CHECK(t.lambda_o_star == doctest::Approx(1.0));
    CHECK(t.mu_o_star == doctest::Approx(1.0));
    CHECK(t.E_o_star == doctest::Approx(2.5));
    t = transverse_coefficients(0.5, r, {0.0, 0.5 / (r * r)});
    CHECK(t.E_o_star == doctest::Approx(2.0));
    t = transverse_coefficients(0.25, 0.01, {100.0, 100.0});
    CHECK(t.gamma_star == doctest::Approx(0.8685889638065036).epsilon(1e-14));
    CHECK(t.lambda_o_star == doctest::Approx(0.04).epsilon(1e-14));
    CHECK(t.mu_o_star == doctest::Approx(0.04).epsilon(1e-14));
    CHECK_THROWS_AS(transverse_coefficients(0.25, 1.5, {1.0, 1.0}), DomainError);
}

TEST_CASE("fiber_lame_for")
{
    const auto c = fiber_lame_for(RegimeTag::Critical, 0.5, std::exp(-2.0), {1.0, 1.0});
    CHECK(c.lambda == doctest::Approx(0.25 * std::exp(4.0)).epsilon(1e-14));
    CHECK(c.mu == doctest::Approx(13.649537508).epsilon(1e-9));
    CHECK(fiber_lame_for(RegimeTag::Critical, 0.5, std::exp(-2.0), {0.0, 1.0}).lambda == 0.0);
    CHECK(fiber_lame_for(RegimeTag::Flexion, 0.5, 0.1, {0.0, 1.0}).mu == doctest::Approx(2500.0));
    CHECK_THROWS_AS(fiber_lame_for(RegimeTag::Soft, 0.5, 0.1, {1.0, 1.0}), RegimeError);
    CHECK_THROWS_AS(fiber_lame_for(RegimeTag::Critical, 0.5, 0.3, {1.0, 1.0}), PreconditionError);
}

TEST_CASE("regime tags round-trip through names")
{
    for (auto tag : {RegimeTag::Critical, RegimeTag::Soft, RegimeTag::StiffGammaInfinite, RegimeTag::Flexion,
                     RegimeTag::GammaZeroConjectural})
        CHECK(parse_regime_tag(to_string(tag)) == tag);
    CHECK_THROWS_AS(parse_regime_tag("supercritical"), ConfigError);
}

TEST_CASE("classify_regime")
{
    const std::vector<double> eps{0.5, 0.4, 0.3, 0.25};

    SUBCASE("critical")
    {
        ScalingFamily f;
        f.radius_rule = [](double e) { return std::exp(-1.0 / (e * e)); };
        f.lame_rule = [&](double e) {
            const double r = f.radius_rule(e);
            return LameCoefficients{e * e / (r * r), e * e / (r * r)};
        };
        const Regime reg = classify_regime(f, eps);
        CHECK(reg.tag == RegimeTag::Critical);
        CHECK(reg.gamma == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(reg.lambda_o == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(reg.mu_o == doctest::Approx(1.0).epsilon(1e-10));
        const auto eff = effective_coefficients({1.0, 1.0}, reg);
        CHECK(eff.E_o == doctest::Approx(2.5));
        CHECK(eff.A(0) == doctest::Approx(1.5));
    }
    SUBCASE("soft")
    {
        ScalingFamily f;
        f.radius_rule = [](double e) { return std::exp(-1.0 / (e * e)); };
        f.lame_rule = [](double) { return LameCoefficients{1.0, 1.0}; };
        const Regime reg = classify_regime(f, eps);
        CHECK(reg.tag == RegimeTag::Soft);
        CHECK(reg.gamma == doctest::Approx(1.0));
        CHECK(reg.lambda_o == 0.0);
        CHECK(effective_coefficients({1.0, 1.0}, reg).E_o == 0.0);
    }
    SUBCASE("flexion")
    {
        ScalingFamily f;
        f.radius_rule = [](double e) { return e * e; };
        f.lame_rule = [](double e) { return LameCoefficients{std::pow(e, -6.0), std::pow(e, -6.0)}; };
        const std::vector<double> small{1e-3, 5e-4, 2.5e-4, 1.25e-4};
        const Regime reg = classify_regime(f, small);
        CHECK(reg.tag == RegimeTag::Flexion);
        CHECK(std::isinf(reg.gamma));
        CHECK(reg.lambda_1 == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(reg.mu_1 == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(effective_coefficients({1.0, 1.0}, reg).E_1 == doctest::Approx(2.5));
    }
    SUBCASE("stiff")
    {
        ScalingFamily f;
        f.radius_rule = [](double e) { return e * e; };
        f.lame_rule = [](double e) { return LameCoefficients{std::pow(e, -2.0), std::pow(e, -2.0)}; };
        const std::vector<double> small{1e-3, 5e-4, 2.5e-4, 1.25e-4};
        const Regime reg = classify_regime(f, small);
        CHECK(reg.tag == RegimeTag::StiffGammaInfinite);
        CHECK(reg.mu_o == doctest::Approx(1.0));
    }
    SUBCASE("gamma zero")
    {
        ScalingFamily f;
        f.radius_rule = [](double e) { return std::exp(-1.0 / (e * e * e)); };
        f.lame_rule = [&](double e) {
            const double r = f.radius_rule(e);
            return LameCoefficients{e * e / (r * r), e * e / (r * r)};
        };
        const std::vector<double> s{0.5, 0.4, 0.3};
        CHECK(classify_regime(f, s).tag == RegimeTag::GammaZeroConjectural);
    }
    SUBCASE("mixed growth is unsupported")
    {
        ScalingFamily f;
        f.radius_rule = [](double e) { return e * e; };
        f.lame_rule = [](double e) { return LameCoefficients{std::pow(e, -2.0), std::pow(e, -10.0)}; };
        const std::vector<double> small{1e-3, 5e-4, 2.5e-4, 1.25e-4};
        CHECK(classify_regime(f, small).tag == RegimeTag::Unsupported);
    }
    SUBCASE("non-monotone family")
    {
        ScalingFamily f;
        f.radius_rule = [](double e) { return std::exp(-1.0 / (e * e)) * (1.0 + 0.5 * std::sin(50.0 * e)); };
        f.lame_rule = [](double) { return LameCoefficients{1.0, 1.0}; };
        try {
            classify_regime(f, eps);
            FAIL("expected a classification failure");
        } catch (const ClassificationError& e) {
            CHECK(!e.diagnostics().empty());
        }
    }
    SUBCASE("bad samples")
    {
        ScalingFamily f;
        f.radius_rule = [](double e) { return 0.1 * e; };
        f.lame_rule = [](double) { return LameCoefficients{1.0, 1.0}; };
        const std::vector<double> one{0.5};
        const std::vector<double> rising{0.3, 0.5};
        CHECK_THROWS_AS(classify_regime(f, one), PreconditionError);
        CHECK_THROWS_AS(classify_regime(f, rising), PreconditionError);
    }
}

TEST_CASE("round trip through fiber_lame_for")
{
    const double gamma = 2.0;
    const LameCoefficients targets{0.7, 1.3};
    ScalingFamily f;
    f.radius_rule = [&](double e) { return std::exp(-1.0 / (gamma * e * e)); };
    f.lame_rule = [&](double e) { return fiber_lame_for(RegimeTag::Critical, e, f.radius_rule(e), targets); };
    const std::vector<double> eps{0.5, 0.4, 0.3, 0.25};
    const Regime reg = classify_regime(f, eps);
    REQUIRE(reg.tag == RegimeTag::Critical);
    CHECK(std::abs(reg.gamma - gamma) <= 1e-10 * gamma);
    CHECK(std::abs(reg.lambda_o - targets.lambda) <= 1e-10 * targets.lambda);
    CHECK(std::abs(reg.mu_o - targets.mu) <= 1e-10 * targets.mu);
}

TEST_CASE("extrapolation is linear in eps")
{
    CHECK(extrapolate_to_zero(0.5, 3.0 + 0.5 * 2.0, 0.25, 3.0 + 0.25 * 2.0) == doctest::Approx(3.0));
    CHECK_THROWS_AS(extrapolate_to_zero(0.5, 1.0, 0.5, 2.0), PreconditionError);
}
