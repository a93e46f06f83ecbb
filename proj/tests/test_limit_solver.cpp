#include "doctest.h"

#include "reinforce/errors.hpp"
#include "reinforce/limit_solver.hpp"
#include "reinforce/parallel.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace reinforce;

namespace {

const LameCoefficients kBase{1.0, 1.0};

EffectiveCoefficients coefficients(double gamma, double E_o)
{
    EffectiveCoefficients e;
    e.gamma = gamma;
    e.kappa = kappa(kBase);
    e.A = coupling_matrix(kBase);
    e.E_o = E_o;
    return e;
}

// u = (x3^2, 0, x1 x3): sigma11 = sigma22 = lambda x1, sigma33 = (lambda + 2 mu) x1, sigma13 = 3 mu x3.
Vec3 exact_u(const Vec3& x) { return {x[2] * x[2], 0.0, x[0] * x[2]}; }

BodyForce manufactured_load(const LameCoefficients& m)
{
    BodyForce f;
    f.field = [m](const Vec3&) { return Vec3{-(m.lambda + 3.0 * m.mu), 0.0, 0.0}; };
    f.traction = [m](const Vec3& x, const Vec3& n) {
        const double s11 = m.lambda * x[0];
        const double s33 = (m.lambda + 2.0 * m.mu) * x[0];
        const double s13 = 3.0 * m.mu * x[2];
        return Vec3{s11 * n[0] + s13 * n[2], s11 * n[1], s13 * n[0] + s33 * n[2]};
    };
    return f;
}

double nodal_rms_error(const StructuredGrid& g, const std::vector<double>& u)
{
    double acc = 0.0;
    for (std::size_t n = 0; n < g.n_nodes(); ++n) {
        const Vec3 e = exact_u(g.coord(n));
        for (std::size_t c = 0; c < 3; ++c)
            acc += (u[3 * n + c] - e[c]) * (u[3 * n + c] - e[c]);
    }
    return std::sqrt(acc / static_cast<double>(g.n_nodes()));
}

} // namespace

TEST_CASE("elasticity converges at second order on a manufactured solution")
{
    const LameCoefficients m{2.0, 1.0};
    const BodyForce f = manufactured_load(m);
    double err[3];
    int idx = 0;
    for (int n : {4, 8, 16}) {
        const auto g = StructuredGrid::box(1, 1, 1, n, n, n);
        const LimitSolution s = solve_elasticity(g, m, f);
        CHECK(s.residual_norm < 1e-9);
        // At the discrete minimizer the energy equals the load work.
        CHECK(s.energy.total == doctest::Approx(s.load_work).epsilon(1e-8));
        CHECK(s.objective == doctest::Approx(-s.load_work).epsilon(1e-8));
        err[idx++] = nodal_rms_error(g, s.state.u);
    }
    const double rate1 = std::log2(err[0] / err[1]);
    const double rate2 = std::log2(err[1] / err[2]);
    MESSAGE("rates " << rate1 << " " << rate2);
    CHECK(rate1 >= 1.8);
    CHECK(rate2 >= 1.8);
}

TEST_CASE("coupled limit solution minimizes the objective")
{
    const auto g = StructuredGrid::box(1, 1, 2, 3, 3, 4);
    const EffectiveCoefficients eff = coefficients(2.0, 5.0);
    const BodyForce f = BodyForce::constant({0.3, -0.2, 1.0});
    const LimitSolution s = solve_limit(g, kBase, eff, f);
    CHECK(s.residual_norm < 1e-9);
    CHECK(s.energy.coupling > 0.0);
    CHECK(s.energy.fiber > 0.0);
    CHECK(s.energy.total == doctest::Approx(s.load_work).epsilon(1e-8));

    std::mt19937 rng(42);
    std::normal_distribution<double> nd(0.0, 1e-2);
    for (int trial = 0; trial < 5; ++trial) {
        LimitState p = s.state;
        for (std::size_t n = 0; n < g.n_nodes(); ++n) {
            if (g.node_ijk(n)[2] == 0)
                continue;
            for (std::size_t c = 0; c < 3; ++c)
                p.u[3 * n + c] += nd(rng);
            p.v3[n] += nd(rng);
        }
        const double obj = limit_energy(p, g, kBase, eff).total - 2.0 * load_work(p, g, f);
        CHECK(obj > s.objective);
    }
}

TEST_CASE("el_residual vanishes at the solution and equals the load at zero")
{
    const auto g = StructuredGrid::box(1, 1, 1, 3, 3, 3);
    const EffectiveCoefficients eff = coefficients(1.0, 2.0);
    const BodyForce f = BodyForce::constant({0.0, 0.0, 1.0});
    const LimitSolution s = solve_limit(g, kBase, eff, f);
    const ResidualNorms at_sol = el_residual(s.state, g, kBase, eff, f);
    CHECK(at_sol.total < 1e-9 * at_sol.load_norm);
    const ResidualNorms at_zero = el_residual(LimitState::zero(g), g, kBase, eff, f);
    CHECK(at_zero.total == doctest::Approx(at_zero.load_norm));
    CHECK(at_zero.v_block == 0.0);
    // Moving only the fibers leaves the u rows unbalanced.
    LimitState shifted = s.state;
    for (std::size_t n = 0; n < g.n_nodes(); ++n)
        if (g.node_ijk(n)[2] > 0)
            shifted.v3[n] += 0.1;
    const ResidualNorms r = el_residual(shifted, g, kBase, eff, f);
    CHECK(r.u_block > 1e-3);
    CHECK(r.v_block > 1e-3);
}

TEST_CASE("compliance decreases as the coupling stiffens")
{
    const auto g = StructuredGrid::box(1, 1, 1, 3, 3, 4);
    const BodyForce f = BodyForce::constant({0.0, 0.0, 1.0});
    double prev = INFINITY;
    for (double gamma : {0.0, 0.5, 2.0, 8.0, 32.0}) {
        const double w = solve_limit(g, kBase, coefficients(gamma, 10.0), f).load_work;
        CHECK(w < prev);
        prev = w;
    }
}

TEST_CASE("gamma = 0 and E_o = 0 reduce to elasticity")
{
    const auto g = StructuredGrid::box(1, 1, 1, 3, 3, 3);
    const BodyForce f = BodyForce::constant({0.1, 0.2, 0.3});
    const LimitSolution lim = solve_limit(g, kBase, coefficients(0.0, 0.0), f);
    const LimitSolution el = solve_elasticity(g, kBase, f);
    CHECK(lim.load_work == doctest::Approx(el.load_work).epsilon(1e-12));
    for (std::size_t n = 0; n < g.n_nodes(); ++n)
        CHECK(lim.state.v3[n] == lim.state.u[3 * n + 2]);
}

TEST_CASE("large coupling approaches the stiff limit")
{
    const auto g = StructuredGrid::box(1, 1, 1, 3, 3, 4);
    const BodyForce f = BodyForce::constant({0.0, 0.0, 1.0});
    const double stiff = solve_stiff_limit(g, kBase, 3.0, f).load_work;
    const double w2 = solve_limit(g, kBase, coefficients(1e2, 3.0), f).load_work;
    const double w4 = solve_limit(g, kBase, coefficients(1e4, 3.0), f).load_work;
    CHECK(std::abs(w4 - stiff) < std::abs(w2 - stiff));
    CHECK(w4 == doctest::Approx(stiff).epsilon(1e-3));
}

TEST_CASE("weighted coupling with a unit jacobian matches the plain problem")
{
    const auto g = StructuredGrid::box(1, 1, 1, 2, 2, 3);
    const BodyForce f = BodyForce::constant({0.0, 0.0, 1.0});
    const EffectiveCoefficients eff = coefficients(1.0, 4.0);
    WeightField w;
    w.jacobian = [](double, double) { return 1.0; };
    w.young_profile = [](double) { return 4.0; };
    const double a = solve_limit(g, kBase, eff, f).load_work;
    const double b = solve_limit(g, kBase, eff, f, w).load_work;
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
    WeightField softer;
    softer.young_profile = [](double x3) { return 4.0 * (1.0 - 0.5 * x3); };
    CHECK(solve_limit(g, kBase, eff, f, softer).load_work > a);
}

TEST_CASE("limit solver rejects invalid coefficients")
{
    const auto g = StructuredGrid::box(1, 1, 1, 2, 2, 2);
    CHECK_THROWS_AS(solve_limit(g, kBase, coefficients(INFINITY, 1.0), {}), PreconditionError);
    CHECK_THROWS_AS(solve_limit(g, kBase, coefficients(-1.0, 1.0), {}), PreconditionError);
    CHECK_THROWS_AS(solve_limit(g, LameCoefficients{1.0, 0.0}, coefficients(1.0, 1.0), {}), PreconditionError);
    CHECK_THROWS_AS(solve_flexion_limit(g, kBase, 0.0, 1.0, coupling_matrix(kBase), {}), PreconditionError);
}

namespace {

// Polynomial Ritz solution of min alpha int (v - c x)^2 + beta int v''^2 over (0, 1), v(0) = 0.
struct RitzResult {
    double tip;
    double energy;
};

RitzResult ritz_fiber(double alpha, double beta, double c, int degree)
{
    const int K = degree;
    Eigen::MatrixXd M(K, K);
    Eigen::VectorXd rhs(K);
    for (int k = 1; k <= K; ++k) {
        rhs(k - 1) = alpha * c / (k + 2.0);
        for (int l = 1; l <= K; ++l) {
            double bend = 0.0;
            if (k >= 2 && l >= 2)
                bend = static_cast<double>(k * (k - 1) * l * (l - 1)) / (k + l - 3.0);
            M(k - 1, l - 1) = alpha / (k + l + 1.0) + beta * bend;
        }
    }
    const Eigen::VectorXd coef = M.colPivHouseholderQr().solve(rhs);
    RitzResult r{coef.sum(), 0.0};
    // J = c' M c - 2 rhs' c + alpha c^2 / 3
    r.energy = coef.dot(M * coef) - 2.0 * rhs.dot(coef) + alpha * c * c / 3.0;
    return r;
}

} // namespace

TEST_CASE("flexion fibers match a one-dimensional Ritz solution")
{
    const auto g = StructuredGrid::box(1, 1, 1, 2, 2, 8);
    const DiagonalMatrix3 A = coupling_matrix(kBase);
    const double gamma = 1.0, E_1 = 4.0, c = 0.7;
    std::vector<double> u(3 * g.n_nodes(), 0.0);
    for (std::size_t n = 0; n < g.n_nodes(); ++n)
        u[3 * n] = c * g.coord(n)[2];
    const LimitState s = solve_flexion_fibers(g, E_1, gamma, A, u);
    const RitzResult ref = ritz_fiber(2.0 * pi * gamma * A(0), pi * E_1 / 4.0, c, 12);
    for (std::size_t n = 0; n < g.n_nodes(); ++n) {
        if (g.node_ijk(n)[2] == g.ez()) {
            CHECK(s.flexion[4 * n] == doctest::Approx(ref.tip).epsilon(1e-5));
        }
        CHECK(s.flexion[4 * n + 2] == doctest::Approx(0.0));
    }
    const EnergyBreakdown e = flexion_energy(s, g, kBase, E_1, gamma, A);
    CHECK(e.coupling + e.fiber == doctest::Approx(ref.energy).epsilon(1e-5));
}

TEST_CASE("flexion solve is consistent with the fiber sub-problem")
{
    const auto g = StructuredGrid::box(1, 1, 1, 2, 2, 4);
    const DiagonalMatrix3 A = coupling_matrix(kBase);
    const BodyForce f = BodyForce::constant({1.0, -0.5, 0.2});
    const LimitSolution s = solve_flexion_limit(g, kBase, 3.0, 2.0, A, f);
    CHECK(s.residual_norm < 1e-9);
    CHECK(s.energy.total == doctest::Approx(s.load_work).epsilon(1e-8));
    const LimitState fib = solve_flexion_fibers(g, 3.0, 2.0, A, s.state.u);
    for (std::size_t i = 0; i < fib.flexion.size(); ++i)
        CHECK(fib.flexion[i] == doctest::Approx(s.state.flexion[i]).epsilon(1e-7).scale(1e-3));
}

TEST_CASE("limit solve is bitwise reproducible across thread counts")
{
    const auto g = StructuredGrid::box(1, 1, 1, 4, 4, 4);
    const BodyForce f = BodyForce::constant({0.2, 0.0, 1.0});
    set_thread_count(1);
    const LimitSolution a = solve_limit(g, kBase, coefficients(2.0, 3.0), f);
    set_thread_count(4);
    const LimitSolution b = solve_limit(g, kBase, coefficients(2.0, 3.0), f);
    set_thread_count(1);
    CHECK(a.state.u == b.state.u);
    CHECK(a.state.v3 == b.state.v3);
    CHECK(a.energy.total == b.energy.total);
}

TEST_CASE("nodal body force tables interpolate")
{
    const auto g = StructuredGrid::box(1, 1, 1, 2, 2, 2);
    BodyForce f;
    f.nodal.resize(g.n_nodes());
    for (std::size_t n = 0; n < g.n_nodes(); ++n)
        f.nodal[n] = {g.coord(n)[0], 1.0, 2.0 * g.coord(n)[2]};
    const Vec3 v = f.at(g, {0.3, 0.9, 0.25});
    CHECK(v[0] == doctest::Approx(0.3));
    CHECK(v[1] == doctest::Approx(1.0));
    CHECK(v[2] == doctest::Approx(0.5));
}
