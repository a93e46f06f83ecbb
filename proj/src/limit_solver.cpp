#include "reinforce/limit_solver.hpp"

#include "fe_kernels.hpp"
#include "reinforce/errors.hpp"
#include "reinforce/parallel.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace reinforce {

BodyForce BodyForce::constant(const Vec3& f)
{
    BodyForce out;
    out.field = [f](const Vec3&) { return f; };
    return out;
}

Vec3 BodyForce::at(const StructuredGrid& grid, const Vec3& x) const
{
    if (!nodal.empty()) {
        if (nodal.size() != grid.n_nodes())
            throw PreconditionError("BodyForce: nodal table does not match the grid");
        const double t[3] = {x[0] / grid.hx, x[1] / grid.hy, x[2] / grid.hz};
        const int n[3] = {grid.ex(), grid.ey(), grid.ez()};
        int c[3];
        double s[3];
        for (int d = 0; d < 3; ++d) {
            c[d] = std::clamp(static_cast<int>(std::floor(t[d])), 0, n[d] - 1);
            s[d] = std::clamp(t[d] - c[d], 0.0, 1.0);
        }
        Vec3 out{};
        for (int l = 0; l < 8; ++l) {
            const int bx = l & 1, by = (l >> 1) & 1, bz = (l >> 2) & 1;
            const double w = (bx ? s[0] : 1 - s[0]) * (by ? s[1] : 1 - s[1]) * (bz ? s[2] : 1 - s[2]);
            out = out + w * nodal[grid.node(c[0] + bx, c[1] + by, c[2] + bz)];
        }
        return out;
    }
    if (field)
        return field(x);
    return {0.0, 0.0, 0.0};
}

LimitState LimitState::zero(const StructuredGrid& grid, bool with_flexion)
{
    LimitState s;
    s.u.assign(3 * grid.n_nodes(), 0.0);
    s.v3.assign(grid.n_nodes(), 0.0);
    if (with_flexion)
        s.flexion.assign(4 * grid.n_nodes(), 0.0);
    return s;
}

namespace {

using detail::ElasticKernels;

void require_state(const LimitState& s, const StructuredGrid& grid, bool flexion)
{
    if (s.u.size() != 3 * grid.n_nodes() || s.v3.size() != grid.n_nodes())
        throw PreconditionError("limit state does not match the grid");
    if (flexion && s.flexion.size() != 4 * grid.n_nodes())
        throw PreconditionError("limit state carries no flexion unknowns");
}

double elastic_density(const Mat3& grad, const LameCoefficients& base)
{
    return isotropic_energy_density(symmetric_part(grad), base.lambda, base.mu);
}

double field_at(const std::array<std::size_t, 8>& nodes, const std::array<double, 8>& N, const std::vector<double>& f,
                std::size_t stride, std::size_t comp)
{
    double v = 0.0;
    for (std::size_t a = 0; a < 8; ++a)
        v += N[a] * f[nodes[a] * stride + comp];
    return v;
}

double dz_at(const std::array<std::size_t, 8>& nodes, const std::array<Vec3, 8>& dN, const std::vector<double>& f,
             std::size_t stride, std::size_t comp)
{
    double v = 0.0;
    for (std::size_t a = 0; a < 8; ++a)
        v += dN[a][2] * f[nodes[a] * stride + comp];
    return v;
}

double jacobian_weight(const WeightField& w, const Vec3& x) { return w.jacobian ? w.jacobian(x[0], x[1]) : 1.0; }

double fiber_modulus(const WeightField& w, const EffectiveCoefficients& eff, const Vec3& x)
{
    return w.young_profile ? w.young_profile(x[2]) : eff.E_o;
}

void require_limit_coefficients(const EffectiveCoefficients& eff)
{
    if (!std::isfinite(eff.gamma) || eff.gamma < 0.0)
        throw PreconditionError(fmt::format("limit problem needs a finite gamma >= 0 (got {})", eff.gamma));
    if (!(eff.E_o >= 0.0))
        throw PreconditionError(fmt::format("limit problem needs E_o >= 0 (got {})", eff.E_o));
}

// ---- Hermite-in-x3 basis for the flexion unknowns ----

struct FlexionBasis {
    HexRule rule;
    // Per point and local node: value-type and slope-type functions and their second x3 derivatives.
    std::vector<std::array<double, 8>> phi, psi, phi2, psi2;
};

FlexionBasis flexion_basis(const StructuredGrid& grid)
{
    FlexionBasis fb;
    fb.rule = hex_rule(grid, 2, 2, 4);
    const double h = grid.hz;
    for (std::size_t g = 0; g < fb.rule.size(); ++g) {
        const double xi = fb.rule.offset[g][0] / grid.hx;
        const double eta = fb.rule.offset[g][1] / grid.hy;
        const double t = fb.rule.offset[g][2] / h;
        const double H[4] = {1 - 3 * t * t + 2 * t * t * t, t - 2 * t * t + t * t * t, 3 * t * t - 2 * t * t * t,
                             -t * t + t * t * t};
        const double H2[4] = {-6 + 12 * t, -4 + 6 * t, 6 - 12 * t, -2 + 6 * t};
        std::array<double, 8> phi{}, psi{}, phi2{}, psi2{};
        for (std::size_t a = 0; a < 8; ++a) {
            const double px = (a & 1) ? xi : 1 - xi;
            const double py = (a & 2) ? eta : 1 - eta;
            const double p = px * py;
            const bool top = (a >> 2) & 1;
            phi[a] = p * (top ? H[2] : H[0]);
            psi[a] = p * h * (top ? H[3] : H[1]);
            phi2[a] = p * (top ? H2[2] : H2[0]) / (h * h);
            psi2[a] = p * (top ? H2[3] : H2[1]) / h;
        }
        fb.phi.push_back(phi);
        fb.psi.push_back(psi);
        fb.phi2.push_back(phi2);
        fb.psi2.push_back(psi2);
    }
    return fb;
}

constexpr int kFlexBlock = 7;
// Flexion dof layout: u1 u2 u3 v1 d3v1 v2 d3v2.
constexpr std::size_t kV[2] = {3, 5};

// ---- System construction ----

struct System {
    BlockStencilMatrix K;
    std::vector<double> b;
    std::vector<char> fixed;
};

System limit_system(const StructuredGrid& grid, const LameCoefficients& base, const EffectiveCoefficients& eff,
                    const BodyForce& f, const WeightField& weight, bool reduced)
{
    const int block = reduced ? 3 : 4;
    const ElasticKernels kern = detail::elastic_kernels(grid);
    System sys{BlockStencilMatrix(grid, block), detail::assemble_load(grid, block, f), {}};
    const double c_couple = 2.0 * pi * eff.gamma * coupling_matrix(base)(2);
    assemble_matrix([&](int i, int j, int k, std::vector<double>& Ke) {
        detail::add_elastic(kern, base.lambda, base.mu, block, Ke);
        if (reduced)
            return;
        const Vec3 origin = grid.coord(i, j, k);
        const HexRule& r = kern.rule;
        for (std::size_t g = 0; g < r.size(); ++g) {
            const Vec3 x = origin + r.offset[g];
            const double w = jacobian_weight(weight, x);
            const double cm = c_couple * w * r.weight[g];
            const double cf = pi * fiber_modulus(weight, eff, x) * w * r.weight[g];
            for (std::size_t a = 0; a < 8; ++a) {
                for (std::size_t b = 0; b < 8; ++b) {
                    const double M = cm * r.N[g][a] * r.N[g][b];
                    const double S = cf * r.dN[g][a][2] * r.dN[g][b][2];
                    Ke[(a * 4 + 2) * 32 + b * 4 + 2] += M;
                    Ke[(a * 4 + 3) * 32 + b * 4 + 3] += M + S;
                    Ke[(a * 4 + 2) * 32 + b * 4 + 3] -= M;
                    Ke[(a * 4 + 3) * 32 + b * 4 + 2] -= M;
                }
            }
        }
    }, sys.K);
    sys.fixed = detail::clamped_mask(grid, block, reduced ? std::vector<int>{0, 1, 2} : std::vector<int>{0, 1, 2, 3});
    return sys;
}

System elastic_system(const StructuredGrid& grid, const LameCoefficients& base, double stiff_E_o, const BodyForce& f)
{
    const ElasticKernels kern = detail::elastic_kernels(grid);
    System sys{BlockStencilMatrix(grid, 3), detail::assemble_load(grid, 3, f), {}};
    assemble_matrix([&](int, int, int, std::vector<double>& Ke) {
        detail::add_elastic(kern, base.lambda, base.mu, 3, Ke);
        if (stiff_E_o == 0.0)
            return;
        const HexRule& r = kern.rule;
        for (std::size_t g = 0; g < r.size(); ++g) {
            const double cf = pi * stiff_E_o * r.weight[g];
            for (std::size_t a = 0; a < 8; ++a)
                for (std::size_t b = 0; b < 8; ++b)
                    Ke[(a * 3 + 2) * 24 + b * 3 + 2] += cf * r.dN[g][a][2] * r.dN[g][b][2];
        }
    }, sys.K);
    sys.fixed = detail::clamped_mask(grid, 3, {0, 1, 2});
    return sys;
}

System flexion_system(const StructuredGrid& grid, const LameCoefficients& base, double E_1, double gamma,
                      const DiagonalMatrix3& A, const BodyForce& f)
{
    const ElasticKernels kern = detail::elastic_kernels(grid);
    const FlexionBasis fb = flexion_basis(grid);
    System sys{BlockStencilMatrix(grid, kFlexBlock), detail::assemble_load(grid, kFlexBlock, f), {}};
    const std::size_t bs = kFlexBlock;
    const std::size_t ne = 8 * bs;
    const double c1 = 2.0 * pi * gamma * A(0);
    const double c3 = 2.0 * pi * gamma * A(2);
    const double cb = pi * E_1 / 4.0;
    assemble_matrix([&](int, int, int, std::vector<double>& Ke) {
        detail::add_elastic(kern, base.lambda, base.mu, kFlexBlock, Ke);
        const HexRule& r = fb.rule;
        for (std::size_t g = 0; g < r.size(); ++g) {
            const double w = r.weight[g];
            const auto& N = r.N[g];
            const std::array<double, 8>* B[2] = {&fb.phi[g], &fb.psi[g]};
            const std::array<double, 8>* B2[2] = {&fb.phi2[g], &fb.psi2[g]};
            for (std::size_t a = 0; a < 8; ++a) {
                for (std::size_t b = 0; b < 8; ++b) {
                    auto at = [&](std::size_t ca, std::size_t cb_) -> double& { return Ke[(a * bs + ca) * ne + b * bs + cb_]; };
                    at(2, 2) += c3 * w * N[a] * N[b];
                    for (std::size_t al = 0; al < 2; ++al) {
                        at(al, al) += c1 * w * N[a] * N[b];
                        for (std::size_t p = 0; p < 2; ++p) {
                            at(al, kV[al] + p) -= c1 * w * N[a] * (*B[p])[b];
                            at(kV[al] + p, al) -= c1 * w * (*B[p])[a] * N[b];
                            for (std::size_t q = 0; q < 2; ++q)
                                at(kV[al] + p, kV[al] + q) +=
                                    c1 * w * (*B[p])[a] * (*B[q])[b] + cb * w * (*B2[p])[a] * (*B2[q])[b];
                        }
                    }
                }
            }
        }
    }, sys.K);
    sys.fixed = detail::clamped_mask(grid, kFlexBlock, {0, 1, 2, 3, 5});
    return sys;
}

std::vector<double> pack(const LimitState& s, std::size_t n_nodes, int block)
{
    const std::size_t bs = static_cast<std::size_t>(block);
    std::vector<double> x(n_nodes * bs, 0.0);
    for (std::size_t n = 0; n < n_nodes; ++n) {
        for (std::size_t c = 0; c < 3; ++c)
            x[n * bs + c] = s.u[3 * n + c];
        if (block == 4)
            x[n * bs + 3] = s.v3[n];
        if (block == kFlexBlock)
            for (std::size_t c = 0; c < 4; ++c)
                x[n * bs + 3 + c] = s.flexion[4 * n + c];
    }
    return x;
}

LimitState unpack(const std::vector<double>& x, std::size_t n_nodes, int block)
{
    const std::size_t bs = static_cast<std::size_t>(block);
    LimitState s;
    s.u.resize(3 * n_nodes);
    s.v3.resize(n_nodes);
    if (block == kFlexBlock)
        s.flexion.resize(4 * n_nodes);
    for (std::size_t n = 0; n < n_nodes; ++n) {
        for (std::size_t c = 0; c < 3; ++c)
            s.u[3 * n + c] = x[n * bs + c];
        if (block == 4)
            s.v3[n] = x[n * bs + 3];
        else if (block == 3)
            s.v3[n] = x[n * bs + 2];
        else {
            s.v3[n] = 0.0;
            for (std::size_t c = 0; c < 4; ++c)
                s.flexion[4 * n + c] = x[n * bs + 3 + c];
        }
    }
    return s;
}

// b - K x on the free dofs.
std::vector<double> residual(const System& sys, const std::vector<double>& x)
{
    std::vector<double> Kx;
    sys.K.multiply(x, Kx);
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        r[i] = sys.fixed[i] ? 0.0 : sys.b[i] - Kx[i];
    return r;
}

double free_norm(const std::vector<double>& v, const std::vector<char>& fixed)
{
    std::vector<double> w(v);
    for (std::size_t i = 0; i < w.size(); ++i)
        if (fixed[i])
            w[i] = 0.0;
    return norm2(w);
}

struct Solved {
    std::vector<double> x;
    SolveStats stats;
    double residual_norm = 0.0;
};

Solved solve_system(System& sys, const SolverOptions& options)
{
    sys.K.eliminate(sys.fixed);
    Solved out;
    out.stats = solve_pcg(sys.K, sys.b, out.x, sys.fixed, options);
    const double bn = free_norm(sys.b, sys.fixed);
    out.residual_norm = bn > 0.0 ? norm2(residual(sys, out.x)) / bn : 0.0;
    return out;
}

} // namespace

// ---- Energies ----

EnergyBreakdown limit_energy(const LimitState& state, const StructuredGrid& grid, const LameCoefficients& base,
                             const EffectiveCoefficients& eff, const WeightField& weight)
{
    require_state(state, grid, false);
    require_limit_coefficients(eff);
    const HexRule rule = hex_rule(grid, 2, 2, 2);
    const double c_couple = 2.0 * pi * eff.gamma * coupling_matrix(base)(2);
    EnergyBreakdown e;
    e.elastic = detail::sum_over_elements(grid, [&](int i, int j, int k) {
        const auto nodes = grid.element_nodes(i, j, k);
        double acc = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g)
            acc += rule.weight[g] * elastic_density(detail::displacement_gradient(nodes, rule.dN[g], state.u, 3), base);
        return acc;
    });
    e.coupling = detail::sum_over_elements(grid, [&](int i, int j, int k) {
        const auto nodes = grid.element_nodes(i, j, k);
        const Vec3 origin = grid.coord(i, j, k);
        double acc = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const double d = field_at(nodes, rule.N[g], state.v3, 1, 0) - field_at(nodes, rule.N[g], state.u, 3, 2);
            acc += rule.weight[g] * jacobian_weight(weight, origin + rule.offset[g]) * d * d;
        }
        return c_couple * acc;
    });
    e.fiber = detail::sum_over_elements(grid, [&](int i, int j, int k) {
        const auto nodes = grid.element_nodes(i, j, k);
        const Vec3 origin = grid.coord(i, j, k);
        double acc = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const Vec3 x = origin + rule.offset[g];
            const double e33 = dz_at(nodes, rule.dN[g], state.v3, 1, 0);
            acc += rule.weight[g] * pi * fiber_modulus(weight, eff, x) * jacobian_weight(weight, x) * e33 * e33;
        }
        return acc;
    });
    e.total = e.elastic + e.coupling + e.fiber;
    return e;
}

EnergyBreakdown stiff_energy(const LimitState& state, const StructuredGrid& grid, const LameCoefficients& base,
                             double E_o)
{
    require_state(state, grid, false);
    const HexRule rule = hex_rule(grid, 2, 2, 2);
    EnergyBreakdown e;
    e.elastic = detail::sum_over_elements(grid, [&](int i, int j, int k) {
        const auto nodes = grid.element_nodes(i, j, k);
        double acc = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g)
            acc += rule.weight[g] * elastic_density(detail::displacement_gradient(nodes, rule.dN[g], state.u, 3), base);
        return acc;
    });
    e.fiber = detail::sum_over_elements(grid, [&](int i, int j, int k) {
        const auto nodes = grid.element_nodes(i, j, k);
        double acc = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const double e33 = dz_at(nodes, rule.dN[g], state.u, 3, 2);
            acc += rule.weight[g] * e33 * e33;
        }
        return pi * E_o * acc;
    });
    e.total = e.elastic + e.fiber;
    return e;
}

EnergyBreakdown flexion_energy(const LimitState& state, const StructuredGrid& grid, const LameCoefficients& base,
                               double E_1, double gamma, const DiagonalMatrix3& A)
{
    require_state(state, grid, true);
    const HexRule rule = hex_rule(grid, 2, 2, 2);
    const FlexionBasis fb = flexion_basis(grid);
    EnergyBreakdown e;
    e.elastic = detail::sum_over_elements(grid, [&](int i, int j, int k) {
        const auto nodes = grid.element_nodes(i, j, k);
        double acc = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g)
            acc += rule.weight[g] * elastic_density(detail::displacement_gradient(nodes, rule.dN[g], state.u, 3), base);
        return acc;
    });
    auto flex_terms = [&](int i, int j, int k, bool coupling) {
        const auto nodes = grid.element_nodes(i, j, k);
        double acc = 0.0;
        for (std::size_t g = 0; g < fb.rule.size(); ++g) {
            double term = 0.0;
            for (std::size_t al = 0; al < 2; ++al) {
                double v = 0.0, v2 = 0.0;
                for (std::size_t a = 0; a < 8; ++a) {
                    const double val = state.flexion[4 * nodes[a] + 2 * al];
                    const double slope = state.flexion[4 * nodes[a] + 2 * al + 1];
                    v += fb.phi[g][a] * val + fb.psi[g][a] * slope;
                    v2 += fb.phi2[g][a] * val + fb.psi2[g][a] * slope;
                }
                if (coupling) {
                    const double d = v - field_at(nodes, fb.rule.N[g], state.u, 3, al);
                    term += 2.0 * pi * gamma * A(static_cast<int>(al)) * d * d;
                } else {
                    term += pi * E_1 / 4.0 * v2 * v2;
                }
            }
            if (coupling) {
                const double u3 = field_at(nodes, fb.rule.N[g], state.u, 3, 2);
                term += 2.0 * pi * gamma * A(2) * u3 * u3;
            }
            acc += fb.rule.weight[g] * term;
        }
        return acc;
    };
    e.coupling = detail::sum_over_elements(grid, [&](int i, int j, int k) { return flex_terms(i, j, k, true); });
    e.fiber = detail::sum_over_elements(grid, [&](int i, int j, int k) { return flex_terms(i, j, k, false); });
    e.total = e.elastic + e.coupling + e.fiber;
    return e;
}

double load_work(const LimitState& state, const StructuredGrid& grid, const BodyForce& f)
{
    return detail::load_work(grid, state.u, 3, f);
}

// ---- Solves ----

LimitSolution solve_limit(const StructuredGrid& grid, const LameCoefficients& base, const EffectiveCoefficients& eff,
                          const BodyForce& f, const WeightField& weight, const SolverOptions& options)
{
    base.require_valid("solve_limit");
    require_limit_coefficients(eff);
    const bool reduced = eff.gamma == 0.0 && eff.E_o == 0.0 && !weight.young_profile;
    System sys = limit_system(grid, base, eff, f, weight, reduced);
    const Solved s = solve_system(sys, options);
    LimitSolution out;
    out.state = unpack(s.x, grid.n_nodes(), sys.K.block());
    out.stats = s.stats;
    out.residual_norm = s.residual_norm;
    out.energy = limit_energy(out.state, grid, base, eff, weight);
    out.load_work = load_work(out.state, grid, f);
    out.objective = out.energy.total - 2.0 * out.load_work;
    return out;
}

LimitSolution solve_stiff_limit(const StructuredGrid& grid, const LameCoefficients& base, double E_o,
                                const BodyForce& f, const SolverOptions& options)
{
    base.require_valid("solve_stiff_limit");
    if (!(E_o >= 0.0) || !std::isfinite(E_o))
        throw PreconditionError(fmt::format("solve_stiff_limit: E_o must be finite and >= 0 (got {})", E_o));
    System sys = elastic_system(grid, base, E_o, f);
    const Solved s = solve_system(sys, options);
    LimitSolution out;
    out.state = unpack(s.x, grid.n_nodes(), 3);
    out.stats = s.stats;
    out.residual_norm = s.residual_norm;
    out.energy = stiff_energy(out.state, grid, base, E_o);
    out.load_work = load_work(out.state, grid, f);
    out.objective = out.energy.total - 2.0 * out.load_work;
    return out;
}

LimitSolution solve_elasticity(const StructuredGrid& grid, const LameCoefficients& base, const BodyForce& f,
                               const SolverOptions& options)
{
    return solve_stiff_limit(grid, base, 0.0, f, options);
}

LimitSolution solve_flexion_limit(const StructuredGrid& grid, const LameCoefficients& base, double E_1, double gamma,
                                  const DiagonalMatrix3& A, const BodyForce& f, const SolverOptions& options)
{
    base.require_valid("solve_flexion_limit");
    if (!(E_1 > 0.0) || !std::isfinite(E_1))
        throw PreconditionError(fmt::format("solve_flexion_limit: E_1 must be positive (got {})", E_1));
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw PreconditionError(fmt::format("solve_flexion_limit: gamma must lie in (0, inf) (got {})", gamma));
    System sys = flexion_system(grid, base, E_1, gamma, A, f);
    SolverOptions line_options = options;
    line_options.preconditioner = Preconditioner::LineX3;
    const Solved s = solve_system(sys, line_options);
    LimitSolution out;
    out.state = unpack(s.x, grid.n_nodes(), kFlexBlock);
    out.stats = s.stats;
    out.residual_norm = s.residual_norm;
    out.energy = flexion_energy(out.state, grid, base, E_1, gamma, A);
    out.load_work = load_work(out.state, grid, f);
    out.objective = out.energy.total - 2.0 * out.load_work;
    return out;
}

LimitState solve_flexion_fibers(const StructuredGrid& grid, double E_1, double gamma, const DiagonalMatrix3& A,
                                const std::vector<double>& u, const SolverOptions& options)
{
    if (u.size() != 3 * grid.n_nodes())
        throw PreconditionError("solve_flexion_fibers: u does not match the grid");
    // The matrix part of the operator does not influence the fiber rows; any admissible pair works.
    System sys = flexion_system(grid, LameCoefficients{0.0, 1.0}, E_1, gamma, A, BodyForce{});
    LimitState prescribed = LimitState::zero(grid, true);
    prescribed.u = u;
    const std::vector<double> xp = pack(prescribed, grid.n_nodes(), kFlexBlock);
    std::vector<double> Kxp;
    sys.K.multiply(xp, Kxp);
    const std::size_t bs = kFlexBlock;
    std::vector<char> fixed = sys.fixed;
    for (std::size_t n = 0; n < grid.n_nodes(); ++n)
        for (std::size_t c = 0; c < 3; ++c)
            fixed[n * bs + c] = 1;
    std::vector<double> rhs(Kxp.size());
    for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs[i] = fixed[i] ? 0.0 : -Kxp[i];
    sys.K.eliminate(fixed);
    std::vector<double> dx;
    SolverOptions line_options = options;
    line_options.preconditioner = Preconditioner::LineX3;
    solve_pcg(sys.K, rhs, dx, fixed, line_options);
    for (std::size_t i = 0; i < dx.size(); ++i)
        dx[i] += xp[i];
    return unpack(dx, grid.n_nodes(), kFlexBlock);
}

ResidualNorms el_residual(const LimitState& state, const StructuredGrid& grid, const LameCoefficients& base,
                          const EffectiveCoefficients& eff, const BodyForce& f, const WeightField& weight)
{
    require_state(state, grid, false);
    require_limit_coefficients(eff);
    const bool reduced = eff.gamma == 0.0 && eff.E_o == 0.0 && !weight.young_profile;
    System sys = limit_system(grid, base, eff, f, weight, reduced);
    const int block = sys.K.block();
    const std::vector<double> x = pack(state, grid.n_nodes(), block);
    const std::vector<double> r = residual(sys, x);
    const std::size_t bs = static_cast<std::size_t>(block);
    double su = 0.0, sv = 0.0;
    for (std::size_t n = 0; n < grid.n_nodes(); ++n) {
        for (std::size_t c = 0; c < bs; ++c) {
            const double v = r[n * bs + c] * r[n * bs + c];
            (c < 3 ? su : sv) += v;
        }
    }
    ResidualNorms out;
    out.u_block = std::sqrt(su);
    out.v_block = std::sqrt(sv);
    out.total = std::sqrt(su + sv);
    out.load_norm = free_norm(sys.b, sys.fixed);
    return out;
}

} // namespace reinforce
