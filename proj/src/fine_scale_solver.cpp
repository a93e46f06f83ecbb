#include "reinforce/fine_scale_solver.hpp"

#include "fe_kernels.hpp"
#include "reinforce/cell_solutions.hpp"
#include "reinforce/errors.hpp"
#include "reinforce/parallel.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace reinforce {

StructuredGrid fine_grid(const FiberLayout& layout, double L, const FineGridOptions& options)
{
    if (!(options.elements_per_radius > 0.0) || options.nz < 1 || options.min_elements_per_side < 1 ||
        options.max_elements_per_side < options.min_elements_per_side)
        throw PreconditionError("fine_grid: invalid grid options");
    auto side = [&](double extent) {
        const double want = std::ceil(options.elements_per_radius * extent / layout.radius - 1e-9);
        const double n = std::clamp(want, static_cast<double>(options.min_elements_per_side),
                                    static_cast<double>(options.max_elements_per_side));
        return static_cast<int>(n);
    };
    const int ex = side(layout.a);
    const int ey = side(layout.b);
    const StructuredGrid g = StructuredGrid::box(layout.a, layout.b, L, ex, ey, options.nz);
    if (elements_per_radius(g, layout) < 1.0)
        throw ResolutionError(fmt::format(
            "fiber radius {:.4g} needs more than {} elements per side (less than one element per radius)",
            layout.radius, options.max_elements_per_side));
    return g;
}

double elements_per_radius(const StructuredGrid& grid, const FiberLayout& layout)
{
    return layout.radius / std::max(grid.hx, grid.hy);
}

std::vector<std::string> check_resolution(const StructuredGrid& grid, const FiberLayout& layout)
{
    const double epr = elements_per_radius(grid, layout);
    if (epr < 1.0)
        throw ResolutionError(fmt::format("under-resolved fibers: {:.3f} elements per radius (r = {:.4g}, h = {:.4g})",
                                          epr, layout.radius, std::max(grid.hx, grid.hy)));
    std::vector<std::string> warnings;
    if (epr < 2.0)
        warnings.push_back(fmt::format("only {:.3f} elements per fiber radius; at least 2 recommended", epr));
    return warnings;
}

CompositeAssignment assign_materials(const StructuredGrid& grid, const FiberLayout& layout,
                                     const LameCoefficients& matrix, const LameCoefficients& fiber)
{
    matrix.require_valid("assign_materials (matrix)");
    fiber.require_valid("assign_materials (fiber)");
    CompositeAssignment out;
    out.matrix = matrix;
    out.fiber_lame = fiber;
    out.fiber.assign(grid.n_elements(), 0);
    // Tags depend on (i, j) only.
    std::vector<char> column(static_cast<std::size_t>(grid.ex()) * static_cast<std::size_t>(grid.ey()), 0);
    std::size_t per_layer = 0;
    for (int j = 0; j < grid.ey(); ++j) {
        for (int i = 0; i < grid.ex(); ++i) {
            const Vec3 c = grid.element_centroid(i, j, 0);
            if (nearest_fiber(layout, c[0], c[1]).distance < layout.radius) {
                column[static_cast<std::size_t>(i) + static_cast<std::size_t>(grid.ex()) * static_cast<std::size_t>(j)] = 1;
                ++per_layer;
            }
        }
    }
    for (std::size_t e = 0; e < out.fiber.size(); ++e)
        out.fiber[e] = column[e % column.size()];
    out.n_fiber_elements = per_layer * static_cast<std::size_t>(grid.ez());
    return out;
}

namespace {

const LameCoefficients& element_lame(const CompositeAssignment& m, const StructuredGrid& grid, int i, int j, int k)
{
    return m.fiber[grid.element(i, j, k)] ? m.fiber_lame : m.matrix;
}

void require_field(const std::vector<double>& u, const StructuredGrid& grid)
{
    if (u.size() != 3 * grid.n_nodes())
        throw PreconditionError("displacement field does not match the grid");
}

void require_fibers(const CompositeAssignment& m)
{
    if (m.n_fiber_elements == 0)
        throw PreconditionError("no fiber elements on this grid");
}

} // namespace

double fine_energy(const std::vector<double>& u, const StructuredGrid& grid, const CompositeAssignment& materials)
{
    require_field(u, grid);
    const HexRule rule = hex_rule(grid, 2, 2, 2);
    return detail::sum_over_elements(grid, [&](int i, int j, int k) {
        const LameCoefficients& m = element_lame(materials, grid, i, j, k);
        const auto nodes = grid.element_nodes(i, j, k);
        double acc = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const Mat3 e = symmetric_part(detail::displacement_gradient(nodes, rule.dN[g], u, 3));
            acc += rule.weight[g] * isotropic_energy_density(e, m.lambda, m.mu);
        }
        return acc;
    });
}

FineSolution solve_fine(const StructuredGrid& grid, const FiberLayout& layout, const LameCoefficients& matrix,
                        const LameCoefficients& fiber, const BodyForce& f, const SolverOptions& options)
{
    FineSolution out;
    out.warnings = check_resolution(grid, layout);
    out.materials = assign_materials(grid, layout, matrix, fiber);
    const detail::ElasticKernels kern = detail::elastic_kernels(grid);
    BlockStencilMatrix K(grid, 3);
    assemble_matrix([&](int i, int j, int k, std::vector<double>& Ke) {
        const LameCoefficients& m = element_lame(out.materials, grid, i, j, k);
        detail::add_elastic(kern, m.lambda, m.mu, 3, Ke);
    }, K);
    const std::vector<double> b = detail::assemble_load(grid, 3, f);
    const std::vector<char> fixed = detail::clamped_mask(grid, 3, {0, 1, 2});
    K.eliminate(fixed);
    out.stats = solve_pcg(K, b, out.u, fixed, options);

    std::vector<double> Ku;
    K.multiply(out.u, Ku);
    std::vector<double> r(b.size()), bf(b);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] = fixed[i] ? 0.0 : b[i] - Ku[i];
        if (fixed[i])
            bf[i] = 0.0;
    }
    const double bn = norm2(bf);
    out.residual_norm = bn > 0.0 ? norm2(r) / bn : 0.0;
    out.energy = fine_energy(out.u, grid, out.materials);
    out.load_work = detail::load_work(grid, out.u, 3, f);
    return out;
}

Restriction rescaled_restriction(const std::vector<double>& u, const StructuredGrid& grid,
                                 const CompositeAssignment& materials, const std::function<double(const Vec3&)>& phi)
{
    require_field(u, grid);
    require_fibers(materials);
    const HexRule rule = hex_rule(grid, 2, 2, 2);
    Restriction out;
    const double t_volume = materials.fiber_volume(grid);
    for (std::size_t c = 0; c < 3; ++c) {
        auto integral = [&](bool weighted) {
            return detail::sum_over_elements(grid, [&](int i, int j, int k) {
                if (!materials.fiber[grid.element(i, j, k)])
                    return 0.0;
                const auto nodes = grid.element_nodes(i, j, k);
                const Vec3 origin = grid.coord(i, j, k);
                double acc = 0.0;
                for (std::size_t g = 0; g < rule.size(); ++g) {
                    double val = 0.0;
                    for (std::size_t a = 0; a < 8; ++a)
                        val += rule.N[g][a] * u[3 * nodes[a] + c];
                    acc += rule.weight[g] * val * (weighted ? phi(origin + rule.offset[g]) : 1.0);
                }
                return acc;
            });
        };
        out.value[c] = grid.volume() / t_volume * integral(true);
        out.fiber_average[c] = integral(false) / t_volume;
    }
    return out;
}

double end_ramp(double x3, double epsilon) { return std::clamp((x3 - epsilon) / epsilon, 0.0, 1.0); }

Vec3 fiber_recovery(const SmoothField& v, const Vec3& x, const FiberLayout& layout, const LameCoefficients& fiber)
{
    const FiberHit hit = nearest_fiber(layout, x[0], x[1]);
    const Vec2 c = layout.centers[hit.index];
    const Vec3 axis{c[0], c[1], x[2]};
    const Vec3 va = v.value(axis);
    const Mat3 dv = v.gradient(axis);
    const double d1 = x[0] - c[0];
    const double d2 = x[1] - c[1];
    const double nu = fiber.lambda / (2.0 * (fiber.mu + fiber.lambda));
    return {va[0] - nu * d1 * dv[2][2], va[1] - nu * d2 * dv[2][2], va[2] - d1 * dv[0][2] - d2 * dv[1][2]};
}

std::vector<double> interpolate_field(const SmoothField& f, const StructuredGrid& grid)
{
    std::vector<double> out(3 * grid.n_nodes());
    parallel_chunks(grid.n_nodes(), default_chunk, [&](std::size_t begin, std::size_t end) {
        for (std::size_t n = begin; n < end; ++n) {
            const Vec3 v = f.value(grid.coord(n));
            for (std::size_t c = 0; c < 3; ++c)
                out[3 * n + c] = v[c];
        }
    });
    return out;
}

std::vector<double> recovery_field(const SmoothField& u, const SmoothField& v, const StructuredGrid& grid,
                                   const FiberLayout& layout, const LameCoefficients& base,
                                   const LameCoefficients& fiber)
{
    if (!u.value || !v.value || !v.gradient)
        throw PreconditionError("recovery_field: u needs values, v needs values and gradients");
    for (int j = 0; j < grid.ny; ++j) {
        for (int i = 0; i < grid.nx; ++i) {
            const Vec3 x = grid.coord(i, j, 0);
            if (norm(u.value(x)) > 1e-12 || norm(v.value(x)) > 1e-12)
                throw PreconditionError(
                    fmt::format("recovery_field: u and v must vanish on x3 = 0 (violated at ({}, {}))", x[0], x[1]));
        }
    }
    std::vector<double> out(3 * grid.n_nodes());
    parallel_chunks(grid.n_nodes(), default_chunk, [&](std::size_t begin, std::size_t end) {
        for (std::size_t n = begin; n < end; ++n) {
            const Vec3 x = grid.coord(n);
            Vec3 val = u.value(x);
            const double psi = end_ramp(x[2], layout.epsilon);
            if (psi > 0.0 && nearest_fiber(layout, x[0], x[1]).distance < layout.support) {
                const Vec3 R = fiber_recovery(v, x, layout, fiber);
                Vec3 corr{};
                for (int m = 1; m <= 3; ++m) {
                    const std::size_t mi = static_cast<std::size_t>(m - 1);
                    corr = corr + (val[mi] - R[mi]) * corrector_z(x, m, layout, base);
                }
                val = val + (-psi) * corr;
            }
            for (std::size_t c = 0; c < 3; ++c)
                out[3 * n + c] = val[c];
        }
    });
    return out;
}

double recovery_energy(const SmoothField& u, const SmoothField& v, const StructuredGrid& grid,
                       const FiberLayout& layout, const LameCoefficients& base, const LameCoefficients& fiber)
{
    check_resolution(grid, layout);
    const std::vector<double> field = recovery_field(u, v, grid, layout, base, fiber);
    return fine_energy(field, grid, assign_materials(grid, layout, base, fiber));
}

double korn_ratio(const std::vector<double>& u, const StructuredGrid& grid, const CompositeAssignment& materials,
                  const FiberLayout& layout)
{
    require_field(u, grid);
    require_fibers(materials);
    const HexRule rule = hex_rule(grid, 2, 2, 2);
    const double lhs = detail::sum_over_elements(grid, [&](int i, int j, int k) {
        if (!materials.fiber[grid.element(i, j, k)])
            return 0.0;
        const auto nodes = grid.element_nodes(i, j, k);
        double acc = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g)
            for (std::size_t c = 0; c < 3; ++c) {
                double val = 0.0;
                for (std::size_t a = 0; a < 8; ++a)
                    val += rule.N[g][a] * u[3 * nodes[a] + c];
                acc += rule.weight[g] * val * val;
            }
        return acc;
    }) / materials.fiber_volume(grid);
    if (lhs == 0.0)
        return 0.0;
    const double grad2 = detail::sum_over_elements(grid, [&](int i, int j, int k) {
        const auto nodes = grid.element_nodes(i, j, k);
        double acc = 0.0;
        for (std::size_t g = 0; g < rule.size(); ++g) {
            const Mat3 G = detail::displacement_gradient(nodes, rule.dN[g], u, 3);
            for (const auto& row : G)
                for (double d : row)
                    acc += rule.weight[g] * d * d;
        }
        return acc;
    });
    const double eps2 = layout.epsilon * layout.epsilon;
    return lhs / (grad2 - eps2 * std::log(layout.radius) + eps2);
}

} // namespace reinforce
