#include "fe_kernels.hpp"

#include "reinforce/parallel.hpp"
#include "reinforce/quadrature.hpp"
#include "reinforce/sparse.hpp"

namespace reinforce::detail {

ElasticKernels elastic_kernels(const StructuredGrid& grid)
{
    ElasticKernels k;
    k.rule = hex_rule(grid, 2, 2, 2);
    k.K_lambda.assign(24 * 24, 0.0);
    k.K_mu.assign(24 * 24, 0.0);
    for (std::size_t g = 0; g < k.rule.size(); ++g) {
        const double w = k.rule.weight[g];
        const auto& dN = k.rule.dN[g];
        for (std::size_t a = 0; a < 8; ++a) {
            for (std::size_t b = 0; b < 8; ++b) {
                const double gg = dot(dN[a], dN[b]);
                for (std::size_t c = 0; c < 3; ++c) {
                    for (std::size_t d = 0; d < 3; ++d) {
                        const std::size_t idx = (3 * a + c) * 24 + 3 * b + d;
                        k.K_lambda[idx] += w * dN[a][c] * dN[b][d];
                        k.K_mu[idx] += w * ((c == d ? gg : 0.0) + dN[a][d] * dN[b][c]);
                    }
                }
            }
        }
    }
    return k;
}

void add_elastic(const ElasticKernels& k, double lambda, double mu, int block, std::vector<double>& Ke)
{
    const std::size_t bs = static_cast<std::size_t>(block);
    const std::size_t ne = 8 * bs;
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t b = 0; b < 8; ++b)
                for (std::size_t d = 0; d < 3; ++d) {
                    const std::size_t src = (3 * a + c) * 24 + 3 * b + d;
                    Ke[(a * bs + c) * ne + b * bs + d] += lambda * k.K_lambda[src] + mu * k.K_mu[src];
                }
}

Mat3 displacement_gradient(const std::array<std::size_t, 8>& nodes, const std::array<Vec3, 8>& dN,
                           const std::vector<double>& u, int stride)
{
    Mat3 g{};
    const std::size_t s = static_cast<std::size_t>(stride);
    for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t i = 0; i < 3; ++i) {
            const double ui = u[nodes[a] * s + i];
            for (std::size_t j = 0; j < 3; ++j)
                g[i][j] += ui * dN[a][j];
        }
    return g;
}

namespace {

struct Face {
    int axis;
    bool high;
};

// The five loaded faces: lateral sides and the free end.
constexpr Face kLoadedFaces[] = {{0, false}, {0, true}, {1, false}, {1, true}, {2, true}};

} // namespace

std::vector<double> assemble_load(const StructuredGrid& grid, int block, const BodyForce& f)
{
    const std::size_t bs = static_cast<std::size_t>(block);
    std::vector<double> F(grid.n_nodes() * bs, 0.0);
    if (f.is_zero())
        return F;
    if (f.field || !f.nodal.empty()) {
        const HexRule rule = hex_rule(grid, 2, 2, 2);
        assemble_vector(grid, block, [&](int i, int j, int k, std::vector<double>& Fe) {
            const Vec3 origin = grid.coord(i, j, k);
            for (std::size_t g = 0; g < rule.size(); ++g) {
                const Vec3 fx = f.at(grid, origin + rule.offset[g]);
                for (std::size_t a = 0; a < 8; ++a)
                    for (std::size_t c = 0; c < 3; ++c)
                        Fe[a * bs + c] += rule.weight[g] * rule.N[g][a] * fx[c];
            }
        }, F);
    }
    if (f.traction) {
        const QuadratureRule q = gauss_legendre(2, 0.0, 1.0);
        const double h[3] = {grid.hx, grid.hy, grid.hz};
        const int ne[3] = {grid.ex(), grid.ey(), grid.ez()};
        for (const Face& face : kLoadedFaces) {
            const int t1 = (face.axis + 1) % 3;
            const int t2 = (face.axis + 2) % 3;
            Vec3 normal{};
            normal[static_cast<std::size_t>(face.axis)] = face.high ? 1.0 : -1.0;
            const int fixed_index = face.high ? ne[face.axis] : 0;
            for (int p = 0; p < ne[t1]; ++p) {
                for (int s = 0; s < ne[t2]; ++s) {
                    int ijk[3];
                    ijk[face.axis] = fixed_index;
                    ijk[t1] = p;
                    ijk[t2] = s;
                    for (std::size_t g1 = 0; g1 < 2; ++g1) {
                        for (std::size_t g2 = 0; g2 < 2; ++g2) {
                            Vec3 x{};
                            x[static_cast<std::size_t>(face.axis)] = fixed_index * h[face.axis];
                            x[static_cast<std::size_t>(t1)] = (p + q.points[g1]) * h[t1];
                            x[static_cast<std::size_t>(t2)] = (s + q.points[g2]) * h[t2];
                            const Vec3 g = f.traction(x, normal);
                            const double w = q.weights[g1] * q.weights[g2] * h[t1] * h[t2];
                            for (int c1 = 0; c1 < 2; ++c1) {
                                for (int c2 = 0; c2 < 2; ++c2) {
                                    int node_ijk[3];
                                    node_ijk[face.axis] = ijk[face.axis];
                                    node_ijk[t1] = ijk[t1] + c1;
                                    node_ijk[t2] = ijk[t2] + c2;
                                    const double N = (c1 ? q.points[g1] : 1.0 - q.points[g1]) *
                                                     (c2 ? q.points[g2] : 1.0 - q.points[g2]);
                                    const std::size_t node = grid.node(node_ijk[0], node_ijk[1], node_ijk[2]);
                                    for (std::size_t c = 0; c < 3; ++c)
                                        F[node * bs + c] += w * N * g[c];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return F;
}

double load_work(const StructuredGrid& grid, const std::vector<double>& u, int stride, const BodyForce& f)
{
    if (f.is_zero())
        return 0.0;
    const std::vector<double> F = assemble_load(grid, 3, f);
    const std::size_t s = static_cast<std::size_t>(stride);
    return parallel_sum(grid.n_nodes(), [&](std::size_t begin, std::size_t end) {
        double acc = 0.0;
        for (std::size_t n = begin; n < end; ++n)
            for (std::size_t c = 0; c < 3; ++c)
                acc += F[3 * n + c] * u[n * s + c];
        return acc;
    });
}

std::vector<char> clamped_mask(const StructuredGrid& grid, int block, const std::vector<int>& fixed_components)
{
    const std::size_t bs = static_cast<std::size_t>(block);
    std::vector<char> mask(grid.n_nodes() * bs, 0);
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            for (int c : fixed_components)
                mask[grid.node(i, j, 0) * bs + static_cast<std::size_t>(c)] = 1;
    return mask;
}

double sum_over_elements(const StructuredGrid& grid, const std::function<double(int, int, int)>& element_term)
{
    return parallel_sum(grid.n_elements(), [&](std::size_t begin, std::size_t end) {
        double acc = 0.0;
        for (std::size_t e = begin; e < end; ++e) {
            const auto [i, j, k] = grid.element_ijk(e);
            acc += element_term(i, j, k);
        }
        return acc;
    });
}

} // namespace reinforce::detail
