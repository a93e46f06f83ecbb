#include "reinforce/sparse.hpp"

#include "reinforce/errors.hpp"
#include "reinforce/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

namespace reinforce {

BlockStencilMatrix::BlockStencilMatrix(const StructuredGrid& grid, int block)
    : grid_(grid), block_(block), block_sq_(static_cast<std::size_t>(block) * static_cast<std::size_t>(block)),
      n_nodes_(grid.n_nodes()), values_(n_nodes_ * 27 * block_sq_, 0.0)
{
    if (block < 1)
        throw PreconditionError("BlockStencilMatrix: block size must be positive");
}

namespace {

// Calls f(slot, neighbour) for every in-range neighbour of node (i, j, k).
template <class F>
void for_each_neighbour(const StructuredGrid& g, int i, int j, int k, F&& f)
{
    for (int dk = -1; dk <= 1; ++dk) {
        if (k + dk < 0 || k + dk >= g.nz)
            continue;
        for (int dj = -1; dj <= 1; ++dj) {
            if (j + dj < 0 || j + dj >= g.ny)
                continue;
            for (int di = -1; di <= 1; ++di) {
                if (i + di < 0 || i + di >= g.nx)
                    continue;
                f(BlockStencilMatrix::slot(di, dj, dk), g.node(i + di, j + dj, k + dk));
            }
        }
    }
}

} // namespace

void BlockStencilMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const
{
    y.assign(size(), 0.0);
    const std::size_t bs = static_cast<std::size_t>(block_);
    parallel_chunks(n_nodes_, 1024, [&](std::size_t begin, std::size_t end) {
        for (std::size_t n = begin; n < end; ++n) {
            const auto [i, j, k] = grid_.node_ijk(n);
            double* yr = y.data() + n * bs;
            for_each_neighbour(grid_, i, j, k, [&](int s, std::size_t m) {
                const double* blk = block_data(n, s);
                const double* xm = x.data() + m * bs;
                for (std::size_t r = 0; r < bs; ++r) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < bs; ++c)
                        acc += blk[r * bs + c] * xm[c];
                    yr[r] += acc;
                }
            });
        }
    });
}

void BlockStencilMatrix::eliminate(const std::vector<char>& fixed)
{
    if (fixed.size() != size())
        throw PreconditionError("eliminate: mask size does not match the operator");
    const std::size_t bs = static_cast<std::size_t>(block_);
    parallel_chunks(n_nodes_, 1024, [&](std::size_t begin, std::size_t end) {
        for (std::size_t n = begin; n < end; ++n) {
            const auto [i, j, k] = grid_.node_ijk(n);
            for_each_neighbour(grid_, i, j, k, [&](int s, std::size_t m) {
                double* blk = block_data(n, s);
                for (std::size_t r = 0; r < bs; ++r) {
                    for (std::size_t c = 0; c < bs; ++c) {
                        if (fixed[n * bs + r] || fixed[m * bs + c])
                            blk[r * bs + c] = 0.0;
                    }
                }
                if (s == centre_slot) {
                    for (std::size_t r = 0; r < bs; ++r)
                        if (fixed[n * bs + r])
                            blk[r * bs + r] = 1.0;
                }
            });
        }
    });
}

std::vector<double> BlockStencilMatrix::to_dense() const
{
    const std::size_t n = size();
    const std::size_t bs = static_cast<std::size_t>(block_);
    std::vector<double> dense(n * n, 0.0);
    for (std::size_t row = 0; row < n_nodes_; ++row) {
        const auto [i, j, k] = grid_.node_ijk(row);
        for_each_neighbour(grid_, i, j, k, [&](int s, std::size_t m) {
            const double* blk = block_data(row, s);
            for (std::size_t r = 0; r < bs; ++r)
                for (std::size_t c = 0; c < bs; ++c)
                    dense[(row * bs + r) * n + m * bs + c] = blk[r * bs + c];
        });
    }
    return dense;
}

namespace {

// Element lists per colour class (parity of i, j, k).
std::array<std::vector<std::array<int, 3>>, 8> colour_classes(const StructuredGrid& g)
{
    std::array<std::vector<std::array<int, 3>>, 8> classes;
    for (int k = 0; k < g.ez(); ++k)
        for (int j = 0; j < g.ey(); ++j)
            for (int i = 0; i < g.ex(); ++i)
                classes[static_cast<std::size_t>((i & 1) + 2 * (j & 1) + 4 * (k & 1))].push_back({i, j, k});
    return classes;
}

} // namespace

void assemble_matrix(const ElementMatrixFn& element, BlockStencilMatrix& A)
{
    const StructuredGrid& g = A.grid();
    const std::size_t bs = static_cast<std::size_t>(A.block());
    const std::size_t ne = 8 * bs;
    for (const auto& cls : colour_classes(g)) {
        parallel_chunks(cls.size(), 64, [&](std::size_t begin, std::size_t end) {
            std::vector<double> Ke(ne * ne);
            for (std::size_t e = begin; e < end; ++e) {
                const auto [i, j, k] = cls[e];
                std::fill(Ke.begin(), Ke.end(), 0.0);
                element(i, j, k, Ke);
                const auto nodes = g.element_nodes(i, j, k);
                for (int a = 0; a < 8; ++a) {
                    for (int b = 0; b < 8; ++b) {
                        const int s = BlockStencilMatrix::slot((b & 1) - (a & 1), ((b >> 1) & 1) - ((a >> 1) & 1),
                                                               ((b >> 2) & 1) - ((a >> 2) & 1));
                        double* blk = A.block_data(nodes[static_cast<std::size_t>(a)], s);
                        for (std::size_t r = 0; r < bs; ++r)
                            for (std::size_t c = 0; c < bs; ++c)
                                blk[r * bs + c] +=
                                    Ke[(static_cast<std::size_t>(a) * bs + r) * ne + static_cast<std::size_t>(b) * bs + c];
                    }
                }
            }
        });
    }
}

void assemble_vector(const StructuredGrid& g, int block, const ElementVectorFn& element, std::vector<double>& F)
{
    const std::size_t bs = static_cast<std::size_t>(block);
    F.assign(g.n_nodes() * bs, 0.0);
    for (const auto& cls : colour_classes(g)) {
        parallel_chunks(cls.size(), 64, [&](std::size_t begin, std::size_t end) {
            std::vector<double> Fe(8 * bs);
            for (std::size_t e = begin; e < end; ++e) {
                const auto [i, j, k] = cls[e];
                std::fill(Fe.begin(), Fe.end(), 0.0);
                element(i, j, k, Fe);
                const auto nodes = g.element_nodes(i, j, k);
                for (std::size_t a = 0; a < 8; ++a)
                    for (std::size_t r = 0; r < bs; ++r)
                        F[nodes[a] * bs + r] += Fe[a * bs + r];
            }
        });
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    return parallel_sum(a.size(), [&](std::size_t begin, std::size_t end) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i)
            s += a[i] * b[i];
        return s;
    });
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

namespace {

// In-place inverse of a small SPD-ish block by Gauss-Jordan with partial pivoting.
void invert_block(double* m, std::size_t n)
{
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        inv[i * n + i] = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(m[r * n + col]) > std::abs(m[piv * n + col]))
                piv = r;
        if (m[piv * n + col] == 0.0)
            throw SolverError("preconditioner: singular diagonal block", {});
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) {
                std::swap(m[piv * n + c], m[col * n + c]);
                std::swap(inv[piv * n + c], inv[col * n + c]);
            }
        }
        const double d = 1.0 / m[col * n + col];
        for (std::size_t c = 0; c < n; ++c) {
            m[col * n + c] *= d;
            inv[col * n + c] *= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col)
                continue;
            const double f = m[r * n + col];
            if (f == 0.0)
                continue;
            for (std::size_t c = 0; c < n; ++c) {
                m[r * n + c] -= f * m[col * n + c];
                inv[r * n + c] -= f * inv[col * n + c];
            }
        }
    }
    std::copy(inv.begin(), inv.end(), m);
}

// Cholesky factors of the banded matrices of the x3 grid lines.
class LineFactors {
public:
    explicit LineFactors(const BlockStencilMatrix& A)
        : g_(A.grid()), bs_(static_cast<std::size_t>(A.block())), m_(static_cast<std::size_t>(g_.nz) * bs_),
          w_(2 * bs_ - 1), lines_(static_cast<std::size_t>(g_.nx) * static_cast<std::size_t>(g_.ny)),
          band_(lines_ * m_ * (w_ + 1), 0.0)
    {
        parallel_chunks(lines_, 16, [&](std::size_t begin, std::size_t end) {
            for (std::size_t line = begin; line < end; ++line)
                factor(A, line);
        });
    }

    void apply(const std::vector<double>& r, std::vector<double>& z) const
    {
        parallel_chunks(lines_, 16, [&](std::size_t begin, std::size_t end) {
            std::vector<double> y(m_);
            for (std::size_t line = begin; line < end; ++line) {
                const double* L = band_.data() + line * m_ * (w_ + 1);
                for (std::size_t i = 0; i < m_; ++i) {
                    double s = r[dof(line, i)];
                    const std::size_t lo = i > w_ ? i - w_ : 0;
                    for (std::size_t k = lo; k < i; ++k)
                        s -= at(L, i, k) * y[k];
                    y[i] = s / at(L, i, i);
                }
                for (std::size_t ii = m_; ii-- > 0;) {
                    double s = y[ii];
                    const std::size_t hi = std::min(m_ - 1, ii + w_);
                    for (std::size_t k = ii + 1; k <= hi; ++k)
                        s -= at(L, k, ii) * y[k];
                    y[ii] = s / at(L, ii, ii);
                }
                for (std::size_t i = 0; i < m_; ++i)
                    z[dof(line, i)] = y[i];
            }
        });
    }

private:
    StructuredGrid g_;
    std::size_t bs_, m_, w_, lines_;
    std::vector<double> band_;

    // Entry (i, j), j <= i <= j + w, of a line's lower band.
    double& at(double* L, std::size_t i, std::size_t j) const { return L[i * (w_ + 1) + (i - j)]; }
    double at(const double* L, std::size_t i, std::size_t j) const { return L[i * (w_ + 1) + (i - j)]; }

    std::size_t dof(std::size_t line, std::size_t i) const
    {
        const int ii = static_cast<int>(line % static_cast<std::size_t>(g_.nx));
        const int jj = static_cast<int>(line / static_cast<std::size_t>(g_.nx));
        const int k = static_cast<int>(i / bs_);
        return g_.node(ii, jj, k) * bs_ + i % bs_;
    }

    void factor(const BlockStencilMatrix& A, std::size_t line)
    {
        double* L = band_.data() + line * m_ * (w_ + 1);
        // Lower band of the line matrix: blocks (k, k) and (k, k-1).
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t node_i = dof(line, i) / bs_;
            const std::size_t ci = i % bs_;
            const std::size_t lo = i > w_ ? i - w_ : 0;
            for (std::size_t j = lo; j <= i; ++j) {
                const std::size_t cj = j % bs_;
                const int dk = static_cast<int>(j / bs_) - static_cast<int>(i / bs_);
                at(L, i, j) = dk < -1 ? 0.0 : A.block_data(node_i, BlockStencilMatrix::slot(0, 0, dk))[ci * bs_ + cj];
            }
        }
        for (std::size_t i = 0; i < m_; ++i) {
            const std::size_t lo = i > w_ ? i - w_ : 0;
            for (std::size_t j = lo; j <= i; ++j) {
                double s = at(L, i, j);
                const std::size_t klo = std::max(lo, j > w_ ? j - w_ : 0);
                for (std::size_t k = klo; k < j; ++k)
                    s -= at(L, i, k) * at(L, j, k);
                if (i == j) {
                    if (!(s > 0.0))
                        throw SolverError(fmt::format("preconditioner: line matrix not positive definite at {} ({})", i, s), {});
                    at(L, i, i) = std::sqrt(s);
                } else {
                    at(L, i, j) = s / at(L, j, j);
                }
            }
        }
    }
};

} // namespace

SolveStats solve_pcg(const BlockStencilMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                     const std::vector<char>& fixed, const SolverOptions& options)
{
    const std::size_t n = A.size();
    if (b.size() != n || fixed.size() != n)
        throw PreconditionError("solve_pcg: vector sizes do not match the operator");
    const std::size_t bs = static_cast<std::size_t>(A.block());
    const std::size_t n_free = static_cast<std::size_t>(std::count(fixed.begin(), fixed.end(), 0));
    const std::size_t cap = options.max_iterations > 0
                                ? options.max_iterations
                                : static_cast<std::size_t>(std::ceil(50.0 * std::sqrt(static_cast<double>(n_free))));

    const bool line = options.preconditioner == Preconditioner::LineX3;
    std::optional<LineFactors> lines;
    if (line)
        lines.emplace(A);
    // Block-Jacobi factors.
    std::vector<double> pinv(line ? 0 : A.n_nodes() * bs * bs);
    parallel_chunks(line ? 0 : A.n_nodes(), 1024, [&](std::size_t begin, std::size_t end) {
        for (std::size_t node = begin; node < end; ++node) {
            double* m = pinv.data() + node * bs * bs;
            std::copy_n(A.block_data(node, BlockStencilMatrix::centre_slot), bs * bs, m);
            invert_block(m, bs);
        }
    });
    auto precondition = [&](const std::vector<double>& r, std::vector<double>& z) {
        z.assign(n, 0.0);
        if (line) {
            lines->apply(r, z);
            for (std::size_t i = 0; i < n; ++i)
                if (fixed[i])
                    z[i] = 0.0;
            return;
        }
        parallel_chunks(A.n_nodes(), 1024, [&](std::size_t begin, std::size_t end) {
            for (std::size_t node = begin; node < end; ++node) {
                const double* m = pinv.data() + node * bs * bs;
                for (std::size_t i = 0; i < bs; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < bs; ++j)
                        acc += m[i * bs + j] * r[node * bs + j];
                    z[node * bs + i] = fixed[node * bs + i] ? 0.0 : acc;
                }
            }
        });
    };
    auto axpy_chunks = [&](auto&& body) { parallel_chunks(n, default_chunk, body); };

    SolveStats stats;
    x.resize(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        if (fixed[i])
            x[i] = 0.0;

    std::vector<double> rhs(b);
    for (std::size_t i = 0; i < n; ++i)
        if (fixed[i])
            rhs[i] = 0.0;
    const double b_norm = norm2(rhs);
    if (b_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return stats;
    }

    std::vector<double> r(n), z, p(n), q(n);
    A.multiply(x, q);
    axpy_chunks([&](std::size_t s, std::size_t e) {
        for (std::size_t i = s; i < e; ++i)
            r[i] = fixed[i] ? 0.0 : rhs[i] - q[i];
    });
    double res = norm2(r) / b_norm;
    stats.history.push_back(res);
    if (res <= options.tolerance) {
        stats.relative_residual = res;
        return stats;
    }
    precondition(r, z);
    p = z;
    double rz = dot(r, z);
    for (std::size_t it = 1; it <= cap; ++it) {
        A.multiply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0))
            throw SolverError(fmt::format("pcg: operator not positive definite (p'Ap = {})", pq), stats.history);
        const double alpha = rz / pq;
        axpy_chunks([&](std::size_t s, std::size_t e) {
            for (std::size_t i = s; i < e; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
        });
        res = norm2(r) / b_norm;
        stats.history.push_back(res);
        stats.iterations = it;
        stats.relative_residual = res;
        if (res <= options.tolerance)
            return stats;
        precondition(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        axpy_chunks([&](std::size_t s, std::size_t e) {
            for (std::size_t i = s; i < e; ++i)
                p[i] = z[i] + beta * p[i];
        });
    }
    throw SolverError(fmt::format("pcg: no convergence after {} iterations (relative residual {:.3e})", cap, res),
                      stats.history);
}

} // namespace reinforce
