#pragma once

#include "reinforce/grid.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace reinforce {

/// Symmetric operator on a structured grid stored as a 27-point stencil of
/// dense blocks: every node couples to its neighbours (i+di, j+dj, k+dk),
/// di, dj, dk in {-1, 0, 1}, through a block x block matrix.
///
/// Dof numbering is node * block + component.
class BlockStencilMatrix {
public:
    BlockStencilMatrix(const StructuredGrid& grid, int block);

    static constexpr int centre_slot = 13;
    static constexpr int slot(int di, int dj, int dk) noexcept { return (di + 1) + 3 * (dj + 1) + 9 * (dk + 1); }

    int block() const noexcept { return block_; }
    std::size_t n_nodes() const noexcept { return n_nodes_; }
    std::size_t size() const noexcept { return n_nodes_ * static_cast<std::size_t>(block_); }
    const StructuredGrid& grid() const noexcept { return grid_; }

    /// Row-major block coupling `node` to its neighbour in `slot`.
    double* block_data(std::size_t node, int slot) noexcept
    {
        return values_.data() + (node * 27 + static_cast<std::size_t>(slot)) * block_sq_;
    }
    const double* block_data(std::size_t node, int slot) const noexcept
    {
        return values_.data() + (node * 27 + static_cast<std::size_t>(slot)) * block_sq_;
    }

    /// y = A x.
    void multiply(const std::vector<double>& x, std::vector<double>& y) const;

    /// Decouples the flagged dofs: their rows and columns are cleared and the diagonal set to one.
    void eliminate(const std::vector<char>& fixed);

    /// Dense copy, for small systems in tests.
    std::vector<double> to_dense() const;

private:
    StructuredGrid grid_;
    int block_;
    std::size_t block_sq_;
    std::size_t n_nodes_;
    std::vector<double> values_;
};

/// Element matrix callback: fills the (8 block)^2 row-major matrix of element
/// (i, j, k); local dof index is local_node * block + component.
using ElementMatrixFn = std::function<void(int i, int j, int k, std::vector<double>& Ke)>;
/// Element load callback: fills the 8 block vector of element (i, j, k).
using ElementVectorFn = std::function<void(int i, int j, int k, std::vector<double>& Fe)>;

/// Adds all element matrices. Elements are processed in eight colour classes
/// (parity of i, j, k) so writes never collide and the summation order per
/// entry is fixed.
void assemble_matrix(const ElementMatrixFn& element, BlockStencilMatrix& A);
void assemble_vector(const StructuredGrid& grid, int block, const ElementVectorFn& element, std::vector<double>& F);

enum class Preconditioner {
    /// Inverse of the node diagonal blocks.
    BlockJacobi,
    /// Exact solve of each x3 grid line (all dofs of the nodes (i, j, *)); for
    /// operators dominated by x3 derivatives such as the fiber bending term.
    LineX3,
};

struct SolverOptions {
    double tolerance = 1e-10;
    /// Zero selects 50 sqrt(free dofs).
    std::size_t max_iterations = 0;
    Preconditioner preconditioner = Preconditioner::BlockJacobi;
};

struct SolveStats {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    /// Relative residual before the first and after every iteration.
    std::vector<double> history;
};

/// Preconditioned conjugate gradients on the free dofs.
///
/// x is the initial guess (resized with zeros); fixed dofs of x are set to zero.
/// Throws SolverError when the iteration cap is reached before the relative residual drops below the tolerance.
SolveStats solve_pcg(const BlockStencilMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                     const std::vector<char>& fixed, const SolverOptions& options);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

} // namespace reinforce
