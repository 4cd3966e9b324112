#pragma once

#include <cstddef>
#include <vector>

namespace dlab::linalg {

// Minimum-Euclidean-norm solution of the symmetric PSD system A x = b,
// computed by eigendecomposition with eigenvalues below rel_cut * lambda_max
// treated as zero. A is m*m row-major.
std::vector<double> min_norm_psd_solve(std::size_t m, const std::vector<double>& A, const std::vector<double>& b,
                                       double rel_cut = 1e-12);

// Rank-reduced form of a (possibly tall) equality system M a = f, M is
// rows x cols row-major. Produces `rank` independent rows over permuted
// columns: R beta = rhs with beta_i = a[col_perm[i]].
struct ReducedEqualities {
    std::size_t rank = 0;
    std::size_t cols = 0;
    std::vector<double> R;         // rank * cols, row-major, permuted column order
    std::vector<double> rhs;       // rank
    std::vector<int> col_perm;     // permuted column i corresponds to original column col_perm[i]
    bool consistent = false;       // f within the row space up to tolerance
    double rhs_residual = 0.0;     // max |component of f outside the range|
};

ReducedEqualities reduce_equalities(std::size_t rows, std::size_t cols, const std::vector<double>& M,
                                    const std::vector<double>& f, double tol = 1e-9);

}  // namespace dlab::linalg
