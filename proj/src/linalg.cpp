#include "dlab/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace dlab::linalg {

std::vector<double> min_norm_psd_solve(std::size_t m, const std::vector<double>& A, const std::vector<double>& b,
                                       double rel_cut) {
    if (A.size() != m * m || b.size() != m) throw std::invalid_argument("min_norm_psd_solve: shape mismatch");
    Eigen::MatrixXd M(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = A[i * m + j];
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(m));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    if (eig.info() != Eigen::Success) throw std::runtime_error("min_norm_psd_solve: eigendecomposition failed");
    const Eigen::VectorXd& lam = eig.eigenvalues();
    const double lmax = lam.cwiseAbs().maxCoeff();
    const double cut = rel_cut * (lmax > 0.0 ? lmax : 1.0);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        if (lam(i) > cut) {
            const Eigen::VectorXd v = eig.eigenvectors().col(i);
            x += (v.dot(rhs) / lam(i)) * v;
        }
    }
    return std::vector<double>(x.data(), x.data() + m);
}

ReducedEqualities reduce_equalities(std::size_t rows, std::size_t cols, const std::vector<double>& M,
                                    const std::vector<double>& f, double tol) {
    if (M.size() != rows * cols || f.size() != rows) throw std::invalid_argument("reduce_equalities: shape mismatch");
    Eigen::MatrixXd G(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            G(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = M[i * cols + j];
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(rows));

    // G * P = Q * R; constraints become R_r (P^T a) = (Q^T b)_r, rows past the
    // rank must vanish for the system to be consistent.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(G);
    qr.setThreshold(1e-12);
    const auto rank = static_cast<std::size_t>(qr.rank());

    Eigen::VectorXd qtb = qr.householderQ().transpose() * b;
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();

    ReducedEqualities out;
    out.rank = rank;
    out.cols = cols;
    out.col_perm.resize(cols);
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t j = 0; j < cols; ++j) out.col_perm[j] = perm(static_cast<Eigen::Index>(j));

    Eigen::MatrixXd R = qr.matrixR().topRows(static_cast<Eigen::Index>(std::min(rows, cols)))
                            .template triangularView<Eigen::Upper>();
    out.R.assign(rank * cols, 0.0);
    for (std::size_t i = 0; i < rank; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            out.R[i * cols + j] = R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    out.rhs.assign(qtb.data(), qtb.data() + rank);

    double resid = 0.0;
    for (std::size_t i = rank; i < rows; ++i) resid = std::max(resid, std::abs(qtb(static_cast<Eigen::Index>(i))));
    out.rhs_residual = resid;
    out.consistent = resid <= tol * scale;
    return out;
}

}  // namespace dlab::linalg
