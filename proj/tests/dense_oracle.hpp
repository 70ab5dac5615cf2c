#pragma once

// Test-only dense oracles backed by Eigen; independent of the CSR/CG path
// they are used to verify.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "gpgf/linalg.hpp"

namespace gpgf::test {

inline Eigen::MatrixXd to_dense(const SparseMatrix& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.n_rows, a.n_cols);
    for (int i = 0; i < a.n_rows; ++i)
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            m(i, a.col_indices[k]) = a.values[k];
    return m;
}

inline std::vector<double> dense_solve(const SparseMatrix& a, const std::vector<double>& b) {
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
    Eigen::VectorXd x = to_dense(a).fullPivLu().solve(rhs);
    return {x.data(), x.data() + x.size()};
}

inline bool dense_spd(const SparseMatrix& a) {
    Eigen::LLT<Eigen::MatrixXd> llt(to_dense(a));
    return llt.info() == Eigen::Success;
}

// Ascending generalized eigenvalues of A x = lambda M x.
inline std::vector<double> dense_generalized_eigenvalues(const SparseMatrix& a,
                                                         const SparseMatrix& m) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(to_dense(a), to_dense(m));
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

}  // namespace gpgf::test
