#pragma once

// CSR sparse matrices and a Jacobi-preconditioned conjugate gradient solver.
// Summation orders are fixed (ascending column per row, plain loops for dots)
// so repeated runs reproduce results bitwise.

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "gpgf/common.hpp"

namespace gpgf {

struct SparseMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<int> row_offsets;   // size n_rows + 1
    std::vector<int> col_indices;   // strictly increasing within each row
    std::vector<double> values;
    bool symmetric = false;

    int nnz() const { return static_cast<int>(col_indices.size()); }
};

struct SolveReport {
    int iterations = 0;
    double final_residual = 0.0;  // relative 2-norm
    bool converged = false;
};

enum class Precond { none, jacobi };

// Row-map accumulator; emits a CSR with sorted columns.
class TripletAccumulator {
public:
    explicit TripletAccumulator(int n_rows, int n_cols)
        : n_rows_(n_rows), n_cols_(n_cols), rows_(n_rows) {}

    void add(int i, int j, double v) { rows_[i][j] += v; }

    SparseMatrix to_csr(bool symmetric) const {
        SparseMatrix m;
        m.n_rows = n_rows_;
        m.n_cols = n_cols_;
        m.symmetric = symmetric;
        m.row_offsets.reserve(n_rows_ + 1);
        m.row_offsets.push_back(0);
        for (const auto& row : rows_) {
            for (const auto& [j, v] : row) {
                m.col_indices.push_back(j);
                m.values.push_back(v);
            }
            m.row_offsets.push_back(static_cast<int>(m.col_indices.size()));
        }
        return m;
    }

private:
    int n_rows_, n_cols_;
    std::vector<std::map<int, double>> rows_;
};

inline std::vector<double> spmv(const SparseMatrix& a, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != a.n_cols)
        throw DimensionMismatch("spmv: vector length " + std::to_string(x.size()) +
                                " != n_cols " + std::to_string(a.n_cols));
    std::vector<double> y(a.n_rows, 0.0);
    for (int i = 0; i < a.n_rows; ++i) {
        double s = 0.0;
        for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
            s += a.values[k] * x[a.col_indices[k]];
        y[i] = s;
    }
    return y;
}

inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

// z = x + alpha*y
inline void axpy(std::vector<double>& x, double alpha, const std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += alpha * y[i];
}

inline void scale(std::vector<double>& x, double alpha) {
    for (auto& v : x) v *= alpha;
}

// Same-pattern linear combination alpha*A + beta*B. Both operands must come
// from the same assembly loop (identical sparsity).
inline SparseMatrix csr_combine(double alpha, const SparseMatrix& a, double beta,
                                const SparseMatrix& b) {
    if (a.n_rows != b.n_rows || a.n_cols != b.n_cols || a.row_offsets != b.row_offsets ||
        a.col_indices != b.col_indices)
        throw DimensionMismatch("csr_combine: sparsity patterns differ");
    SparseMatrix c = a;
    for (std::size_t k = 0; k < c.values.size(); ++k)
        c.values[k] = alpha * a.values[k] + beta * b.values[k];
    c.symmetric = a.symmetric && b.symmetric;
    return c;
}

inline std::pair<std::vector<double>, SolveReport> cg_solve(
    const SparseMatrix& a, const std::vector<double>& b, double tol = 1e-10,
    int max_iter = 2000, Precond precond = Precond::jacobi,
    const std::vector<double>* x0 = nullptr) {
    if (static_cast<int>(b.size()) != a.n_rows)
        throw DimensionMismatch("cg_solve: rhs length mismatch");

    const int n = a.n_rows;
    const double bnorm = norm2(b);
    SolveReport rep;
    if (bnorm == 0.0) {
        rep.converged = true;
        return {std::vector<double>(n, 0.0), rep};
    }

    std::vector<double> diag_inv(n, 1.0);
    if (precond == Precond::jacobi) {
        for (int i = 0; i < n; ++i)
            for (int k = a.row_offsets[i]; k < a.row_offsets[i + 1]; ++k)
                if (a.col_indices[k] == i && a.values[k] != 0.0) diag_inv[i] = 1.0 / a.values[k];
    }

    std::vector<double> x = x0 ? *x0 : std::vector<double>(n, 0.0);
    std::vector<double> r = b;
    if (x0) {
        auto ax = spmv(a, x);
        for (int i = 0; i < n; ++i) r[i] -= ax[i];
    }
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) z[i] = diag_inv[i] * r[i];
    std::vector<double> p = z;
    double rz = dot(r, z);
    double rnorm = norm2(r);

    for (int it = 0; it < max_iter; ++it) {
        if (rnorm / bnorm <= tol) {
            rep.iterations = it;
            rep.final_residual = rnorm / bnorm;
            rep.converged = true;
            return {x, rep};
        }
        auto ap = spmv(a, p);
        const double pap = dot(p, ap);
        if (!std::isfinite(pap) || pap <= 0.0)
            throw NonFiniteValue("cg_solve: non-SPD or non-finite curvature");
        const double alpha = rz / pap;
        axpy(x, alpha, p);
        axpy(r, -alpha, ap);
        for (int i = 0; i < n; ++i) z[i] = diag_inv[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        rz = rz_new;
        rnorm = norm2(r);
        if (!std::isfinite(rnorm)) throw NonFiniteValue("cg_solve: residual not finite");
    }
    rep.iterations = max_iter;
    rep.final_residual = rnorm / bnorm;
    rep.converged = rnorm / bnorm <= tol;
    return {x, rep};
}

}  // namespace gpgf
