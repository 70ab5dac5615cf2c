#pragma once

// Generalized symmetric eigensolver for the linearized Gross-Pitaevskii
// operator: inverse iteration with M-orthogonal deflation for the two
// smallest eigenpairs, plus exponential decay-rate fitting for flow traces.

#include <cmath>
#include <random>
#include <vector>

#include "gpgf/fem.hpp"
#include "gpgf/flow.hpp"

namespace gpgf {

struct EigenResult {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    FeFunction vec1;
    FeFunction vec2;
    double residual1 = 0.0;  // relative 2-norm eigen-residual
    double residual2 = 0.0;
    bool degenerate_pair = false;  // lambda2 - lambda1 <= 1e-12
};

// L = A + weighted_mass(V) + beta * weighted_mass(phi_gs^2)
inline SparseMatrix linearized_operator(const AssembledOperators& ops, const ProblemSpec& spec,
                                        const FeFunction& phi_gs, const QuadratureRule& quad) {
    ScalarField density{[&phi_gs](const Vec3& x) {
                            const double v = evaluate(phi_gs, x);
                            return v * v;
                        },
                        nullptr, "gs_density"};
    SparseMatrix vmass = assemble_weighted_mass(*ops.mesh, spec.potential, quad);
    SparseMatrix l = csr_combine(1.0, ops.A, 1.0, vmass);
    if (spec.beta != 0.0) {
        SparseMatrix dmass = assemble_weighted_mass(*ops.mesh, density, quad);
        l = csr_combine(1.0, l, spec.beta, dmass);
    }
    return l;
}

namespace detail {

inline double m_dot(const SparseMatrix& m, const std::vector<double>& x,
                    const std::vector<double>& y) {
    return dot(x, spmv(m, y));
}

struct EigPair {
    double lambda = 0.0;
    std::vector<double> vec;
    double residual = 0.0;
    bool converged = false;
};

// Inverse iteration on (L, M); iterates are kept M-orthogonal to `deflate`
// (M-normalized) when given.
inline EigPair inverse_iteration(const SparseMatrix& l, const SparseMatrix& m, double tol,
                                 int max_iter, const std::vector<double>* deflate,
                                 unsigned seed) {
    const int n = l.n_rows;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& c : v) c = unif(rng);

    auto orthogonalize = [&](std::vector<double>& x) {
        if (!deflate) return;
        const double proj = m_dot(m, *deflate, x);
        axpy(x, -proj, *deflate);
    };
    auto normalize = [&](std::vector<double>& x) {
        const double nrm = std::sqrt(std::max(0.0, m_dot(m, x, x)));
        if (nrm <= 1e-300) throw SolverDiverged("inverse_iteration: degenerate iterate");
        scale(x, 1.0 / nrm);
    };

    orthogonalize(v);
    normalize(v);
    EigPair out;
    for (int it = 0; it < max_iter; ++it) {
        auto mv = spmv(m, v);
        auto [w, rep] = cg_solve(l, mv, 1e-12, 10000, Precond::jacobi, &v);
        if (!rep.converged) throw SolverDiverged("inverse_iteration: inner CG failed");
        orthogonalize(w);
        normalize(w);
        v = std::move(w);

        auto lv = spmv(l, v);
        mv = spmv(m, v);
        const double lambda = dot(v, lv) / dot(v, mv);
        double rsq = 0.0, lsq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = lv[i] - lambda * mv[i];
            rsq += r * r;
            lsq += lv[i] * lv[i];
        }
        out.lambda = lambda;
        out.residual = std::sqrt(rsq) / std::sqrt(lsq);
        if (out.residual <= tol) {
            out.converged = true;
            out.vec = std::move(v);
            return out;
        }
    }
    out.vec = std::move(v);
    return out;
}

}  // namespace detail

inline EigenResult smallest_two(const SparseMatrix& l, const SparseMatrix& m,
                                const AssembledOperators& ops, double tol = 1e-8,
                                int max_iter = 500) {
    auto p1 = detail::inverse_iteration(l, m, tol, max_iter, nullptr, 12345u);
    if (!p1.converged) throw SolverDiverged("smallest_two: first eigenpair did not converge");
    auto p2 = detail::inverse_iteration(l, m, tol, max_iter, &p1.vec, 67890u);
    if (!p2.converged) throw SolverDiverged("smallest_two: second eigenpair did not converge");
    if (p2.lambda < p1.lambda) std::swap(p1, p2);

    EigenResult out;
    out.lambda1 = p1.lambda;
    out.lambda2 = p2.lambda;
    out.residual1 = p1.residual;
    out.residual2 = p2.residual;
    out.vec1 = extend_interior(ops, p1.vec);
    out.vec2 = extend_interior(ops, p2.vec);
    out.degenerate_pair = (p2.lambda - p1.lambda) <= 1e-12;
    return out;
}

// Least-squares fit of value ~ C*exp(-r*t) over the trailing window_fraction
// of the samples above `floor`; returns r.
inline double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& values,
                             double floor = 1e-11, double window_fraction = 0.6) {
    if (times.size() != values.size()) throw DimensionMismatch("fit_decay_rate: size mismatch");
    std::vector<double> t, logv;
    for (std::size_t i = 0; i < times.size(); ++i)
        if (values[i] > floor) {
            t.push_back(times[i]);
            logv.push_back(std::log(values[i]));
        }
    const std::size_t usable = t.size();
    const std::size_t start = static_cast<std::size_t>(usable * (1.0 - window_fraction));
    if (usable - start < 5)
        throw InsufficientData("fit_decay_rate: fewer than 5 usable points");

    double st = 0.0, sv = 0.0, stt = 0.0, stv = 0.0;
    const double n = static_cast<double>(usable - start);
    for (std::size_t i = start; i < usable; ++i) {
        st += t[i];
        sv += logv[i];
        stt += t[i] * t[i];
        stv += t[i] * logv[i];
    }
    const double slope = (n * stv - st * sv) / (n * stt - st * st);
    return -slope;
}

}  // namespace gpgf
