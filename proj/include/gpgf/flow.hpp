#pragma once

// The L2-normalized gradient flow: chemical potential, energy, the normalized
// implicit-explicit step (backward Euler in the Laplacian, explicit potential,
// nonlinearity and chemical-potential terms, then exact renormalization) and
// the time loop.

#include <cmath>
#include <functional>
#include <vector>

#include "gpgf/fem.hpp"

namespace gpgf {

struct ProblemSpec {
    BoxDomain domain;
    double beta = 0.0;         // interaction strength, >= 0
    ScalarField potential;     // V
    ScalarField initial;       // phi0 before projection/normalization
};

struct TimeGrid {
    double tau = 0.0;
    double t_end = 0.0;
    int n_steps = 0;

    static TimeGrid from(double tau, double t_end) {
        TimeGrid g;
        g.tau = tau;
        g.t_end = t_end;
        g.n_steps = static_cast<int>(std::llround(t_end / tau));
        if (std::abs(g.n_steps * tau - t_end) > 1e-12 * std::max(1.0, t_end))
            throw Error("TimeGrid: t_end is not an integer multiple of tau");
        return g;
    }
};

struct StopRule {
    double residual_tol = 1e-8;
    int max_steps = 100000;
};

struct FlowState {
    FeFunction phi;
    int step = 0;
    double mu = 0.0;
    double energy = 0.0;
};

struct TraceRow {
    int step;
    double t;
    double mu;
    double energy;
    double mass;        // ||phi||_{L2} after the step
    double residual;    // ||phi^{n+1} - phi^n||_{L2} / tau
    double tilde_norm;  // ||phi~^{n+1}||_{L2} before renormalization
};

using FlowTrace = std::vector<TraceRow>;

struct StepDiagnostics {
    double tilde_norm = 0.0;
    double residual = 0.0;
    int cg_iterations = 0;
};

// Sign of the mu[phi^n](phi^n, v) term on the right-hand side. The flow model
// carries +mu; `minus` exists only so tests can demonstrate that the opposite
// sign breaks the eigenvector fixed point.
enum class MuSign { plus, minus };

struct FlowOptions {
    double cg_tol = 1e-10;
    int cg_max_iter = 5000;
    MuSign mu_sign = MuSign::plus;
};

namespace detail {

// integral of V*phi^2 over the mesh by per-element quadrature.
inline double weighted_square_integral(const AssembledOperators& ops, const ScalarField& w,
                                       const QuadratureRule& quad, const FeFunction& u) {
    const Mesh& mesh = *ops.mesh;
    const int nv = mesh.dim() + 1;
    double s = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double vol = element_volume(mesh, e);
        for (int q = 0; q < quad.size(); ++q) {
            double val = 0.0;
            for (int i = 0; i < nv; ++i)
                val += quad.points[q][i] * u.coeffs[mesh.elements[e][i]];
            const Vec3 x = quad_point(mesh, e, quad.points[q]);
            s += vol * quad.weights[q] * w.value(x) * val * val;
        }
    }
    return s;
}

inline double quartic_integral(const AssembledOperators& ops, const QuadratureRule& quad,
                               const FeFunction& u) {
    const Mesh& mesh = *ops.mesh;
    const int nv = mesh.dim() + 1;
    double s = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double vol = element_volume(mesh, e);
        for (int q = 0; q < quad.size(); ++q) {
            double val = 0.0;
            for (int i = 0; i < nv; ++i)
                val += quad.points[q][i] * u.coeffs[mesh.elements[e][i]];
            s += vol * quad.weights[q] * val * val * val * val;
        }
    }
    return s;
}

// Interior load with entries -int(V phi phi_i) - beta*int(phi^3 phi_i).
inline std::vector<double> nonlinear_load(const AssembledOperators& ops,
                                          const ProblemSpec& spec, const QuadratureRule& quad,
                                          const FeFunction& phi) {
    const Mesh& mesh = *ops.mesh;
    const int nv = mesh.dim() + 1;
    std::vector<double> b(ops.n_interior(), 0.0);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double vol = element_volume(mesh, e);
        for (int q = 0; q < quad.size(); ++q) {
            double val = 0.0;
            for (int i = 0; i < nv; ++i)
                val += quad.points[q][i] * phi.coeffs[mesh.elements[e][i]];
            const Vec3 x = quad_point(mesh, e, quad.points[q]);
            const double f = -spec.potential.value(x) * val - spec.beta * val * val * val;
            const double fw = vol * quad.weights[q] * f;
            for (int i = 0; i < nv; ++i) {
                const int gi = ops.interior_of_vertex[mesh.elements[e][i]];
                if (gi >= 0) b[gi] += fw * quad.points[q][i];
            }
        }
    }
    return b;
}

}  // namespace detail

inline double chemical_potential(const FeFunction& phi, const AssembledOperators& ops,
                                 const ProblemSpec& spec, const QuadratureRule& quad) {
    auto pi = restrict_interior(ops, phi);
    const double msq = dot(pi, spmv(ops.M, pi));
    if (std::sqrt(std::max(0.0, msq)) <= 1e-14)
        throw ZeroState("chemical_potential: zero state");
    const double grad = dot(pi, spmv(ops.A, pi));
    const double pot = detail::weighted_square_integral(ops, spec.potential, quad, phi);
    const double quart = detail::quartic_integral(ops, quad, phi);
    return (grad + pot + spec.beta * quart) / msq;
}

inline double energy(const FeFunction& phi, const AssembledOperators& ops,
                     const ProblemSpec& spec, const QuadratureRule& quad) {
    auto pi = restrict_interior(ops, phi);
    const double grad = dot(pi, spmv(ops.A, pi));
    const double pot = detail::weighted_square_integral(ops, spec.potential, quad, phi);
    const double quart = detail::quartic_integral(ops, quad, phi);
    return 0.5 * grad + 0.5 * pot + 0.25 * spec.beta * quart;
}

inline double mass_norm(const AssembledOperators& ops, const FeFunction& phi) {
    auto pi = restrict_interior(ops, phi);
    return std::sqrt(std::max(0.0, dot(pi, spmv(ops.M, pi))));
}

inline FlowState initial_state(const ProblemSpec& spec, const Mesh& mesh,
                               const AssembledOperators& ops, const QuadratureRule& quad,
                               double cg_tol = 1e-10) {
    FeFunction proj = ritz_project(mesh, spec.initial, ops, quad, cg_tol);
    const double nrm = mass_norm(ops, proj);
    if (nrm <= 1e-14) throw ZeroState("initial_state: Ritz projection of phi0 is zero");
    for (auto& c : proj.coeffs) c /= nrm;
    FlowState s;
    s.phi = std::move(proj);
    s.step = 0;
    s.mu = chemical_potential(s.phi, ops, spec, quad);
    s.energy = energy(s.phi, ops, spec, quad);
    return s;
}

inline std::pair<FlowState, StepDiagnostics> flow_step(const FlowState& state,
                                                       const AssembledOperators& ops,
                                                       const ProblemSpec& spec,
                                                       const QuadratureRule& quad, double tau,
                                                       const FlowOptions& opts = {}) {
    if (tau <= 0.0) throw Error("flow_step: tau must be positive");
    const SparseMatrix system = csr_combine(1.0 / tau, ops.M, 1.0, ops.A);

    auto pi = restrict_interior(ops, state.phi);
    auto mphi = spmv(ops.M, pi);
    auto rhs = detail::nonlinear_load(ops, spec, quad, state.phi);
    const double mu_coef =
        (opts.mu_sign == MuSign::plus ? state.mu : -state.mu) + 1.0 / tau;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += mu_coef * mphi[i];

    auto [tilde, rep] = cg_solve(system, rhs, opts.cg_tol, opts.cg_max_iter, Precond::jacobi, &pi);
    if (!rep.converged) throw SolverDiverged("flow_step: CG failed to converge");

    const double tilde_norm = std::sqrt(std::max(0.0, dot(tilde, spmv(ops.M, tilde))));
    if (tilde_norm <= 1e-14)
        throw ZeroTilde("flow_step: pre-normalization iterate is numerically zero");

    FlowState next;
    next.phi = extend_interior(ops, tilde);
    for (auto& c : next.phi.coeffs) c /= tilde_norm;
    next.step = state.step + 1;
    next.mu = chemical_potential(next.phi, ops, spec, quad);
    next.energy = energy(next.phi, ops, spec, quad);

    double diff_sq = 0.0;
    {
        auto ni = restrict_interior(ops, next.phi);
        for (std::size_t i = 0; i < ni.size(); ++i) ni[i] -= pi[i];
        diff_sq = std::max(0.0, dot(ni, spmv(ops.M, ni)));
    }
    StepDiagnostics diag;
    diag.tilde_norm = tilde_norm;
    diag.residual = std::sqrt(diff_sq) / tau;
    diag.cg_iterations = rep.iterations;
    return {std::move(next), diag};
}

struct FlowResult {
    FlowState state;
    FlowTrace trace;
    bool converged = true;  // false only when a stop rule hit max_steps
};

using FlowObserver = std::function<void(const FlowState&, const StepDiagnostics&)>;

inline FlowResult run_flow(const ProblemSpec& spec, const Mesh& mesh,
                           const AssembledOperators& ops, const QuadratureRule& quad,
                           const TimeGrid& grid, const FlowOptions& opts = {},
                           const FlowObserver& observer = nullptr) {
    FlowResult out;
    out.state = initial_state(spec, mesh, ops, quad, opts.cg_tol);
    for (int n = 0; n < grid.n_steps; ++n) {
        auto [next, diag] = flow_step(out.state, ops, spec, quad, grid.tau, opts);
        out.state = std::move(next);
        out.trace.push_back({out.state.step, out.state.step * grid.tau, out.state.mu,
                             out.state.energy, mass_norm(ops, out.state.phi), diag.residual,
                             diag.tilde_norm});
        if (observer) observer(out.state, diag);
    }
    return out;
}

// Ground-state mode: step until the discrete time derivative drops below
// residual_tol. converged=false when max_steps is exhausted first.
inline FlowResult run_flow(const ProblemSpec& spec, const Mesh& mesh,
                           const AssembledOperators& ops, const QuadratureRule& quad,
                           double tau, const StopRule& stop, const FlowOptions& opts = {},
                           const FlowObserver& observer = nullptr) {
    FlowResult out;
    out.state = initial_state(spec, mesh, ops, quad, opts.cg_tol);
    out.converged = false;
    for (int n = 0; n < stop.max_steps; ++n) {
        auto [next, diag] = flow_step(out.state, ops, spec, quad, tau, opts);
        out.state = std::move(next);
        out.trace.push_back({out.state.step, out.state.step * tau, out.state.mu,
                             out.state.energy, mass_norm(ops, out.state.phi), diag.residual,
                             diag.tilde_norm});
        if (observer) observer(out.state, diag);
        if (diag.residual <= stop.residual_tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

}  // namespace gpgf
