#pragma once

// P1 finite element machinery: mass/stiffness/weighted assembly, nodal
// interpolation, Ritz projection, discrete Laplacian, norms and cross-mesh
// error evaluation. All operators are reduced to interior dofs (homogeneous
// Dirichlet boundary).

#include <functional>
#include <string>
#include <vector>

#include "gpgf/common.hpp"
#include "gpgf/linalg.hpp"
#include "gpgf/mesh.hpp"
#include "gpgf/quadrature.hpp"

namespace gpgf {

struct ScalarField {
    std::function<double(const Vec3&)> value;
    std::function<Vec3(const Vec3&)> gradient;  // optional; required by ritz_project
    std::string descriptor = "custom";

    static ScalarField zero() {
        return {[](const Vec3&) { return 0.0; },
                [](const Vec3&) { return Vec3{0.0, 0.0, 0.0}; },
                "zero"};
    }
};

struct FeFunction {
    const Mesh* mesh = nullptr;
    std::vector<double> coeffs;  // one per vertex, zero on the boundary

    static FeFunction zeros(const Mesh& m) {
        return {&m, std::vector<double>(m.n_vertices(), 0.0)};
    }
};

struct AssembledOperators {
    const Mesh* mesh = nullptr;
    SparseMatrix M;                     // mass, interior x interior
    SparseMatrix A;                     // stiffness, interior x interior
    std::vector<int> interior_of_vertex;  // -1 for boundary vertices
    std::vector<int> vertex_of_interior;

    int n_interior() const { return static_cast<int>(vertex_of_interior.size()); }
};

struct FeNorms {
    double l2 = 0.0;
    double h1_semi = 0.0;
    double l4 = 0.0;
    double linf = 0.0;
};

namespace detail {

// Constant gradients of the barycentric basis on element e; grads[i] is the
// gradient of the hat function of local vertex i.
inline void element_gradients(const Mesh& m, int e, Vec3 grads[4]) {
    const int d = m.dim();
    const auto& el = m.elements[e];
    const Vec3& p0 = m.vertices[el[0]];
    if (d == 1) {
        const double len = m.vertices[el[1]][0] - p0[0];
        grads[1] = {1.0 / len, 0.0, 0.0};
    } else if (d == 2) {
        const Vec3& a = m.vertices[el[1]];
        const Vec3& b = m.vertices[el[2]];
        const double d00 = a[0] - p0[0], d10 = a[1] - p0[1];
        const double d01 = b[0] - p0[0], d11 = b[1] - p0[1];
        const double det = d00 * d11 - d10 * d01;
        // rows of the inverse of D = [p1-p0 | p2-p0]
        grads[1] = {d11 / det, -d01 / det, 0.0};
        grads[2] = {-d10 / det, d00 / det, 0.0};
    } else {
        const Vec3& a = m.vertices[el[1]];
        const Vec3& b = m.vertices[el[2]];
        const Vec3& c = m.vertices[el[3]];
        const double D[3][3] = {{a[0] - p0[0], b[0] - p0[0], c[0] - p0[0]},
                                {a[1] - p0[1], b[1] - p0[1], c[1] - p0[1]},
                                {a[2] - p0[2], b[2] - p0[2], c[2] - p0[2]}};
        const double det = D[0][0] * (D[1][1] * D[2][2] - D[1][2] * D[2][1]) -
                           D[0][1] * (D[1][0] * D[2][2] - D[1][2] * D[2][0]) +
                           D[0][2] * (D[1][0] * D[2][1] - D[1][1] * D[2][0]);
        const double inv[3][3] = {
            {(D[1][1] * D[2][2] - D[1][2] * D[2][1]) / det,
             (D[0][2] * D[2][1] - D[0][1] * D[2][2]) / det,
             (D[0][1] * D[1][2] - D[0][2] * D[1][1]) / det},
            {(D[1][2] * D[2][0] - D[1][0] * D[2][2]) / det,
             (D[0][0] * D[2][2] - D[0][2] * D[2][0]) / det,
             (D[0][2] * D[1][0] - D[0][0] * D[1][2]) / det},
            {(D[1][0] * D[2][1] - D[1][1] * D[2][0]) / det,
             (D[0][1] * D[2][0] - D[0][0] * D[2][1]) / det,
             (D[0][0] * D[1][1] - D[0][1] * D[1][0]) / det}};
        grads[1] = {inv[0][0], inv[0][1], inv[0][2]};
        grads[2] = {inv[1][0], inv[1][1], inv[1][2]};
        grads[3] = {inv[2][0], inv[2][1], inv[2][2]};
    }
    grads[0] = {0.0, 0.0, 0.0};
    for (int i = 1; i <= d; ++i)
        for (int a = 0; a < 3; ++a) grads[0][a] -= grads[i][a];
}

inline Vec3 quad_point(const Mesh& m, int e, const std::array<double, 4>& bary) {
    const int d = m.dim();
    Vec3 x{0.0, 0.0, 0.0};
    for (int i = 0; i <= d; ++i) {
        const Vec3& p = m.vertices[m.elements[e][i]];
        for (int a = 0; a < 3; ++a) x[a] += bary[i] * p[a];
    }
    return x;
}

}  // namespace detail

inline void build_interior_maps(const Mesh& mesh, std::vector<int>& interior_of_vertex,
                                std::vector<int>& vertex_of_interior) {
    interior_of_vertex.assign(mesh.n_vertices(), -1);
    vertex_of_interior.clear();
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (!mesh.boundary_mask[v]) {
            interior_of_vertex[v] = static_cast<int>(vertex_of_interior.size());
            vertex_of_interior.push_back(v);
        }
    }
    if (vertex_of_interior.empty())
        throw EmptyInteriorSpace("mesh has no interior vertices (n too small)");
}

// Assembles an interior-reduced matrix from a per-element local matrix
// callback local(e, i, j). The full vertex-pair pattern is inserted so mass
// and stiffness share one sparsity structure.
template <typename LocalFn>
inline SparseMatrix assemble_reduced(const Mesh& mesh, const std::vector<int>& interior_of_vertex,
                                     int n_interior, LocalFn&& local) {
    TripletAccumulator acc(n_interior, n_interior);
    const int nv = mesh.dim() + 1;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        for (int i = 0; i < nv; ++i) {
            const int gi = interior_of_vertex[mesh.elements[e][i]];
            if (gi < 0) continue;
            for (int j = 0; j < nv; ++j) {
                const int gj = interior_of_vertex[mesh.elements[e][j]];
                if (gj < 0) continue;
                acc.add(gi, gj, local(e, i, j));
            }
        }
    }
    return acc.to_csr(true);
}

inline SparseMatrix assemble_mass(const Mesh& mesh) {
    std::vector<int> iov, voi;
    build_interior_maps(mesh, iov, voi);
    const int d = mesh.dim();
    const double denom = (d + 1.0) * (d + 2.0);
    return assemble_reduced(mesh, iov, static_cast<int>(voi.size()),
                            [&](int e, int i, int j) {
                                const double vol = element_volume(mesh, e);
                                return vol * (i == j ? 2.0 : 1.0) / denom;
                            });
}

inline SparseMatrix assemble_stiffness(const Mesh& mesh) {
    std::vector<int> iov, voi;
    build_interior_maps(mesh, iov, voi);
    return assemble_reduced(mesh, iov, static_cast<int>(voi.size()),
                            [&](int e, int i, int j) {
                                Vec3 g[4];
                                detail::element_gradients(mesh, e, g);
                                const double vol = element_volume(mesh, e);
                                return vol * (g[i][0] * g[j][0] + g[i][1] * g[j][1] +
                                              g[i][2] * g[j][2]);
                            });
}

inline AssembledOperators assemble_operators(const Mesh& mesh) {
    AssembledOperators ops;
    ops.mesh = &mesh;
    build_interior_maps(mesh, ops.interior_of_vertex, ops.vertex_of_interior);
    const int d = mesh.dim();
    const double denom = (d + 1.0) * (d + 2.0);
    const int ni = ops.n_interior();
    ops.M = assemble_reduced(mesh, ops.interior_of_vertex, ni, [&](int e, int i, int j) {
        return element_volume(mesh, e) * (i == j ? 2.0 : 1.0) / denom;
    });
    ops.A = assemble_reduced(mesh, ops.interior_of_vertex, ni, [&](int e, int i, int j) {
        Vec3 g[4];
        detail::element_gradients(mesh, e, g);
        return element_volume(mesh, e) *
               (g[i][0] * g[j][0] + g[i][1] * g[j][1] + g[i][2] * g[j][2]);
    });
    return ops;
}

inline SparseMatrix assemble_weighted_mass(const Mesh& mesh, const ScalarField& w,
                                           const QuadratureRule& quad) {
    std::vector<int> iov, voi;
    build_interior_maps(mesh, iov, voi);
    return assemble_reduced(mesh, iov, static_cast<int>(voi.size()),
                            [&](int e, int i, int j) {
                                const double vol = element_volume(mesh, e);
                                double s = 0.0;
                                for (int q = 0; q < quad.size(); ++q) {
                                    const Vec3 x = detail::quad_point(mesh, e, quad.points[q]);
                                    s += quad.weights[q] * w.value(x) * quad.points[q][i] *
                                         quad.points[q][j];
                                }
                                return vol * s;
                            });
}

inline std::vector<double> load_vector(const Mesh& mesh, const ScalarField& f,
                                       const QuadratureRule& quad) {
    std::vector<int> iov, voi;
    build_interior_maps(mesh, iov, voi);
    std::vector<double> b(voi.size(), 0.0);
    const int nv = mesh.dim() + 1;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double vol = element_volume(mesh, e);
        for (int q = 0; q < quad.size(); ++q) {
            const Vec3 x = detail::quad_point(mesh, e, quad.points[q]);
            const double fw = vol * quad.weights[q] * f.value(x);
            for (int i = 0; i < nv; ++i) {
                const int gi = iov[mesh.elements[e][i]];
                if (gi >= 0) b[gi] += fw * quad.points[q][i];
            }
        }
    }
    return b;
}

inline FeFunction interpolate_nodal(const Mesh& mesh, const ScalarField& f) {
    FeFunction u = FeFunction::zeros(mesh);
    for (int v = 0; v < mesh.n_vertices(); ++v)
        if (!mesh.boundary_mask[v]) u.coeffs[v] = f.value(mesh.vertices[v]);
    return u;
}

inline std::vector<double> restrict_interior(const AssembledOperators& ops,
                                             const FeFunction& u) {
    std::vector<double> x(ops.n_interior());
    for (int i = 0; i < ops.n_interior(); ++i) x[i] = u.coeffs[ops.vertex_of_interior[i]];
    return x;
}

inline FeFunction extend_interior(const AssembledOperators& ops,
                                  const std::vector<double>& x) {
    FeFunction u = FeFunction::zeros(*ops.mesh);
    for (int i = 0; i < ops.n_interior(); ++i) u.coeffs[ops.vertex_of_interior[i]] = x[i];
    return u;
}

inline FeFunction ritz_project(const Mesh& mesh, const ScalarField& u,
                               const AssembledOperators& ops, const QuadratureRule& quad,
                               double tol = 1e-10) {
    if (!u.gradient) throw Error("ritz_project: field has no gradient evaluator");
    std::vector<double> g(ops.n_interior(), 0.0);
    const int nv = mesh.dim() + 1;
    Vec3 grads[4];
    for (int e = 0; e < mesh.n_elements(); ++e) {
        detail::element_gradients(mesh, e, grads);
        const double vol = element_volume(mesh, e);
        for (int q = 0; q < quad.size(); ++q) {
            const Vec3 x = detail::quad_point(mesh, e, quad.points[q]);
            const Vec3 gu = u.gradient(x);
            for (int i = 0; i < nv; ++i) {
                const int gi = ops.interior_of_vertex[mesh.elements[e][i]];
                if (gi >= 0)
                    g[gi] += vol * quad.weights[q] *
                             (gu[0] * grads[i][0] + gu[1] * grads[i][1] + gu[2] * grads[i][2]);
            }
        }
    }
    auto [x, rep] = cg_solve(ops.A, g, tol, 5000, Precond::jacobi);
    if (!rep.converged) throw SolverDiverged("ritz_project: CG failed to converge");
    return extend_interior(ops, x);
}

inline FeFunction discrete_laplacian(const AssembledOperators& ops, const FeFunction& u,
                                     double tol = 1e-12) {
    if (u.mesh != ops.mesh) throw MeshMismatch("discrete_laplacian: mesh mismatch");
    auto ui = restrict_interior(ops, u);
    auto au = spmv(ops.A, ui);
    scale(au, -1.0);
    auto [y, rep] = cg_solve(ops.M, au, tol, 5000, Precond::jacobi);
    if (!rep.converged) throw SolverDiverged("discrete_laplacian: mass solve failed");
    return extend_interior(ops, y);
}

// L4 integral uses per-element quadrature of the quartic; exact for the
// degree-4 default rule.
inline FeNorms norms(const AssembledOperators& ops, const QuadratureRule& quad,
                     const FeFunction& u) {
    FeNorms out;
    auto ui = restrict_interior(ops, u);
    out.l2 = std::sqrt(std::max(0.0, dot(ui, spmv(ops.M, ui))));
    out.h1_semi = std::sqrt(std::max(0.0, dot(ui, spmv(ops.A, ui))));
    const Mesh& mesh = *ops.mesh;
    const int nv = mesh.dim() + 1;
    double l4int = 0.0;
    for (int e = 0; e < mesh.n_elements(); ++e) {
        const double vol = element_volume(mesh, e);
        for (int q = 0; q < quad.size(); ++q) {
            double val = 0.0;
            for (int i = 0; i < nv; ++i)
                val += quad.points[q][i] * u.coeffs[mesh.elements[e][i]];
            l4int += vol * quad.weights[q] * val * val * val * val;
        }
    }
    out.l4 = std::pow(l4int, 0.25);
    for (double c : u.coeffs) out.linf = std::max(out.linf, std::abs(c));
    return out;
}

inline double evaluate(const FeFunction& u, const Vec3& x) {
    const auto loc = locate_point(*u.mesh, x);
    double val = 0.0;
    for (int i = 0; i <= u.mesh->dim(); ++i)
        val += loc.bary[i] * u.coeffs[u.mesh->elements[loc.element][i]];
    return val;
}

// P1 prolongation by barycentric evaluation; exact on nested meshes.
inline FeFunction prolong(const FeFunction& u, const Mesh& fine) {
    FeFunction out = FeFunction::zeros(fine);
    for (int v = 0; v < fine.n_vertices(); ++v)
        out.coeffs[v] = evaluate(u, fine.vertices[v]);
    return out;
}

struct CrossMeshError {
    double e_l2 = 0.0;
    double e_h1 = 0.0;  // full H1 norm: sqrt(l2^2 + seminorm^2)
};

inline CrossMeshError cross_mesh_error(const FeFunction& coarse_u, const FeFunction& fine_ref,
                                       const VertexEmbedding& embedding,
                                       const AssembledOperators& fine_ops,
                                       const QuadratureRule& quad) {
    (void)quad;
    const Mesh& fine = *fine_ref.mesh;
    if (fine_ops.mesh != &fine) throw MeshMismatch("cross_mesh_error: ops on wrong mesh");
    if (static_cast<int>(embedding.coarse_to_fine.size()) != coarse_u.mesh->n_vertices())
        throw MeshMismatch("cross_mesh_error: embedding size mismatch");
    for (int v = 0; v < coarse_u.mesh->n_vertices(); ++v) {
        const int fv = embedding.coarse_to_fine[v];
        if (fv < 0 || fv >= fine.n_vertices() ||
            dist(coarse_u.mesh->vertices[v], fine.vertices[fv]) > kGeomTol)
            throw MeshMismatch("cross_mesh_error: embedding inconsistent with meshes");
    }
    FeFunction diff = (coarse_u.mesh == &fine) ? coarse_u : prolong(coarse_u, fine);
    for (int v = 0; v < fine.n_vertices(); ++v) diff.coeffs[v] -= fine_ref.coeffs[v];
    auto di = restrict_interior(fine_ops, diff);
    const double l2sq = std::max(0.0, dot(di, spmv(fine_ops.M, di)));
    const double h1sq = std::max(0.0, dot(di, spmv(fine_ops.A, di)));
    return {std::sqrt(l2sq), std::sqrt(l2sq + h1sq)};
}

inline VertexEmbedding identity_embedding(const Mesh& m) {
    VertexEmbedding e;
    e.coarse_to_fine.resize(m.n_vertices());
    for (int v = 0; v < m.n_vertices(); ++v) e.coarse_to_fine[v] = v;
    return e;
}

}  // namespace gpgf
