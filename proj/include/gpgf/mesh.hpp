#pragma once

// Structured conforming simplicial meshes of axis-aligned boxes in 1D/2D/3D,
// built by Kuhn/Freudenthal subdivision of a uniform grid. Uniform refinement
// doubles the grid, so coarse vertices embed into the fine mesh at identical
// coordinates and P1 prolongation between levels is exact.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "gpgf/common.hpp"

namespace gpgf {

struct BoxDomain {
    int dim = 1;                  // 1, 2 or 3
    Vec3 lower{0.0, 0.0, 0.0};
    Vec3 upper{1.0, 0.0, 0.0};

    static BoxDomain unit(int dim) {
        BoxDomain d;
        d.dim = dim;
        for (int i = 0; i < dim; ++i) { d.lower[i] = 0.0; d.upper[i] = 1.0; }
        return d;
    }
};

struct Mesh {
    BoxDomain domain;
    int subdivisions = 0;                      // cells per axis
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 4>> elements;  // dim+1 used entries, rest -1
    std::vector<bool> boundary_mask;
    double h = 0.0;                            // max element diameter
    int level = 0;                             // refinement generation

    int dim() const { return domain.dim; }
    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_elements() const { return static_cast<int>(elements.size()); }
    int simplices_per_cell() const { return dim() == 1 ? 1 : (dim() == 2 ? 2 : 6); }

    double cell_edge(int axis) const {
        return (domain.upper[axis] - domain.lower[axis]) / subdivisions;
    }
};

struct VertexEmbedding {
    std::vector<int> coarse_to_fine;  // indexed by coarse vertex
};

namespace detail {

inline int grid_index(int ix, int iy, int iz, int n, int dim) {
    const int s = n + 1;
    switch (dim) {
        case 1: return ix;
        case 2: return ix + s * iy;
        default: return ix + s * (iy + s * iz);
    }
}

// Signed volume of the simplex spanned by the element's vertices, times dim!.
inline double signed_volume_factor(const Mesh& m, const std::array<int, 4>& el) {
    const int d = m.dim();
    const Vec3& p0 = m.vertices[el[0]];
    if (d == 1) return m.vertices[el[1]][0] - p0[0];
    if (d == 2) {
        const Vec3& a = m.vertices[el[1]];
        const Vec3& b = m.vertices[el[2]];
        return (a[0] - p0[0]) * (b[1] - p0[1]) - (a[1] - p0[1]) * (b[0] - p0[0]);
    }
    const Vec3& a = m.vertices[el[1]];
    const Vec3& b = m.vertices[el[2]];
    const Vec3& c = m.vertices[el[3]];
    const double m00 = a[0] - p0[0], m01 = a[1] - p0[1], m02 = a[2] - p0[2];
    const double m10 = b[0] - p0[0], m11 = b[1] - p0[1], m12 = b[2] - p0[2];
    const double m20 = c[0] - p0[0], m21 = c[1] - p0[1], m22 = c[2] - p0[2];
    return m00 * (m11 * m22 - m12 * m21) - m01 * (m10 * m22 - m12 * m20) +
           m02 * (m10 * m21 - m11 * m20);
}

}  // namespace detail

inline double element_volume(const Mesh& m, int e) {
    static const double fact[4] = {1.0, 1.0, 2.0, 6.0};
    return detail::signed_volume_factor(m, m.elements[e]) / fact[m.dim()];
}

inline double element_diameter(const Mesh& m, int e) {
    const int nv = m.dim() + 1;
    double d = 0.0;
    for (int i = 0; i < nv; ++i)
        for (int j = i + 1; j < nv; ++j)
            d = std::max(d, dist(m.vertices[m.elements[e][i]], m.vertices[m.elements[e][j]]));
    return d;
}

inline Mesh build_uniform_mesh(const BoxDomain& domain, int n) {
    Mesh m;
    m.domain = domain;
    m.subdivisions = n;
    const int d = domain.dim;
    const int s = n + 1;

    const int nvy = d >= 2 ? s : 1;
    const int nvz = d >= 3 ? s : 1;
    m.vertices.reserve(static_cast<std::size_t>(s) * nvy * nvz);
    for (int iz = 0; iz < nvz; ++iz)
        for (int iy = 0; iy < nvy; ++iy)
            for (int ix = 0; ix < s; ++ix) {
                Vec3 p{0.0, 0.0, 0.0};
                p[0] = domain.lower[0] + ix * (domain.upper[0] - domain.lower[0]) / n;
                if (d >= 2) p[1] = domain.lower[1] + iy * (domain.upper[1] - domain.lower[1]) / n;
                if (d >= 3) p[2] = domain.lower[2] + iz * (domain.upper[2] - domain.lower[2]) / n;
                m.vertices.push_back(p);
            }

    m.boundary_mask.assign(m.vertices.size(), false);
    for (std::size_t v = 0; v < m.vertices.size(); ++v) {
        for (int a = 0; a < d; ++a) {
            if (std::abs(m.vertices[v][a] - domain.lower[a]) <= kGeomTol ||
                std::abs(m.vertices[v][a] - domain.upper[a]) <= kGeomTol) {
                m.boundary_mask[v] = true;
                break;
            }
        }
    }

    // Kuhn subdivision: each grid cell splits into dim! simplices, one per
    // permutation of the axis step order. Every simplex contains the cell's
    // main diagonal, which makes the global mesh conforming.
    static const int perms2[2][2] = {{0, 1}, {1, 0}};
    static const int perms3[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                     {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    const int ncy = d >= 2 ? n : 1;
    const int ncz = d >= 3 ? n : 1;
    for (int kz = 0; kz < ncz; ++kz)
        for (int ky = 0; ky < ncy; ++ky)
            for (int kx = 0; kx < n; ++kx) {
                if (d == 1) {
                    m.elements.push_back({kx, kx + 1, -1, -1});
                } else if (d == 2) {
                    for (const auto& p : perms2) {
                        int ix = kx, iy = ky;
                        std::array<int, 4> el{-1, -1, -1, -1};
                        el[0] = detail::grid_index(ix, iy, 0, n, d);
                        for (int t = 0; t < 2; ++t) {
                            if (p[t] == 0) ++ix; else ++iy;
                            el[t + 1] = detail::grid_index(ix, iy, 0, n, d);
                        }
                        m.elements.push_back(el);
                    }
                } else {
                    for (const auto& p : perms3) {
                        int ix = kx, iy = ky, iz = kz;
                        std::array<int, 4> el{-1, -1, -1, -1};
                        el[0] = detail::grid_index(ix, iy, iz, n, d);
                        for (int t = 0; t < 3; ++t) {
                            if (p[t] == 0) ++ix; else if (p[t] == 1) ++iy; else ++iz;
                            el[t + 1] = detail::grid_index(ix, iy, iz, n, d);
                        }
                        m.elements.push_back(el);
                    }
                }
            }

    // Fix orientation so every signed volume is positive.
    for (auto& el : m.elements)
        if (detail::signed_volume_factor(m, el) < 0.0) std::swap(el[0], el[1]);

    double hmax = 0.0;
    for (int e = 0; e < m.n_elements(); ++e) hmax = std::max(hmax, element_diameter(m, e));
    m.h = hmax;
    return m;
}

inline std::pair<Mesh, VertexEmbedding> refine_uniform(const Mesh& coarse) {
    Mesh fine = build_uniform_mesh(coarse.domain, 2 * coarse.subdivisions);
    fine.level = coarse.level + 1;
    const int d = coarse.dim();
    const int nc = coarse.subdivisions;
    VertexEmbedding emb;
    emb.coarse_to_fine.resize(coarse.n_vertices());
    const int sc = nc + 1;
    const int ncy = d >= 2 ? sc : 1;
    const int ncz = d >= 3 ? sc : 1;
    for (int iz = 0; iz < ncz; ++iz)
        for (int iy = 0; iy < ncy; ++iy)
            for (int ix = 0; ix < sc; ++ix)
                emb.coarse_to_fine[detail::grid_index(ix, iy, iz, nc, d)] =
                    detail::grid_index(2 * ix, 2 * iy, 2 * iz, 2 * nc, d);
    return {std::move(fine), std::move(emb)};
}

struct PointLocation {
    int element = -1;
    std::array<double, 4> bary{0.0, 0.0, 0.0, 0.0};  // dim+1 used entries
};

// Barycentric coordinates of x in element e; smallest coordinate may come out
// slightly negative on shared faces.
inline std::array<double, 4> barycentric(const Mesh& m, int e, const Vec3& x) {
    const int d = m.dim();
    const auto& el = m.elements[e];
    const Vec3& p0 = m.vertices[el[0]];
    std::array<double, 4> lam{0.0, 0.0, 0.0, 0.0};
    const double det = detail::signed_volume_factor(m, el);
    if (d == 1) {
        lam[1] = (x[0] - p0[0]) / det;
    } else if (d == 2) {
        const Vec3& a = m.vertices[el[1]];
        const Vec3& b = m.vertices[el[2]];
        const double rx = x[0] - p0[0], ry = x[1] - p0[1];
        lam[1] = (rx * (b[1] - p0[1]) - ry * (b[0] - p0[0])) / det;
        lam[2] = ((a[0] - p0[0]) * ry - (a[1] - p0[1]) * rx) / det;
    } else {
        const Vec3& a = m.vertices[el[1]];
        const Vec3& b = m.vertices[el[2]];
        const Vec3& c = m.vertices[el[3]];
        const double A[3][3] = {{a[0] - p0[0], b[0] - p0[0], c[0] - p0[0]},
                                {a[1] - p0[1], b[1] - p0[1], c[1] - p0[1]},
                                {a[2] - p0[2], b[2] - p0[2], c[2] - p0[2]}};
        const double r[3] = {x[0] - p0[0], x[1] - p0[1], x[2] - p0[2]};
        // Cramer's rule on the 3x3 system A lam = r.
        auto det3 = [](const double M[3][3]) {
            return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                   M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                   M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
        };
        for (int j = 0; j < 3; ++j) {
            double Aj[3][3];
            for (int r2 = 0; r2 < 3; ++r2)
                for (int c2 = 0; c2 < 3; ++c2) Aj[r2][c2] = (c2 == j) ? r[r2] : A[r2][c2];
            lam[j + 1] = det3(Aj) / det3(A);
        }
    }
    lam[0] = 1.0;
    for (int i = 1; i <= d; ++i) lam[0] -= lam[i];
    return lam;
}

inline PointLocation locate_point(const Mesh& m, const Vec3& x) {
    const int d = m.dim();
    for (int a = 0; a < d; ++a)
        if (x[a] < m.domain.lower[a] - kGeomTol || x[a] > m.domain.upper[a] + kGeomTol)
            throw PointOutsideDomain("point outside box on axis " + std::to_string(a));

    const int n = m.subdivisions;
    int cell[3] = {0, 0, 0};
    for (int a = 0; a < d; ++a) {
        const double t = (x[a] - m.domain.lower[a]) / m.cell_edge(a);
        cell[a] = std::clamp(static_cast<int>(std::floor(t)), 0, n - 1);
    }
    const int spc = m.simplices_per_cell();
    const int cell_id = d == 1 ? cell[0]
                      : d == 2 ? cell[0] + n * cell[1]
                               : cell[0] + n * (cell[1] + n * cell[2]);

    int best = -1;
    double best_min = -1.0e30;
    std::array<double, 4> best_lam{};
    for (int s = 0; s < spc; ++s) {
        const int e = cell_id * spc + s;
        auto lam = barycentric(m, e, x);
        double mn = lam[0];
        for (int i = 1; i <= d; ++i) mn = std::min(mn, lam[i]);
        if (mn > best_min) { best_min = mn; best = e; best_lam = lam; }
    }
    // Clamp face-rounding noise and renormalize.
    double sum = 0.0;
    for (int i = 0; i <= d; ++i) { best_lam[i] = std::max(best_lam[i], 0.0); sum += best_lam[i]; }
    for (int i = 0; i <= d; ++i) best_lam[i] /= sum;
    PointLocation loc;
    loc.element = best;
    loc.bary = best_lam;
    return loc;
}

}  // namespace gpgf
