#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "gpgf/mesh.hpp"

using namespace gpgf;

namespace {

double total_volume(const Mesh& m) {
    double v = 0.0;
    for (int e = 0; e < m.n_elements(); ++e) v += element_volume(m, e);
    return v;
}

double box_volume(const BoxDomain& b) {
    double v = 1.0;
    for (int a = 0; a < b.dim; ++a) v *= b.upper[a] - b.lower[a];
    return v;
}

// Counts appearances of each facet (sorted vertex tuple of size dim).
std::map<std::vector<int>, int> facet_counts(const Mesh& m) {
    std::map<std::vector<int>, int> counts;
    const int nv = m.dim() + 1;
    for (const auto& el : m.elements)
        for (int skip = 0; skip < nv; ++skip) {
            std::vector<int> f;
            for (int i = 0; i < nv; ++i)
                if (i != skip) f.push_back(el[i]);
            std::sort(f.begin(), f.end());
            ++counts[f];
        }
    return counts;
}

}  // namespace

TEST_CASE("uniform interval mesh") {
    Mesh m = build_uniform_mesh(BoxDomain::unit(1), 4);
    CHECK(m.n_vertices() == 5);
    CHECK(m.n_elements() == 4);
    CHECK(m.h == doctest::Approx(0.25));
    CHECK(m.boundary_mask[0]);
    CHECK(m.boundary_mask[4]);
    CHECK_FALSE(m.boundary_mask[2]);
}

TEST_CASE("unit square n=2") {
    Mesh m = build_uniform_mesh(BoxDomain::unit(2), 2);
    CHECK(m.n_vertices() == 9);
    CHECK(m.n_elements() == 8);
    CHECK(m.h == doctest::Approx(std::sqrt(2.0) / 2.0));
}

TEST_CASE("unit cube n=4 matches the coarse spatial-study mesh") {
    Mesh m = build_uniform_mesh(BoxDomain::unit(3), 4);
    CHECK(m.n_vertices() == 125);
    CHECK(m.n_elements() == 384);
    CHECK(m.h == doctest::Approx(0.433013).epsilon(1e-5));
}

TEST_CASE("element volumes are positive and tile the box") {
    for (int dim = 1; dim <= 3; ++dim)
        for (int n : {2, 3, 4}) {
            BoxDomain box;
            box.dim = dim;
            for (int a = 0; a < dim; ++a) { box.lower[a] = -0.5; box.upper[a] = 1.5 + a; }
            Mesh m = build_uniform_mesh(box, n);
            for (int e = 0; e < m.n_elements(); ++e) CHECK(element_volume(m, e) > 0.0);
            CHECK(total_volume(m) == doctest::Approx(box_volume(box)).epsilon(1e-12));
        }
}

TEST_CASE("conformity: interior facets shared by exactly two elements") {
    for (int dim = 2; dim <= 3; ++dim) {
        Mesh m = build_uniform_mesh(BoxDomain::unit(dim), 3);
        for (const auto& [facet, count] : facet_counts(m)) {
            bool on_boundary = true;
            // A facet is on the boundary iff all its vertices share a face plane.
            for (int a = 0; a < dim && on_boundary; ++a) {
                bool lo = true, hi = true;
                for (int v : facet) {
                    lo = lo && std::abs(m.vertices[v][a]) <= 1e-12;
                    hi = hi && std::abs(m.vertices[v][a] - 1.0) <= 1e-12;
                }
                if (lo || hi) { CHECK(count == 1); goto next; }
            }
            CHECK(count == 2);
        next:;
        }
    }
}

TEST_CASE("quasi-uniformity of element diameters") {
    for (int dim = 1; dim <= 3; ++dim) {
        Mesh m = build_uniform_mesh(BoxDomain::unit(dim), 4);
        double dmin = 1e300, dmax = 0.0;
        for (int e = 0; e < m.n_elements(); ++e) {
            dmin = std::min(dmin, element_diameter(m, e));
            dmax = std::max(dmax, element_diameter(m, e));
        }
        CHECK(dmax / dmin <= 4.0);
        CHECK(dmax == doctest::Approx(m.h));
    }
}

TEST_CASE("refinement halves h and embeds vertices exactly") {
    for (int dim = 1; dim <= 3; ++dim) {
        Mesh coarse = build_uniform_mesh(BoxDomain::unit(dim), dim == 3 ? 4 : 4);
        auto [fine, emb] = refine_uniform(coarse);
        CHECK(fine.h == doctest::Approx(coarse.h / 2.0).epsilon(1e-14));
        CHECK(fine.level == coarse.level + 1);
        std::set<int> images;
        for (int v = 0; v < coarse.n_vertices(); ++v) {
            const int fv = emb.coarse_to_fine[v];
            CHECK(dist(coarse.vertices[v], fine.vertices[fv]) <= 1e-12);
            images.insert(fv);
        }
        CHECK(static_cast<int>(images.size()) == coarse.n_vertices());  // injective
    }
}

TEST_CASE("two refinements quarter h") {
    Mesh m = build_uniform_mesh(BoxDomain::unit(1), 2);
    auto [m2, e1] = refine_uniform(m);
    auto [m4, e2] = refine_uniform(m2);
    CHECK(m4.h == doctest::Approx(0.125));
}

TEST_CASE("locate_point in 1d") {
    Mesh m = build_uniform_mesh(BoxDomain::unit(1), 4);
    auto loc = locate_point(m, {0.6, 0.0, 0.0});
    const auto& el = m.elements[loc.element];
    double x = 0.0;
    for (int i = 0; i < 2; ++i) x += loc.bary[i] * m.vertices[el[i]][0];
    CHECK(x == doctest::Approx(0.6).epsilon(1e-13));
    CHECK(loc.bary[0] + loc.bary[1] == doctest::Approx(1.0).epsilon(1e-13));

    CHECK_THROWS_AS(locate_point(m, {1.5, 0.0, 0.0}), PointOutsideDomain);
}

TEST_CASE("locate_point at a 3d cell centroid") {
    Mesh m = build_uniform_mesh(BoxDomain::unit(3), 2);
    auto loc = locate_point(m, {0.25, 0.25, 0.25});
    double sum = 0.0;
    for (int i = 0; i <= 3; ++i) {
        CHECK(loc.bary[i] >= 0.0);
        CHECK(loc.bary[i] <= 1.0);
        sum += loc.bary[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("locate_point reproduces arbitrary points") {
    Mesh m = build_uniform_mesh(BoxDomain::unit(3), 3);
    for (double t : {0.0, 0.17, 1.0 / 3.0, 0.5, 0.99, 1.0}) {
        Vec3 p{t, 0.7 * t + 0.1, 1.0 - t};
        for (auto& c : p) c = std::clamp(c, 0.0, 1.0);
        auto loc = locate_point(m, p);
        Vec3 rec{0.0, 0.0, 0.0};
        for (int i = 0; i <= 3; ++i)
            for (int a = 0; a < 3; ++a)
                rec[a] += loc.bary[i] * m.vertices[m.elements[loc.element][i]][a];
        CHECK(dist(rec, p) <= 1e-12);
    }
}
