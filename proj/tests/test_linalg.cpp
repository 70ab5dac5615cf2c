#include <doctest.h>

#include <random>

#include "dense_oracle.hpp"
#include "gpgf/fem.hpp"
#include "gpgf/linalg.hpp"
#include "gpgf/mesh.hpp"

using namespace gpgf;

namespace {

SparseMatrix identity(int n) {
    TripletAccumulator acc(n, n);
    for (int i = 0; i < n; ++i) acc.add(i, i, 1.0);
    return acc.to_csr(true);
}

SparseMatrix random_spd(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    TripletAccumulator acc(n, n);
    for (int i = 0; i < n; ++i) {
        acc.add(i, i, n + 1.0);  // diagonally dominant
        for (int j = i + 1; j < n; ++j) {
            const double v = unif(rng) * 0.5;
            acc.add(i, j, v);
            acc.add(j, i, v);
        }
    }
    return acc.to_csr(true);
}

}  // namespace

TEST_CASE("spmv basics") {
    auto eye = identity(4);
    std::vector<double> x{1.0, -2.0, 3.0, 0.5};
    CHECK(spmv(eye, x) == x);

    TripletAccumulator acc(2, 2);
    acc.add(0, 0, 2.0);
    acc.add(0, 1, 1.0);
    acc.add(1, 0, 1.0);
    acc.add(1, 1, 2.0);
    auto a = acc.to_csr(true);
    auto y = spmv(a, {1.0, 1.0});
    CHECK(y[0] == doctest::Approx(3.0));
    CHECK(y[1] == doctest::Approx(3.0));

    CHECK_THROWS_AS(spmv(a, {1.0, 2.0, 3.0}), DimensionMismatch);
}

TEST_CASE("spmv symmetry identity x'Ay == y'Ax") {
    auto a = random_spd(5, 11);
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> x(5), y(5);
    for (auto& v : x) v = unif(rng);
    for (auto& v : y) v = unif(rng);
    CHECK(dot(x, spmv(a, y)) == doctest::Approx(dot(y, spmv(a, x))).epsilon(1e-12));
}

TEST_CASE("spmv is bitwise deterministic") {
    auto a = random_spd(20, 3);
    std::vector<double> x(20, 0.0);
    for (int i = 0; i < 20; ++i) x[i] = std::sin(i + 1.0);
    auto y1 = spmv(a, x);
    auto y2 = spmv(a, x);
    CHECK(y1 == y2);  // exact equality
}

TEST_CASE("cg on identity converges in one iteration") {
    auto eye = identity(6);
    std::vector<double> b{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    auto [x, rep] = cg_solve(eye, b, 1e-12, 10, Precond::none);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 1);
    for (int i = 0; i < 6; ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("cg with zero rhs returns zero in zero iterations") {
    auto a = random_spd(8, 5);
    auto [x, rep] = cg_solve(a, std::vector<double>(8, 0.0));
    CHECK(rep.converged);
    CHECK(rep.iterations == 0);
    for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("cg solves 1d Poisson against nodal sine") {
    // stiffness * x = M * (nodal sin(pi x)) has solution ~ pi^-2 sin(pi x)
    Mesh mesh = build_uniform_mesh(BoxDomain::unit(1), 8);
    auto ops = assemble_operators(mesh);
    std::vector<double> s(ops.n_interior());
    for (int i = 0; i < ops.n_interior(); ++i)
        s[i] = std::sin(M_PI * mesh.vertices[ops.vertex_of_interior[i]][0]);
    auto b = spmv(ops.M, s);
    auto [x, rep] = cg_solve(ops.A, b, 1e-12, 500);
    CHECK(rep.converged);
    for (int i = 0; i < ops.n_interior(); ++i)
        CHECK(x[i] == doctest::Approx(s[i] / (M_PI * M_PI)).epsilon(5e-3));

    // dense direct oracle agrees tighter
    auto xd = test::dense_solve(ops.A, b);
    for (int i = 0; i < ops.n_interior(); ++i)
        CHECK(x[i] == doctest::Approx(xd[i]).epsilon(1e-10));
}

TEST_CASE("cg matches a dense direct solve on random SPD systems") {
    for (unsigned seed : {1u, 2u, 3u}) {
        auto a = random_spd(50, seed);
        std::mt19937 rng(seed + 100);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        std::vector<double> b(50);
        for (auto& v : b) v = unif(rng);
        auto [x, rep] = cg_solve(a, b, 1e-12, 1000);
        REQUIRE(rep.converged);
        auto xd = test::dense_solve(a, b);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < 50; ++i) {
            num += (x[i] - xd[i]) * (x[i] - xd[i]);
            den += xd[i] * xd[i];
        }
        CHECK(std::sqrt(num / den) <= 1e-8);
    }
}

TEST_CASE("csr_combine adds same-pattern matrices") {
    Mesh mesh = build_uniform_mesh(BoxDomain::unit(2), 3);
    auto ops = assemble_operators(mesh);
    auto s = csr_combine(2.0, ops.M, 1.0, ops.A);
    std::vector<double> x(ops.n_interior(), 1.0);
    auto y1 = spmv(s, x);
    auto ym = spmv(ops.M, x);
    auto ya = spmv(ops.A, x);
    for (int i = 0; i < ops.n_interior(); ++i)
        CHECK(y1[i] == doctest::Approx(2.0 * ym[i] + ya[i]).epsilon(1e-14));
}
