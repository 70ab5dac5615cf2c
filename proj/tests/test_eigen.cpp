#include <doctest.h>

#include "dense_oracle.hpp"
#include "gpgf/driver.hpp"
#include "gpgf/eigensolver.hpp"

using namespace gpgf;

TEST_CASE("1d Dirichlet spectrum") {
    Mesh mesh = build_uniform_mesh(BoxDomain::unit(1), 64);
    auto ops = assemble_operators(mesh);
    auto eig = smallest_two(ops.A, ops.M, ops);
    CHECK(eig.lambda1 == doctest::Approx(M_PI * M_PI).epsilon(5e-3));
    CHECK(eig.lambda2 == doctest::Approx(4.0 * M_PI * M_PI).epsilon(5e-3));
    CHECK(eig.lambda1 <= eig.lambda2);
    CHECK_FALSE(eig.degenerate_pair);

    // M-orthonormality
    auto v1 = restrict_interior(ops, eig.vec1);
    auto v2 = restrict_interior(ops, eig.vec2);
    CHECK(std::abs(dot(v1, spmv(ops.M, v1)) - 1.0) <= 1e-8);
    CHECK(std::abs(dot(v2, spmv(ops.M, v2)) - 1.0) <= 1e-8);
    CHECK(std::abs(dot(v1, spmv(ops.M, v2))) <= 1e-8);
}

TEST_CASE("3d coarse spectrum") {
    Mesh mesh = build_uniform_mesh(BoxDomain::unit(3), 8);
    auto ops = assemble_operators(mesh);
    auto eig = smallest_two(ops.A, ops.M, ops);
    // Frozen dense generalized-eigensolve values for this mesh; the consistent
    // mass matrix puts the discrete pair ~6.5%/9.8% above the continuum limit.
    CHECK(eig.lambda1 == doctest::Approx(31.527169).epsilon(1e-5));
    CHECK(eig.lambda2 == doctest::Approx(65.007342).epsilon(1e-5));
    CHECK(eig.lambda1 == doctest::Approx(3.0 * M_PI * M_PI).epsilon(0.08));
    CHECK(eig.lambda2 == doctest::Approx(6.0 * M_PI * M_PI).epsilon(0.12));
}

TEST_CASE("identity pencil is degenerate") {
    Mesh mesh = build_uniform_mesh(BoxDomain::unit(1), 8);
    auto ops = assemble_operators(mesh);
    auto eig = smallest_two(ops.M, ops.M, ops);
    CHECK(eig.lambda1 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(eig.lambda2 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(eig.degenerate_pair);
}

TEST_CASE("oracle agreement on small systems") {
    for (int n : {8, 16, 28}) {
        Mesh mesh = build_uniform_mesh(BoxDomain::unit(1), n + 1);
        auto ops = assemble_operators(mesh);
        auto eig = smallest_two(ops.A, ops.M, ops, 1e-10);
        auto ev = test::dense_generalized_eigenvalues(ops.A, ops.M);
        CHECK(eig.lambda1 == doctest::Approx(ev[0]).epsilon(1e-8));
        CHECK(eig.lambda2 == doctest::Approx(ev[1]).epsilon(1e-8));
    }
}

TEST_CASE("linearized operator reductions") {
    Mesh mesh = build_uniform_mesh(BoxDomain::unit(1), 32);
    auto ops = assemble_operators(mesh);
    auto quad = simplex_rule(1, 4);
    ProblemSpec spec;
    spec.domain = BoxDomain::unit(1);
    spec.potential = ScalarField::zero();
    spec.beta = 0.0;
    auto l = linearized_operator(ops, spec, FeFunction::zeros(mesh), quad);
    CHECK((test::to_dense(l) - test::to_dense(ops.A)).cwiseAbs().maxCoeff() <= 1e-14);

    spec.potential = make_potential("harmonic", 1);
    auto lv = linearized_operator(ops, spec, FeFunction::zeros(mesh), quad);
    auto d = test::to_dense(lv);
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rayleigh quotient of L at the state matches mu with the same weight") {
    Mesh mesh = build_uniform_mesh(BoxDomain::unit(1), 64);
    auto ops = assemble_operators(mesh);
    auto quad = simplex_rule(1, 4);
    ProblemSpec spec;
    spec.domain = BoxDomain::unit(1);
    spec.potential = ScalarField::zero();
    spec.beta = 1.0;
    ScalarField f{[](const Vec3& x) { return std::sqrt(2.0) * std::sin(M_PI * x[0]); }, nullptr,
                  "custom"};
    auto phi = interpolate_nodal(mesh, f);
    const double nrm = mass_norm(ops, phi);
    for (auto& c : phi.coeffs) c /= nrm;

    auto l = linearized_operator(ops, spec, phi, quad);
    auto pi = restrict_interior(ops, phi);
    const double rayleigh = dot(pi, spmv(l, pi)) / dot(pi, spmv(ops.M, pi));
    CHECK(rayleigh == doctest::Approx(M_PI * M_PI + 1.5).epsilon(0.01));
}

TEST_CASE("lambda1 of the linearized operator bounds mu from below at the ground state") {
    RunConfig cfg = preset("example1");
    cfg.n = 4;
    ProblemSpec spec = make_problem(cfg);
    Mesh mesh = build_uniform_mesh(spec.domain, cfg.n);
    auto ops = assemble_operators(mesh);
    auto quad = simplex_rule(3, 4);
    auto run = run_flow(spec, mesh, ops, quad, 1e-2, StopRule{1e-8, 20000});
    REQUIRE(run.converged);
    auto l = linearized_operator(ops, spec, run.state.phi, quad);
    auto eig = smallest_two(l, ops.M, ops);
    CHECK(eig.lambda1 <= run.state.mu + 1e-8);
}

TEST_CASE("decay fit recovers a synthetic exponential exactly") {
    std::vector<double> t, v;
    for (int i = 0; i < 50; ++i) {
        t.push_back(0.02 * i);
        v.push_back(3.0 * std::exp(-2.0 * t.back()));
    }
    CHECK(fit_decay_rate(t, v) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("decay fit raises on too few points") {
    std::vector<double> t{0.0, 0.1, 0.2}, v{1.0, 0.5, 0.25};
    CHECK_THROWS_AS(fit_decay_rate(t, v), InsufficientData);
}

TEST_CASE("linear flow gaps decay at the spectral-gap rates") {
    // spectral oracle: the normalized linear flow damps mode k relative to the
    // ground mode like exp(-(lambda_k - lambda_1) t)
    Mesh mesh = build_uniform_mesh(BoxDomain::unit(1), 64);
    auto ops = assemble_operators(mesh);
    auto quad = simplex_rule(1, 4);
    ProblemSpec spec;
    spec.domain = BoxDomain::unit(1);
    spec.potential = ScalarField::zero();
    spec.beta = 0.0;
    spec.initial = ScalarField{
        [](const Vec3& x) { return std::sin(M_PI * x[0]) + 0.4 * std::sin(2.0 * M_PI * x[0]); },
        [](const Vec3& x) {
            return Vec3{M_PI * std::cos(M_PI * x[0]) +
                            0.8 * M_PI * std::cos(2.0 * M_PI * x[0]),
                        0.0, 0.0};
        },
        "custom"};

    auto eig = smallest_two(ops.A, ops.M, ops, 1e-10);
    auto gs = restrict_interior(ops, eig.vec1);

    std::vector<double> times, l2_gap, mu_gap;
    const double tau = 1e-3;
    auto run = run_flow(spec, mesh, ops, quad, tau, StopRule{1e-9, 5000}, {},
                        [&](const FlowState& s, const StepDiagnostics&) {
                            auto pi = restrict_interior(ops, s.phi);
                            // sign-aligned distance to the discrete ground state
                            const double proj = dot(pi, spmv(ops.M, gs));
                            double gap_sq = 0.0;
                            auto diff = pi;
                            for (std::size_t i = 0; i < diff.size(); ++i)
                                diff[i] -= (proj >= 0 ? 1.0 : -1.0) * gs[i];
                            gap_sq = dot(diff, spmv(ops.M, diff));
                            times.push_back(s.step * tau);
                            l2_gap.push_back(std::sqrt(gap_sq));
                            mu_gap.push_back(s.mu - eig.lambda1);
                        });
    REQUIRE(run.converged);
    const double gap = eig.lambda2 - eig.lambda1;  // ~ 3 pi^2
    CHECK(fit_decay_rate(times, l2_gap) == doctest::Approx(gap).epsilon(0.15));
    CHECK(fit_decay_rate(times, mu_gap) == doctest::Approx(2.0 * gap).epsilon(0.20));
}
