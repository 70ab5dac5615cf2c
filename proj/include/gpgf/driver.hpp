#pragma once

// Experiment harness: run configuration, named presets, temporal/spatial
// convergence studies, the property-check suite, and CSV/JSON serialization.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpgf/eigensolver.hpp"
#include "gpgf/flow.hpp"

namespace gpgf {

struct RunConfig {
    std::string mode = "run";  // run | converge-time | converge-space | eigs | check
    int dim = 3;
    Vec3 lower{0.0, 0.0, 0.0};
    Vec3 upper{1.0, 1.0, 1.0};
    int n = 8;
    double tau = 1.0 / 90.0;
    std::optional<double> t_end = 1.0;          // fixed-horizon mode
    std::optional<double> residual_tol;         // ground-state mode
    int max_steps = 100000;
    double beta = 0.0;
    std::string potential = "zero";             // zero | harmonic | lattice | custom
    std::string initial = "polynomial_bump";    // polynomial_bump | sine_product | custom
    nlohmann::json potential_terms;             // custom polynomial terms
    nlohmann::json initial_terms;
    double solver_tol = 1e-10;
    int quadrature_degree = 4;
    std::string out_dir = "out";
    std::vector<double> tau_list;               // converge-time study
    double tau_ref = 1.0 / 2000.0;
    int levels = 3;                             // converge-space study
    nlohmann::json raw;                         // echo for summary.json
};

// ---------------------------------------------------------------------------
// Scalar fields

namespace detail {

struct PolyTerm {
    std::array<int, 3> powers{0, 0, 0};
    double coeff = 0.0;
};

inline ScalarField polynomial_field(std::vector<PolyTerm> terms) {
    auto value = [terms](const Vec3& x) {
        double s = 0.0;
        for (const auto& t : terms) {
            double v = t.coeff;
            for (int a = 0; a < 3; ++a)
                for (int k = 0; k < t.powers[a]; ++k) v *= x[a];
            s += v;
        }
        return s;
    };
    auto gradient = [terms](const Vec3& x) {
        Vec3 g{0.0, 0.0, 0.0};
        for (const auto& t : terms)
            for (int a = 0; a < 3; ++a) {
                if (t.powers[a] == 0) continue;
                double v = t.coeff * t.powers[a];
                for (int b = 0; b < 3; ++b) {
                    const int p = t.powers[b] - (b == a ? 1 : 0);
                    for (int k = 0; k < p; ++k) v *= x[b];
                }
                g[a] += v;
            }
        return g;
    };
    return {value, gradient, "custom"};
}

}  // namespace detail

inline ScalarField make_potential(const std::string& name, int dim,
                                  const nlohmann::json& terms = {}) {
    if (name == "zero") return ScalarField::zero();
    if (name == "harmonic") {
        auto value = [dim](const Vec3& x) {
            double s = 0.0;
            for (int a = 0; a < dim; ++a) s += x[a] * x[a];
            return 0.5 * s;
        };
        return {value, nullptr, "harmonic"};
    }
    if (name == "lattice") {
        auto value = [dim](const Vec3& x) {
            double s = 0.0, prod = 1.0;
            for (int a = 0; a < dim; ++a) {
                s += x[a] * x[a];
                prod *= std::sin(2.0 * M_PI * x[a]);
            }
            return 0.5 * s + 20.0 + 20.0 * prod;
        };
        return {value, nullptr, "lattice"};
    }
    if (name == "custom") {
        std::vector<detail::PolyTerm> pts;
        for (const auto& t : terms) {
            detail::PolyTerm pt;
            pt.coeff = t.at("coeff").get<double>();
            auto pw = t.at("powers");
            for (std::size_t a = 0; a < pw.size() && a < 3; ++a) pt.powers[a] = pw[a].get<int>();
            pts.push_back(pt);
        }
        return detail::polynomial_field(std::move(pts));
    }
    throw ConfigError("unknown potential descriptor: " + name);
}

inline ScalarField make_initial(const std::string& name, const BoxDomain& box,
                                const nlohmann::json& terms = {}) {
    const int dim = box.dim;
    if (name == "polynomial_bump") {
        // prod_a (x_a - lo_a)(up_a - x_a); normalization happens in initial_state.
        auto value = [box, dim](const Vec3& x) {
            double p = 1.0;
            for (int a = 0; a < dim; ++a) p *= (x[a] - box.lower[a]) * (box.upper[a] - x[a]);
            return p;
        };
        auto gradient = [box, dim](const Vec3& x) {
            Vec3 g{0.0, 0.0, 0.0};
            for (int a = 0; a < dim; ++a) {
                double d = box.lower[a] + box.upper[a] - 2.0 * x[a];
                for (int b = 0; b < dim; ++b)
                    if (b != a) d *= (x[b] - box.lower[b]) * (box.upper[b] - x[b]);
                g[a] = d;
            }
            return g;
        };
        return {value, gradient, "polynomial_bump"};
    }
    if (name == "sine_product") {
        auto value = [box, dim](const Vec3& x) {
            double p = 1.0;
            for (int a = 0; a < dim; ++a) {
                const double len = box.upper[a] - box.lower[a];
                p *= std::sin(M_PI * (x[a] - box.lower[a]) / len);
            }
            return p;
        };
        auto gradient = [box, dim](const Vec3& x) {
            Vec3 g{0.0, 0.0, 0.0};
            for (int a = 0; a < dim; ++a) {
                double d = 1.0;
                for (int b = 0; b < dim; ++b) {
                    const double len = box.upper[b] - box.lower[b];
                    const double arg = M_PI * (x[b] - box.lower[b]) / len;
                    d *= (b == a) ? (M_PI / len) * std::cos(arg) : std::sin(arg);
                }
                g[a] = d;
            }
            return g;
        };
        return {value, gradient, "sine_product"};
    }
    if (name == "custom") {
        std::vector<detail::PolyTerm> pts;
        for (const auto& t : terms) {
            detail::PolyTerm pt;
            pt.coeff = t.at("coeff").get<double>();
            auto pw = t.at("powers");
            for (std::size_t a = 0; a < pw.size() && a < 3; ++a) pt.powers[a] = pw[a].get<int>();
            pts.push_back(pt);
        }
        return detail::polynomial_field(std::move(pts));
    }
    throw ConfigError("unknown initial descriptor: " + name);
}

inline ProblemSpec make_problem(const RunConfig& cfg) {
    ProblemSpec spec;
    spec.domain.dim = cfg.dim;
    spec.domain.lower = cfg.lower;
    spec.domain.upper = cfg.upper;
    spec.beta = cfg.beta;
    spec.potential = make_potential(cfg.potential, cfg.dim, cfg.potential_terms);
    spec.initial = make_initial(cfg.initial, spec.domain, cfg.initial_terms);
    return spec;
}

// ---------------------------------------------------------------------------
// Presets

inline RunConfig preset(const std::string& name) {
    RunConfig c;
    if (name == "example1") {
        c.dim = 3;
        c.n = 8;
        c.tau = 1.0 / 90.0;
        c.t_end = 1.0;
        c.beta = 10.0;
        c.potential = "harmonic";
        c.initial = "polynomial_bump";
    } else if (name == "example2") {
        c.dim = 3;
        c.n = 8;
        c.tau = 1.0 / 70.0;
        c.t_end = 1.0;
        c.beta = 10.0;
        c.potential = "lattice";
        c.initial = "polynomial_bump";
    } else if (name == "linear1d") {
        c.dim = 1;
        c.lower = {0.0, 0.0, 0.0};
        c.upper = {1.0, 0.0, 0.0};
        c.n = 64;
        c.tau = 1e-3;
        c.t_end.reset();
        c.residual_tol = 1e-8;
        c.beta = 0.0;
        c.potential = "zero";
        c.initial = "sine_product";
    } else if (name == "linear3d") {
        c.dim = 3;
        c.n = 8;
        c.tau = 1e-2;
        c.t_end.reset();
        c.residual_tol = 1e-8;
        c.beta = 0.0;
        c.potential = "zero";
        c.initial = "sine_product";
    } else {
        throw UnknownPreset("unknown preset: " + name);
    }
    return c;
}

// ---------------------------------------------------------------------------
// Config file parsing (fail-fast on unknown keys)

inline RunConfig parse_config(const nlohmann::json& j) {
    static const std::vector<std::string> known = {
        "mode", "dim", "lower", "upper", "n", "tau", "t_end", "residual_tol",
        "max_steps", "beta", "potential", "potential_terms", "initial", "initial_terms",
        "solver_tol", "quadrature_degree", "out_dir", "tau_list", "tau_ref", "levels",
        "preset"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key: " + key);
    }
    RunConfig c;
    if (j.contains("preset")) c = preset(j.at("preset").get<std::string>());
    c.raw = j;
    if (j.contains("mode")) c.mode = j.at("mode").get<std::string>();
    if (j.contains("dim")) c.dim = j.at("dim").get<int>();
    if (c.dim < 1 || c.dim > 3) throw ConfigError("dim must be 1, 2 or 3");
    if (j.contains("lower"))
        for (std::size_t a = 0; a < j.at("lower").size() && a < 3; ++a)
            c.lower[a] = j.at("lower")[a].get<double>();
    if (j.contains("upper"))
        for (std::size_t a = 0; a < j.at("upper").size() && a < 3; ++a)
            c.upper[a] = j.at("upper")[a].get<double>();
    if (j.contains("n")) c.n = j.at("n").get<int>();
    if (j.contains("tau")) c.tau = j.at("tau").get<double>();
    if (j.contains("t_end")) c.t_end = j.at("t_end").get<double>();
    if (j.contains("residual_tol")) {
        c.residual_tol = j.at("residual_tol").get<double>();
        if (!j.contains("t_end")) c.t_end.reset();
    }
    if (j.contains("max_steps")) c.max_steps = j.at("max_steps").get<int>();
    if (j.contains("beta")) c.beta = j.at("beta").get<double>();
    if (j.contains("potential")) c.potential = j.at("potential").get<std::string>();
    if (j.contains("potential_terms")) c.potential_terms = j.at("potential_terms");
    if (j.contains("initial")) c.initial = j.at("initial").get<std::string>();
    if (j.contains("initial_terms")) c.initial_terms = j.at("initial_terms");
    if (j.contains("solver_tol")) c.solver_tol = j.at("solver_tol").get<double>();
    if (j.contains("quadrature_degree")) c.quadrature_degree = j.at("quadrature_degree").get<int>();
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("tau_list"))
        for (const auto& t : j.at("tau_list")) c.tau_list.push_back(t.get<double>());
    if (j.contains("tau_ref")) c.tau_ref = j.at("tau_ref").get<double>();
    if (j.contains("levels")) c.levels = j.at("levels").get<int>();

    if (c.n < 2) throw ConfigError("n must be >= 2");
    if (!(c.tau > 0.0) || !std::isfinite(c.tau)) throw ConfigError("tau must be positive");
    for (int a = 0; a < c.dim; ++a)
        if (!(c.upper[a] > c.lower[a])) throw ConfigError("upper must exceed lower per axis");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

// ---------------------------------------------------------------------------
// Convergence studies

struct ConvergenceRow {
    double tau = 0.0;
    double h = 0.0;
    double e_l2 = 0.0;
    double order_l2 = std::numeric_limits<double>::quiet_NaN();  // NaN on first row
    double e_h1 = 0.0;
    double order_h1 = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceRecord {
    std::vector<ConvergenceRow> rows;
    std::string reference;  // which finer tau or h served as reference
};

inline void fill_orders(ConvergenceRecord& rec) {
    for (std::size_t i = 1; i < rec.rows.size(); ++i) {
        rec.rows[i].order_l2 = std::log2(rec.rows[i - 1].e_l2 / rec.rows[i].e_l2);
        rec.rows[i].order_h1 = std::log2(rec.rows[i - 1].e_h1 / rec.rows[i].e_h1);
    }
}

// Temporal study. The error per study step size is the maximum over all of
// that run's steps of the distance to the reference trajectory at the same
// time, matching the sup-in-time statement of the convergence estimate. The
// maximum sits in the initial transient; a final-time comparison would only
// see the common stationary state. Every study tau must therefore be an
// integer multiple of tau_ref so the comparison times coincide.
inline ConvergenceRecord converge_time(const ProblemSpec& spec, const Mesh& mesh,
                                       const AssembledOperators& ops, const QuadratureRule& quad,
                                       double t_end, std::vector<double> tau_list, double tau_ref,
                                       const FlowOptions& opts = {}) {
    std::sort(tau_list.begin(), tau_list.end(), std::greater<>());
    if (tau_ref >= tau_list.back())
        throw ConfigError("converge_time: tau_ref must be below every study tau");
    for (double tau : tau_list) {
        const double ratio = tau / tau_ref;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
            throw ConfigError("converge_time: every tau must be an integer multiple of tau_ref");
    }
    std::vector<FeFunction> ref_states;
    ref_states.reserve(TimeGrid::from(tau_ref, t_end).n_steps);
    run_flow(spec, mesh, ops, quad, TimeGrid::from(tau_ref, t_end), opts,
             [&](const FlowState& s, const StepDiagnostics&) { ref_states.push_back(s.phi); });
    const auto id = identity_embedding(mesh);

    ConvergenceRecord rec;
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "tau_ref=%.17g", tau_ref);
        rec.reference = buf;
    }
    for (double tau : tau_list) {
        const long ratio = std::lround(tau / tau_ref);
        double e_l2 = 0.0, e_h1 = 0.0;
        run_flow(spec, mesh, ops, quad, TimeGrid::from(tau, t_end), opts,
                 [&](const FlowState& s, const StepDiagnostics&) {
                     const auto& ref_phi = ref_states[s.step * ratio - 1];
                     auto err = cross_mesh_error(s.phi, ref_phi, id, ops, quad);
                     e_l2 = std::max(e_l2, err.e_l2);
                     e_h1 = std::max(e_h1, err.e_h1);
                 });
        rec.rows.push_back({tau, mesh.h, e_l2, std::nan(""), e_h1, std::nan("")});
    }
    fill_orders(rec);
    return rec;
}

inline ConvergenceRecord converge_space(const ProblemSpec& spec, int base_n, int levels,
                                        double tau_fixed, double t_end,
                                        const QuadratureRule& quad,
                                        const FlowOptions& opts = {}) {
    if (levels < 2) throw ConfigError("converge_space: need at least 2 levels");

    // Meshes n, 2n, ..., plus one more refinement as the reference.
    std::vector<Mesh> meshes;
    std::vector<VertexEmbedding> embeddings;  // level k -> k+1
    meshes.push_back(build_uniform_mesh(BoxDomain{spec.domain}, base_n));
    for (int k = 0; k < levels; ++k) {
        auto [fine, emb] = refine_uniform(meshes.back());
        meshes.push_back(std::move(fine));
        embeddings.push_back(std::move(emb));
    }
    const Mesh& ref_mesh = meshes.back();
    auto ref_ops = assemble_operators(ref_mesh);

    const TimeGrid grid = TimeGrid::from(tau_fixed, t_end);
    auto ref = run_flow(spec, ref_mesh, ref_ops, quad, grid, opts);

    // Chained embedding of each study mesh into the reference mesh.
    auto chain_to_ref = [&](int k) {
        VertexEmbedding emb = identity_embedding(meshes[k]);
        for (int j = k; j + 1 < static_cast<int>(meshes.size()); ++j) {
            for (auto& idx : emb.coarse_to_fine) idx = embeddings[j].coarse_to_fine[idx];
        }
        return emb;
    };

    ConvergenceRecord rec;
    {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "h_ref=%.17g", ref_mesh.h);
        rec.reference = buf;
    }
    for (int k = 0; k < levels; ++k) {
        auto ops = assemble_operators(meshes[k]);
        auto run = run_flow(spec, meshes[k], ops, quad, grid, opts);
        auto err = cross_mesh_error(run.state.phi, ref.state.phi, chain_to_ref(k), ref_ops, quad);
        rec.rows.push_back({tau_fixed, meshes[k].h, err.e_l2, std::nan(""), err.e_h1,
                            std::nan("")});
    }
    fill_orders(rec);
    return rec;
}

// ---------------------------------------------------------------------------
// Property-check suite

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

inline CheckResult check_interpolation_inequality() {
    CheckResult r{"discrete_interpolation_inequality", true, ""};
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    struct Case { int dim; int n; };
    for (Case c : {Case{1, 32}, Case{2, 8}, Case{3, 4}}) {
        Mesh mesh = build_uniform_mesh(BoxDomain::unit(c.dim), c.n);
        auto ops = assemble_operators(mesh);
        auto quad = simplex_rule(c.dim, 4);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            std::vector<double> u(ops.n_interior());
            for (auto& v : u) v = unif(rng);
            FeFunction fe = extend_interior(ops, u);
            auto nm = norms(ops, quad, fe);
            FeFunction lap = discrete_laplacian(ops, fe);
            const double lap_l2 = norms(ops, quad, lap).l2;
            const double excess = nm.h1_semi - std::sqrt(nm.l2 * lap_l2);
            worst = std::max(worst, excess);
        }
        if (worst > 1e-9) {
            r.pass = false;
            char buf[96];
            std::snprintf(buf, sizeof(buf), "dim=%d worst excess %.3e", c.dim, worst);
            r.detail += buf;
        }
    }
    return r;
}

inline CheckResult check_normalization_geometry(int samples = 100000, unsigned seed = 7) {
    CheckResult r{"normalization_geometry", true, ""};
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst_ratio = 0.0, worst_cubic = 0.0;
    for (int trial = 0; trial < samples; ++trial) {
        const int dim = 2 + static_cast<int>(unif(rng) * 7.0);
        std::vector<double> a(dim), u(dim);
        for (auto& v : a) v = gauss(rng);
        for (auto& v : u) v = gauss(rng);
        double an = norm2(a);
        for (auto& v : a) v /= an;
        const double proj = dot(a, u);
        for (int i = 0; i < dim; ++i) u[i] -= proj * a[i];
        double un = norm2(u);
        if (un < 1e-14) continue;
        for (auto& v : u) v /= un;
        // Half the samples probe the near-identity regime.
        const double alpha = (trial % 2 == 0) ? unif(rng) * M_PI
                                              : std::abs(gauss(rng)) * 0.1;
        const double rr = (trial % 2 == 0) ? unif(rng) * 2.5 + 1e-6
                                           : 1.0 + gauss(rng) * 0.1;
        if (rr <= 1e-6) continue;
        double etil_sq = 0.0, e_sq = 0.0;
        for (int i = 0; i < dim; ++i) {
            const double b = rr * (std::cos(alpha) * a[i] + std::sin(alpha) * u[i]);
            const double et = a[i] - b;
            const double e = a[i] - b / rr;
            etil_sq += et * et;
            e_sq += e * e;
        }
        const double etil = std::sqrt(etil_sq), e = std::sqrt(e_sq);
        if (etil < 1e-14) continue;
        worst_ratio = std::max(worst_ratio, e / etil);
        if (etil <= 0.5) worst_cubic = std::max(worst_cubic, (e - etil) / (etil * etil * etil));
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max ratio %.4f (bound 4), max cubic const %.4f (bound 8)",
                  worst_ratio, worst_cubic);
    r.detail = buf;
    r.pass = worst_ratio <= 4.0 && worst_cubic <= 8.0;
    return r;
}

inline CheckResult check_sign_discrimination() {
    CheckResult r{"mu_sign_fixed_point", false, ""};
    Mesh mesh = build_uniform_mesh(BoxDomain::unit(1), 32);
    auto ops = assemble_operators(mesh);
    auto quad = simplex_rule(1, 4);
    ProblemSpec spec;
    spec.domain = BoxDomain::unit(1);
    spec.beta = 0.0;
    spec.potential = ScalarField::zero();
    spec.initial = make_initial("sine_product", spec.domain);

    auto eig = smallest_two(ops.A, ops.M, ops, 1e-12);
    FlowState state;
    state.phi = eig.vec1;
    const double nrm = mass_norm(ops, state.phi);
    for (auto& c : state.phi.coeffs) c /= nrm;
    state.mu = chemical_potential(state.phi, ops, spec, quad);
    state.energy = energy(state.phi, ops, spec, quad);

    const double tau = 1.0;  // 1/tau < lambda1 so the wrong sign flips the state
    FlowOptions plus_opts;
    auto [next_plus, dp] = flow_step(state, ops, spec, quad, tau, plus_opts);
    FlowOptions minus_opts;
    minus_opts.mu_sign = MuSign::minus;
    auto [next_minus, dm] = flow_step(state, ops, spec, quad, tau, minus_opts);

    const double dev_plus = std::abs(dp.tilde_norm - 1.0);
    const double dev_minus = std::abs(dm.tilde_norm - 1.0);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "tilde-norm deviation: plus %.3e, minus %.3e", dev_plus,
                  dev_minus);
    r.detail = buf;
    r.pass = dev_plus <= 1e-8 && dev_minus > 1e-3;
    return r;
}

inline CheckResult check_short_flow_invariants() {
    CheckResult r{"mass_energy_invariants", true, ""};
    RunConfig cfg = preset("example1");
    cfg.n = 4;
    cfg.tau = 1e-2;
    ProblemSpec spec = make_problem(cfg);
    Mesh mesh = build_uniform_mesh(spec.domain, cfg.n);
    auto ops = assemble_operators(mesh);
    auto quad = simplex_rule(cfg.dim, cfg.quadrature_degree);
    auto run = run_flow(spec, mesh, ops, quad, TimeGrid::from(cfg.tau, 0.2));
    double worst_mass = 0.0, worst_energy_rise = 0.0;
    for (std::size_t i = 0; i < run.trace.size(); ++i) {
        worst_mass = std::max(worst_mass, std::abs(run.trace[i].mass - 1.0));
        if (i > 0)
            worst_energy_rise =
                std::max(worst_energy_rise, run.trace[i].energy - run.trace[i - 1].energy);
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max |mass-1| %.3e, max energy rise %.3e", worst_mass,
                  worst_energy_rise);
    r.detail = buf;
    r.pass = worst_mass <= 1e-10 && worst_energy_rise <= 1e-8;
    return r;
}

inline std::vector<CheckResult> check_suite() {
    return {check_interpolation_inequality(), check_normalization_geometry(),
            check_sign_discrimination(), check_short_flow_invariants()};
}

// ---------------------------------------------------------------------------
// Output

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_trace_csv(const std::string& path, const FlowTrace& trace) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "step,t,mu,energy,mass,residual,tilde_norm\n";
    for (const auto& row : trace)
        out << row.step << ',' << detail::fmt17(row.t) << ',' << detail::fmt17(row.mu) << ','
            << detail::fmt17(row.energy) << ',' << detail::fmt17(row.mass) << ','
            << detail::fmt17(row.residual) << ',' << detail::fmt17(row.tilde_norm) << '\n';
}

inline void write_table_csv(const std::string& path, const ConvergenceRecord& rec) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "tau,h,e_l2,order_l2,e_h1,order_h1\n";
    for (const auto& row : rec.rows) {
        out << detail::fmt17(row.tau) << ',' << detail::fmt17(row.h) << ','
            << detail::fmt17(row.e_l2) << ','
            << (std::isnan(row.order_l2) ? "" : detail::fmt17(row.order_l2)) << ','
            << detail::fmt17(row.e_h1) << ','
            << (std::isnan(row.order_h1) ? "" : detail::fmt17(row.order_h1)) << '\n';
    }
}

inline void write_summary_json(const std::string& path, const RunConfig& cfg,
                               const FlowResult& result, double wall_seconds) {
    nlohmann::json j;
    j["final_mu"] = result.state.mu;
    j["final_energy"] = result.state.energy;
    j["final_mass"] = result.trace.empty() ? 1.0 : result.trace.back().mass;
    j["steps"] = result.state.step;
    j["converged"] = result.converged;
    j["wall_seconds"] = wall_seconds;
    j["config"] = cfg.raw.is_null() ? nlohmann::json::object() : cfg.raw;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace gpgf
