// gpgf: ground-state solver for the Gross-Pitaevskii eigenvalue problem via
// the L2-normalized gradient flow, with convergence-study and property-check
// subcommands. Exit codes: 0 success, 1 numerical failure, 2 config error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "gpgf/driver.hpp"

namespace {

using namespace gpgf;

void warn_inverse_cfl(const RunConfig& cfg, const Mesh& mesh) {
    const double h4 = std::pow(mesh.h, 4);
    if (cfg.tau < h4)
        std::cerr << "warning: tau = " << cfg.tau << " is below h^4 = " << h4
                  << "; the error analysis assumes tau >= kappa*h^4\n";
}

int cmd_run(const RunConfig& cfg, const std::string& out_dir) {
    ProblemSpec spec = make_problem(cfg);
    Mesh mesh = build_uniform_mesh(spec.domain, cfg.n);
    warn_inverse_cfl(cfg, mesh);
    auto ops = assemble_operators(mesh);
    auto quad = simplex_rule(cfg.dim, cfg.quadrature_degree);
    FlowOptions opts;
    opts.cg_tol = cfg.solver_tol;

    const auto t0 = std::chrono::steady_clock::now();
    FlowResult result;
    if (cfg.residual_tol) {
        StopRule stop{*cfg.residual_tol, cfg.max_steps};
        result = run_flow(spec, mesh, ops, quad, cfg.tau, stop, opts);
    } else if (cfg.t_end) {
        result = run_flow(spec, mesh, ops, quad, TimeGrid::from(cfg.tau, *cfg.t_end), opts);
    } else {
        throw ConfigError("run mode needs t_end or residual_tol");
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::filesystem::create_directories(out_dir);
    write_trace_csv(out_dir + "/trace.csv", result.trace);
    write_summary_json(out_dir + "/summary.json", cfg, result, wall);
    std::printf("steps=%d mu=%.12g energy=%.12g mass=%.12g converged=%d\n", result.state.step,
                result.state.mu, result.state.energy,
                result.trace.empty() ? 1.0 : result.trace.back().mass,
                result.converged ? 1 : 0);
    return result.converged ? 0 : 1;
}

int cmd_converge(const RunConfig& cfg, const std::string& mode, const std::string& out_dir) {
    ProblemSpec spec = make_problem(cfg);
    auto quad = simplex_rule(cfg.dim, cfg.quadrature_degree);
    FlowOptions opts;
    opts.cg_tol = cfg.solver_tol;
    if (!cfg.t_end) throw ConfigError("converge mode needs t_end");

    ConvergenceRecord rec;
    if (mode == "time") {
        if (cfg.tau_list.empty()) throw ConfigError("converge --mode time needs tau_list");
        Mesh mesh = build_uniform_mesh(spec.domain, cfg.n);
        auto ops = assemble_operators(mesh);
        rec = converge_time(spec, mesh, ops, quad, *cfg.t_end, cfg.tau_list, cfg.tau_ref, opts);
    } else if (mode == "space") {
        rec = converge_space(spec, cfg.n, cfg.levels, cfg.tau, *cfg.t_end, quad, opts);
    } else {
        throw ConfigError("converge mode must be time or space");
    }

    std::filesystem::create_directories(out_dir);
    write_table_csv(out_dir + "/table.csv", rec);
    std::printf("reference: %s\n", rec.reference.c_str());
    std::printf("tau,h,e_l2,order_l2,e_h1,order_h1\n");
    for (const auto& row : rec.rows)
        std::printf("%.6g,%.6g,%.6e,%s,%.6e,%s\n", row.tau, row.h, row.e_l2,
                    std::isnan(row.order_l2) ? "-" : std::to_string(row.order_l2).c_str(),
                    row.e_h1,
                    std::isnan(row.order_h1) ? "-" : std::to_string(row.order_h1).c_str());
    return 0;
}

int cmd_eigs(const RunConfig& cfg) {
    ProblemSpec spec = make_problem(cfg);
    Mesh mesh = build_uniform_mesh(spec.domain, cfg.n);
    auto ops = assemble_operators(mesh);
    auto quad = simplex_rule(cfg.dim, cfg.quadrature_degree);
    FlowOptions opts;
    opts.cg_tol = cfg.solver_tol;

    FeFunction phi_gs = FeFunction::zeros(mesh);
    if (cfg.beta != 0.0) {
        StopRule stop{cfg.residual_tol.value_or(1e-8), cfg.max_steps};
        auto run = run_flow(spec, mesh, ops, quad, cfg.tau, stop, opts);
        if (!run.converged) {
            std::cerr << "ground-state flow did not converge\n";
            return 1;
        }
        phi_gs = run.state.phi;
        std::printf("mu_gs=%.12g energy_gs=%.12g\n", run.state.mu, run.state.energy);
    }
    auto l = linearized_operator(ops, spec, phi_gs, quad);
    auto eig = smallest_two(l, ops.M, ops);
    std::printf("lambda1=%.12g lambda2=%.12g degenerate=%d\n", eig.lambda1, eig.lambda2,
                eig.degenerate_pair ? 1 : 0);
    return 0;
}

int cmd_check() {
    auto results = check_suite();
    bool all = true;
    for (const auto& r : results) {
        std::printf("%s %s%s%s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.empty() ? "" : ": ", r.detail.c_str());
        all = all && r.pass;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"L2-normalized gradient flow solver for the Gross-Pitaevskii ground state"};
    app.require_subcommand(1);

    std::string config_path, out_override, converge_mode;

    auto* run = app.add_subcommand("run", "run the gradient flow from a config file");
    run->add_option("--config", config_path, "JSON config file")->required();
    run->add_option("--out", out_override, "output directory override");

    auto* conv = app.add_subcommand("converge", "temporal or spatial convergence study");
    conv->add_option("--mode", converge_mode, "time or space")->required();
    conv->add_option("--config", config_path, "JSON config file")->required();
    conv->add_option("--out", out_override, "output directory override");

    auto* eigs = app.add_subcommand("eigs", "two smallest eigenvalues of the linearized operator");
    eigs->add_option("--config", config_path, "JSON config file")->required();

    app.add_subcommand("check", "run the property-check suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("check")) return cmd_check();
        gpgf::RunConfig cfg = gpgf::load_config(config_path);
        const std::string out_dir = out_override.empty() ? cfg.out_dir : out_override;
        if (app.got_subcommand(run)) return cmd_run(cfg, out_dir);
        if (app.got_subcommand(conv)) return cmd_converge(cfg, converge_mode, out_dir);
        if (app.got_subcommand(eigs)) return cmd_eigs(cfg);
    } catch (const gpgf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const gpgf::UnknownPreset& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const gpgf::Error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
