#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "taoi/experiment.hpp"
#include "taoi/policies.hpp"
#include "taoi/serde.hpp"
#include "taoi/simulator.hpp"
#include "taoi/solver.hpp"

namespace {

using namespace taoi;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNoConvergence = 2;
constexpr int kExitVerifyFailure = 3;

struct Options {
    std::string config_path;
    std::string out_path;
    SystemParams params{0.9, 0.1, 0.1, 10, 0};  // delta_max 0 resolves to cap_mult * t_u
    SolverConfig solver;
    SimConfig sim;
    int cap_mult = 20;

    std::string solver_kind = "threshold";
    std::string dump_kernel_path;

    std::string policy_name = "optimal";
    std::string policy_file;
    int omega0 = -1;
    int omega1 = -1;
    long long trace_steps = 0;
    std::string trace_out;

    std::string preset;
    std::string axis = "t_u";
    std::vector<double> values;
    bool no_sim = false;
    bool no_cap_check = false;

    std::vector<double> grid_q{0.5, 0.9};
    std::vector<int> grid_tu{2, 10, 100};
    std::vector<double> grid_p{0.1, 0.3};
};

void add_common_options(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config_path, "JSON config file; flags override its fields");
    sub->add_option("--out", o.out_path, "write the result here instead of stdout");
    sub->add_option("--q", o.params.q, "target-image prior");
    sub->add_option("--pa", o.params.p_a, "pre-identifier false-positive rate");
    sub->add_option("--pb", o.params.p_b, "pre-identifier false-negative rate");
    sub->add_option("--tu", o.params.t_u, "transmission delay in slots");
    sub->add_option("--delta-max", o.params.delta_max, "age cap (default 20 * t_u)");
    sub->add_option("--epsilon", o.solver.epsilon, "uniformization constant in (0, 1]");
    sub->add_option("--tol", o.solver.tol, "convergence tolerance");
    sub->add_option("--max-iters", o.solver.max_iters, "iteration cap");
    sub->add_option("--seed", o.sim.seed, "simulation seed");
    sub->add_option("--slots", o.sim.total_slots, "simulation horizon in slots");
    sub->add_option("--warmup", o.sim.warmup_slots, "warmup slots (default 10 * delta_max)");
    sub->add_option("--reps", o.sim.replications, "simulation replications");
    sub->add_option("--initial-delta", o.sim.initial_delta, "initial age");
    sub->add_option("--cap-mult", o.cap_mult, "delta_max multiplier when --delta-max is absent");
}

// Config-file fields fill in everything the command line left untouched.
void apply_config(const CLI::App* sub, Options& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw std::invalid_argument("cannot open config file: " + o.config_path);
    const nlohmann::json cfg = nlohmann::json::parse(in);

    const auto absent = [sub](const char* flag) { return sub->count(flag) == 0; };
    if (cfg.contains("params")) {
        const auto& j = cfg.at("params");
        if (absent("--q") && j.contains("q")) o.params.q = j.at("q").get<double>();
        if (absent("--pa") && j.contains("p_a")) o.params.p_a = j.at("p_a").get<double>();
        if (absent("--pb") && j.contains("p_b")) o.params.p_b = j.at("p_b").get<double>();
        if (absent("--tu") && j.contains("t_u")) o.params.t_u = j.at("t_u").get<int>();
        if (absent("--delta-max") && j.contains("delta_max"))
            o.params.delta_max = j.at("delta_max").get<int>();
    }
    if (cfg.contains("solver")) {
        const auto& j = cfg.at("solver");
        if (absent("--epsilon") && j.contains("epsilon"))
            o.solver.epsilon = j.at("epsilon").get<double>();
        if (absent("--tol") && j.contains("tol")) o.solver.tol = j.at("tol").get<double>();
        if (absent("--max-iters") && j.contains("max_iters"))
            o.solver.max_iters = j.at("max_iters").get<long>();
    }
    if (cfg.contains("sim")) {
        const auto& j = cfg.at("sim");
        if (absent("--seed") && j.contains("seed"))
            o.sim.seed = j.at("seed").get<std::uint64_t>();
        if (absent("--slots") && j.contains("slots"))
            o.sim.total_slots = j.at("slots").get<long long>();
        if (absent("--warmup") && j.contains("warmup"))
            o.sim.warmup_slots = j.at("warmup").get<long long>();
        if (absent("--reps") && j.contains("replications"))
            o.sim.replications = j.at("replications").get<int>();
        if (absent("--initial-delta") && j.contains("initial_delta"))
            o.sim.initial_delta = j.at("initial_delta").get<int>();
    }
    if (cfg.contains("sweep")) {
        const auto& j = cfg.at("sweep");
        if (absent("--preset") && j.contains("preset")) o.preset = j.at("preset").get<std::string>();
        if (absent("--axis") && j.contains("axis")) o.axis = j.at("axis").get<std::string>();
        if (absent("--values") && j.contains("values"))
            o.values = j.at("values").get<std::vector<double>>();
    }
    if (cfg.contains("policy") && absent("--policy"))
        o.policy_name = cfg.at("policy").get<std::string>();
}

void resolve_delta_max(Options& o) {
    if (o.params.delta_max <= 0) o.params.delta_max = o.cap_mult * o.params.t_u;
}

void write_output(const std::string& body, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << body;
        if (body.empty() || body.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write output file: " + out_path);
    out << body;
}

std::string threshold_str(const std::optional<int>& omega) {
    return omega ? std::to_string(*omega) : "never";
}

Solution solve_instance(const Options& o) {
    const EmbeddedSmdp smdp = build_transitions(o.params);
    const UniformizedMdp mdp = uniformize(smdp, o.solver.epsilon);
    return o.solver_kind == "plain" ? rvi(mdp, o.solver) : rvi_threshold(mdp, o.solver);
}

int run_solve(const Options& o) {
    o.params.validate();
    derive_probs(o.params);  // surfaces degenerate posteriors as a validation error
    const EmbeddedSmdp smdp = build_transitions(o.params);
    const UniformizedMdp mdp = uniformize(smdp, o.solver.epsilon);
    const Solution sol =
        o.solver_kind == "plain" ? rvi(mdp, o.solver) : rvi_threshold(mdp, o.solver);

    if (!o.dump_kernel_path.empty())
        write_output(kernel_to_json(mdp).dump(2) + "\n", o.dump_kernel_path);

    write_output(solution_to_json(o.params, sol).dump(2) + "\n", o.out_path);

    std::cout << "thresholds: F0=" << threshold_str(sol.thresholds[0])
              << " F1=" << threshold_str(sol.thresholds[1]) << " gain=" << sol.gain
              << " iters=" << sol.iters << " residual=" << sol.residual
              << " converged=" << (sol.converged ? "yes" : "no");
    if (sol.thresholds[0] && sol.thresholds[1])
        std::cout << " (observed F1<=F0: "
                  << (*sol.thresholds[1] <= *sol.thresholds[0] ? "yes" : "no") << ")";
    std::cout << '\n';
    return sol.converged ? kExitOk : kExitNoConvergence;
}

int run_simulate(const Options& o) {
    o.params.validate();
    std::optional<Policy> policy;
    if (!o.policy_file.empty()) {
        std::ifstream in(o.policy_file);
        if (!in) throw std::invalid_argument("cannot open policy file: " + o.policy_file);
        policy = Policy::tabular(policy_from_json(nlohmann::json::parse(in)),
                                 o.params.delta_max);
    } else if (o.policy_name == "always") {
        policy = Policy::always_transmit();
    } else if (o.policy_name == "preid") {
        policy = Policy::pre_id_based();
    } else if (o.policy_name == "threshold") {
        Thresholds omega{};
        if (o.omega0 >= 1) omega[0] = o.omega0;
        if (o.omega1 >= 1) omega[1] = o.omega1;
        policy = Policy::threshold(omega);
    } else if (o.policy_name == "optimal") {
        const Solution sol = solve_instance(o);
        if (!sol.converged) {
            std::cerr << "solver did not converge\n";
            return kExitNoConvergence;
        }
        policy = Policy::tabular(sol.policy, o.params.delta_max);
    } else {
        throw std::invalid_argument("unknown policy: " + o.policy_name);
    }

    const SimResult res = simulate(o.params, *policy, o.sim);
    write_output(sim_result_to_json(res).dump(2) + "\n", o.out_path);

    if (o.trace_steps > 0) {
        const auto records = trace(o.params, *policy, o.sim, o.trace_steps);
        write_output(trace_to_csv(records), o.trace_out);
    }
    return kExitOk;
}

int run_sweep_cmd(const Options& o, const CLI::App* sub) {
    SweepSpec spec;
    if (o.preset == "fig4") {
        spec = fig4_preset();
    } else if (o.preset == "fig5") {
        spec = fig5_preset();
    } else if (o.preset.empty()) {
        spec.base = o.params;
        spec.axis = o.axis;
        spec.values = o.values;
        // an explicit cap wins over the per-point multiplier
        spec.delta_max_per_tu = sub->count("--delta-max") ? 0 : o.cap_mult;
        if (spec.delta_max_per_tu == 0 && o.params.delta_max <= 0)
            throw std::invalid_argument("custom sweeps need --delta-max or --cap-mult");
    } else {
        throw std::invalid_argument("unknown preset: " + o.preset);
    }
    spec.solver = o.solver;
    spec.sim = o.sim;
    spec.with_sim = !o.no_sim;
    spec.cap_check = !o.no_cap_check;

    const SweepResult result = run_sweep(spec);
    write_output(sweep_to_csv(result), o.out_path);
    for (const auto& row : result.rows)
        if (row.failed) {
            std::cerr << "sweep point " << row.axis << "=" << row.axis_value
                      << " failed: " << row.error << '\n';
            return kExitNoConvergence;
        }
    return kExitOk;
}

int run_verify(const Options& o) {
    std::vector<SystemParams> grid;
    for (double q : o.grid_q)
        for (int tu : o.grid_tu)
            for (double p : o.grid_p) grid.push_back(SystemParams{q, p, p, tu, o.cap_mult * tu});
    for (const auto& p : grid) p.validate();

    const auto results = run_verification(grid, o.solver);

    nlohmann::json out = nlohmann::json::array();
    for (const auto& point : results) out.push_back(verify_point_to_json(point));
    write_output(out.dump(2) + "\n", o.out_path);

    bool unconverged = false;
    bool hard_failure = false;
    for (const auto& point : results) {
        if (!point.solution.converged) {
            unconverged = true;
            continue;
        }
        if (!point.report.theorem1_threshold_pass || !point.report.lemma1.pass)
            hard_failure = true;
    }
    if (hard_failure) return kExitVerifyFailure;
    if (unconverged) return kExitNoConvergence;
    return kExitOk;
}

int run_oracle(const Options& o) {
    o.params.validate();
    const EmbeddedSmdp smdp = build_transitions(o.params);
    const BruteForceResult oracle = brute_force_optimal(smdp);  // guard: <= 20 states

    const UniformizedMdp mdp = uniformize(smdp, o.solver.epsilon);
    const Solution sol = rvi(mdp, o.solver);

    bool threshold_type = true;
    try {
        extract_thresholds(oracle.policy, o.params);
    } catch (const NonThresholdPolicyError&) {
        threshold_type = false;
    }

    const nlohmann::json j{{"params", params_to_json(o.params)},
                           {"oracle_value", oracle.value},
                           {"rvi_gain", sol.gain},
                           {"abs_gap", std::abs(sol.gain - oracle.value)},
                           {"oracle_policy_threshold_type", threshold_type},
                           {"policies_evaluated", oracle.policies_evaluated}};
    write_output(j.dump(2) + "\n", o.out_path);
    return sol.converged ? kExitOk : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Task-oriented age-of-information planner for remote monitoring"};
    app.require_subcommand(1);
    Options o;

    CLI::App* solve = app.add_subcommand("solve", "compute the optimal transmission policy");
    add_common_options(solve, o);
    solve->add_option("--solver", o.solver_kind, "plain|threshold")
        ->check(CLI::IsMember({"plain", "threshold"}));
    solve->add_option("--dump-kernel", o.dump_kernel_path, "write the uniformized kernel JSON");

    CLI::App* sim = app.add_subcommand("simulate", "slot-level Monte Carlo run of a policy");
    add_common_options(sim, o);
    sim->add_option("--policy", o.policy_name, "optimal|always|preid|threshold");
    sim->add_option("--policy-file", o.policy_file, "tabular policy from a solution JSON");
    sim->add_option("--omega0", o.omega0, "threshold for pre-id 0 (-1 = never)");
    sim->add_option("--omega1", o.omega1, "threshold for pre-id 1 (-1 = never)");
    sim->add_option("--trace", o.trace_steps, "also emit a step trace of this many steps");
    sim->add_option("--trace-out", o.trace_out, "trace CSV destination");

    CLI::App* sweep = app.add_subcommand("sweep", "compare policies across a parameter axis");
    add_common_options(sweep, o);
    sweep->add_option("--preset", o.preset, "fig4|fig5")
        ->check(CLI::IsMember({"fig4", "fig5"}));
    sweep->add_option("--axis", o.axis, "t_u|q")->check(CLI::IsMember({"t_u", "q"}));
    sweep->add_option("--values", o.values, "axis values")->delimiter(',');
    sweep->add_flag("--no-sim", o.no_sim, "skip the simulation columns");
    sweep->add_flag("--no-cap-check", o.no_cap_check, "skip the cap-sensitivity rerun");

    CLI::App* verify = app.add_subcommand("verify", "structure checks across a parameter grid");
    add_common_options(verify, o);
    verify->add_option("--grid-q", o.grid_q, "grid priors")->delimiter(',');
    verify->add_option("--grid-tu", o.grid_tu, "grid delays")->delimiter(',');
    verify->add_option("--grid-p", o.grid_p, "grid confusion rates (p_a = p_b)")->delimiter(',');

    CLI::App* oracle = app.add_subcommand("oracle", "exhaustive check on a tiny instance");
    add_common_options(oracle, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (*solve) {
            apply_config(solve, o);
            resolve_delta_max(o);
            return run_solve(o);
        }
        if (*sim) {
            apply_config(sim, o);
            resolve_delta_max(o);
            return run_simulate(o);
        }
        if (*sweep) {
            apply_config(sweep, o);
            return run_sweep_cmd(o, sweep);
        }
        if (*verify) {
            apply_config(verify, o);
            return run_verify(o);
        }
        if (*oracle) {
            apply_config(oracle, o);
            resolve_delta_max(o);
            return run_oracle(o);
        }
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoConvergence;
    }
    return kExitValidation;
}
