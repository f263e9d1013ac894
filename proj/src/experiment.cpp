#include "taoi/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

namespace taoi {

namespace {

SystemParams point_params(const SweepSpec& spec, double value) {
    SystemParams p = spec.base;
    if (spec.axis == "t_u")
        p.t_u = static_cast<int>(std::llround(value));
    else if (spec.axis == "q")
        p.q = value;
    else
        throw std::invalid_argument("sweep axis must be 't_u' or 'q'");
    if (spec.delta_max_per_tu > 0) p.delta_max = spec.delta_max_per_tu * p.t_u;
    p.validate();
    return p;
}

struct PointOutcome {
    std::vector<SweepRow> rows;
};

PointOutcome eval_point(const SweepSpec& spec, double value) {
    PointOutcome out;
    SweepRow base_row;
    base_row.axis = spec.axis;
    base_row.axis_value = value;
    try {
        const SystemParams p = point_params(spec, value);
        const EmbeddedSmdp smdp = build_transitions(p);
        const UniformizedMdp mdp = uniformize(smdp, spec.solver.epsilon);
        const Solution sol = rvi_threshold(mdp, spec.solver);
        if (!sol.converged) throw std::runtime_error("solver did not converge");

        SimConfig sim = spec.sim;
        sim.warmup_slots = sim.warmup_slots >= 0
                               ? std::min(sim.warmup_slots, sim.total_slots / 2)
                               : std::min(10LL * p.delta_max, sim.total_slots / 2);

        const Policy policies[3] = {Policy::tabular(sol.policy, p.delta_max),
                                    Policy::always_transmit(), Policy::pre_id_based()};
        for (int i = 0; i < 3; ++i) {
            SweepRow row = base_row;
            row.policy = kSweepPolicies[i];
            row.exact_avg_taoi = evaluate_policy_exact(smdp, tabulate(policies[i], p)).avg_taoi;
            if (spec.with_sim) {
                const SimResult sr = simulate(p, policies[i], sim);
                row.sim_avg_taoi = sr.avg_taoi;
                row.sim_stderr = sr.std_error;
            }
            if (i == 0) {
                row.has_thresholds = true;
                row.threshold_f0 = sol.thresholds[0];
                row.threshold_f1 = sol.thresholds[1];
                row.iters = sol.iters;
            }
            out.rows.push_back(std::move(row));
        }
    } catch (const std::exception& e) {
        for (const char* name : kSweepPolicies) {
            SweepRow row = base_row;
            row.policy = name;
            row.failed = true;
            row.error = e.what();
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

// Gain sensitivity to the age cap: resolve one point again with the cap
// doubled and report the relative shift.
std::string cap_check_line(const SweepSpec& spec) {
    const double value = spec.axis == "q"
                             ? *std::min_element(spec.values.begin(), spec.values.end())
                             : *std::max_element(spec.values.begin(), spec.values.end());
    try {
        SweepSpec wide = spec;
        const SystemParams p = point_params(spec, value);
        wide.delta_max_per_tu = 0;
        wide.base = p;

        const auto gain_at = [&](int delta_max) {
            SystemParams q = p;
            q.delta_max = delta_max;
            const Solution sol = rvi_threshold(uniformize(build_transitions(q), spec.solver.epsilon),
                                               spec.solver);
            if (!sol.converged) throw std::runtime_error("solver did not converge");
            return sol.gain;
        };
        const double g1 = gain_at(p.delta_max);
        const double g2 = gain_at(2 * p.delta_max);
        const double shift = std::abs(g2 - g1) / g1;
        std::ostringstream os;
        os << "cap_check axis_value=" << csv_double(value) << " delta_max=" << p.delta_max
           << " doubled=" << 2 * p.delta_max << " gain=" << csv_double(g1)
           << " gain_doubled=" << csv_double(g2) << " rel_shift=" << csv_double(shift)
           << " within_0.1pct=" << (shift < 1e-3 ? "yes" : "no");
        return os.str();
    } catch (const std::exception& e) {
        return std::string("cap_check failed: ") + e.what();
    }
}

}  // namespace

SweepSpec fig4_preset() {
    SweepSpec spec;
    spec.base = SystemParams{0.9, 0.1, 0.1, 10, 200};
    spec.axis = "t_u";
    for (int tu = 10; tu <= 100; tu += 10) spec.values.push_back(tu);
    spec.delta_max_per_tu = 20;
    spec.preset_name = "fig4";
    return spec;
}

SweepSpec fig5_preset() {
    SweepSpec spec;
    spec.base = SystemParams{0.9, 0.1, 0.1, 100, 2000};
    spec.axis = "q";
    for (int i = 0; i < 5; ++i) spec.values.push_back(0.5 + 0.1 * i);
    spec.delta_max_per_tu = 20;
    spec.preset_name = "fig5";
    return spec;
}

SweepResult run_sweep(const SweepSpec& spec) {
    if (spec.values.empty()) throw std::invalid_argument("sweep needs at least one axis value");

    SweepResult result;
    {
        std::ostringstream os;
        os << "sweep axis=" << spec.axis;
        if (!spec.preset_name.empty())
            os << " preset=" << spec.preset_name << " (reconstructed grid)";
        os << " q=" << csv_double(spec.base.q) << " p_a=" << csv_double(spec.base.p_a)
           << " p_b=" << csv_double(spec.base.p_b);
        if (spec.axis != "t_u") os << " t_u=" << spec.base.t_u;
        if (spec.delta_max_per_tu > 0)
            os << " delta_max=" << spec.delta_max_per_tu << "*t_u";
        else
            os << " delta_max=" << spec.base.delta_max;
        os << " epsilon=" << csv_double(spec.solver.epsilon)
           << " tol=" << csv_double(spec.solver.tol);
        if (spec.with_sim)
            os << " slots=" << spec.sim.total_slots << " reps=" << spec.sim.replications
               << " seed=" << spec.sim.seed;
        result.metadata.push_back(os.str());
    }

    std::vector<std::future<PointOutcome>> futures;
    futures.reserve(spec.values.size());
    for (double value : spec.values)
        futures.push_back(std::async(std::launch::async, eval_point, std::cref(spec), value));
    for (auto& fut : futures) {
        PointOutcome point = fut.get();
        for (auto& row : point.rows) result.rows.push_back(std::move(row));
    }

    if (spec.cap_check) result.metadata.push_back(cap_check_line(spec));
    return result;
}

std::string sweep_to_csv(const SweepResult& result) {
    std::string out;
    for (const auto& line : result.metadata) out += "# " + line + "\n";
    out += "axis,axis_value,policy,exact_avg_taoi,sim_avg_taoi,sim_stderr,threshold_f0,"
           "threshold_f1,iters\n";
    for (const auto& row : result.rows) {
        out += row.axis + "," + csv_double(row.axis_value) + "," + row.policy + ",";
        if (row.failed) {
            out += ",,,,,\n";
            continue;
        }
        out += csv_double(row.exact_avg_taoi) + ",";
        if (row.sim_avg_taoi) out += csv_double(*row.sim_avg_taoi);
        out += ",";
        if (row.sim_stderr) out += csv_double(*row.sim_stderr);
        out += ",";
        if (row.has_thresholds) {
            out += row.threshold_f0 ? std::to_string(*row.threshold_f0) : "never";
            out += ",";
            out += row.threshold_f1 ? std::to_string(*row.threshold_f1) : "never";
            out += ",";
            out += std::to_string(*row.iters);
        } else {
            out += ",,";
        }
        out += "\n";
    }
    return out;
}

std::vector<SystemParams> default_verify_grid() {
    std::vector<SystemParams> grid;
    for (double q : {0.5, 0.9})
        for (int tu : {2, 10, 100})
            for (double p : {0.1, 0.3}) grid.push_back(SystemParams{q, p, p, tu, 20 * tu});
    return grid;
}

std::vector<VerifyPointResult> run_verification(const std::vector<SystemParams>& grid,
                                                const SolverConfig& cfg) {
    const auto verify_point = [&cfg](const SystemParams& p) {
        VerifyPointResult out;
        out.params = p;
        const EmbeddedSmdp smdp = build_transitions(p);
        const UniformizedMdp mdp = uniformize(smdp, cfg.epsilon);
        out.solution = rvi_threshold(mdp, cfg);
        if (out.solution.converged) out.report = verify_structure(out.solution, mdp, cfg);
        if (smdp.size() <= 20) {
            const BruteForceResult bf = brute_force_optimal(smdp);
            out.oracle_checked = true;
            out.oracle_gap = std::abs(out.solution.gain - bf.value);
            try {
                extract_thresholds(bf.policy, p);
                out.oracle_threshold_type = true;
            } catch (const NonThresholdPolicyError&) {
                out.oracle_threshold_type = false;
            }
        }
        return out;
    };

    std::vector<std::future<VerifyPointResult>> futures;
    futures.reserve(grid.size());
    for (const auto& p : grid)
        futures.push_back(std::async(std::launch::async, verify_point, p));
    std::vector<VerifyPointResult> results;
    results.reserve(grid.size());
    for (auto& fut : futures) results.push_back(fut.get());
    return results;
}

nlohmann::json verify_point_to_json(const VerifyPointResult& point) {
    nlohmann::json j{{"params", params_to_json(point.params)},
                     {"gain", point.solution.gain},
                     {"iters", point.solution.iters},
                     {"converged", point.solution.converged},
                     {"report", lemma_report_to_json(point.report)}};
    if (point.oracle_checked)
        j["oracle"] = {{"gap", point.oracle_gap},
                       {"threshold_type", point.oracle_threshold_type}};
    else
        j["oracle"] = nullptr;
    return j;
}

}  // namespace taoi
