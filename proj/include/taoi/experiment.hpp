#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taoi/policies.hpp"
#include "taoi/serde.hpp"
#include "taoi/simulator.hpp"
#include "taoi/solver.hpp"

namespace taoi {

/// Names of the policies every sweep compares.
inline constexpr const char* kSweepPolicies[3] = {"optimal", "always_transmit", "pre_id_based"};

struct SweepSpec {
    SystemParams base;
    std::string axis;            // "t_u" or "q"
    std::vector<double> values;  // one sweep point per value
    SolverConfig solver;
    SimConfig sim;
    bool with_sim = true;
    int delta_max_per_tu = 0;  // when > 0, each point runs with delta_max = this * t_u
    bool cap_check = true;     // rerun one point with the cap doubled, report the gain shift
    std::string preset_name;
};

struct SweepRow {
    std::string axis;
    double axis_value = 0.0;
    std::string policy;
    double exact_avg_taoi = 0.0;
    std::optional<double> sim_avg_taoi;
    std::optional<double> sim_stderr;
    std::optional<int> threshold_f0;
    std::optional<int> threshold_f1;
    std::optional<long> iters;
    bool has_thresholds = false;  // thresholds/iters are only filled on optimal rows
    bool failed = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::string> metadata;  // emitted as leading '#' comment lines
};

/// T_u from 10 to 100 in steps of 10, q = 0.9, p_a = p_b = 0.1, cap 20 * t_u.
SweepSpec fig4_preset();
/// q from 0.5 to 0.9 in steps of 0.1, T_u = 100, p_a = p_b = 0.1, cap 20 * t_u.
SweepSpec fig5_preset();

/// Solves and evaluates every point (concurrently), rows ordered by axis
/// value then policy. Per-point failures are recorded on the affected rows.
SweepResult run_sweep(const SweepSpec& spec);

/// axis,axis_value,policy,exact_avg_taoi,sim_avg_taoi,sim_stderr,threshold_f0,threshold_f1,iters
std::string sweep_to_csv(const SweepResult& result);

struct VerifyPointResult {
    SystemParams params;
    Solution solution;
    LemmaReport report;
    bool oracle_checked = false;       // exhaustive cross-check, only when feasible
    double oracle_gap = 0.0;
    bool oracle_threshold_type = false;
};

/// q in {0.5, 0.9} x T_u in {2, 10, 100} x p_a = p_b in {0.1, 0.3}, cap 20 * t_u.
std::vector<SystemParams> default_verify_grid();

/// Solves and structure-checks every grid point; includes the exhaustive
/// oracle comparison whenever the instance fits the enumeration guard.
std::vector<VerifyPointResult> run_verification(const std::vector<SystemParams>& grid,
                                                const SolverConfig& cfg);

nlohmann::json verify_point_to_json(const VerifyPointResult& point);

}  // namespace taoi
