#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "taoi/kernel.hpp"
#include "taoi/simulator.hpp"
#include "taoi/solver.hpp"

namespace taoi {

nlohmann::json params_to_json(const SystemParams& params);
SystemParams params_from_json(const nlohmann::json& j);

/// {"params":…, "gain":…, "thresholds":{"F0":…,"F1":…}, "policy":[…],
///  "h":[…], "iters":…, "residual":…}; a missing threshold is "never".
nlohmann::json solution_to_json(const SystemParams& params, const Solution& sol);

nlohmann::json lemma_report_to_json(const LemmaReport& rep);

/// Kernel dump for debugging and cross-implementation diffing:
/// {"params":…, "epsilon":…, "rows":[{"s":i,"a":a,"to":[[j,p],…],"r":x}]}.
nlohmann::json kernel_to_json(const UniformizedMdp& mdp);

nlohmann::json sim_result_to_json(const SimResult& res);

/// Action table as a 0/1 array in state-index order.
nlohmann::json policy_to_json(const std::vector<Action>& policy);
/// Accepts either the bare array or an object carrying a "policy" field.
std::vector<Action> policy_from_json(const nlohmann::json& j);

/// step,slot,delta,pre_id,action,d,delta_next — d is -1 for skip steps.
std::string trace_to_csv(const std::vector<TraceRecord>& records);

/// Fixed-format floating-point field for CSV output.
std::string csv_double(double v);

}  // namespace taoi
