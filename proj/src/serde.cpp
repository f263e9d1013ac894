#include "taoi/serde.hpp"

#include <cstdio>

namespace taoi {

namespace {

nlohmann::json threshold_to_json(const std::optional<int>& omega) {
    if (omega) return *omega;
    return "never";
}

}  // namespace

nlohmann::json params_to_json(const SystemParams& params) {
    return {{"q", params.q},
            {"p_a", params.p_a},
            {"p_b", params.p_b},
            {"t_u", params.t_u},
            {"delta_max", params.delta_max}};
}

SystemParams params_from_json(const nlohmann::json& j) {
    SystemParams p;
    if (j.contains("q")) p.q = j.at("q").get<double>();
    if (j.contains("p_a")) p.p_a = j.at("p_a").get<double>();
    if (j.contains("p_b")) p.p_b = j.at("p_b").get<double>();
    if (j.contains("t_u")) p.t_u = j.at("t_u").get<int>();
    if (j.contains("delta_max")) p.delta_max = j.at("delta_max").get<int>();
    return p;
}

nlohmann::json solution_to_json(const SystemParams& params, const Solution& sol) {
    return {{"params", params_to_json(params)},
            {"gain", sol.gain},
            {"thresholds",
             {{"F0", threshold_to_json(sol.thresholds[0])},
              {"F1", threshold_to_json(sol.thresholds[1])}}},
            {"policy", policy_to_json(sol.policy)},
            {"h", sol.h},
            {"iters", sol.iters},
            {"residual", sol.residual}};
}

nlohmann::json lemma_report_to_json(const LemmaReport& rep) {
    const auto check = [](const StructureCheck& c) {
        return nlohmann::json{{"pass", c.pass}, {"margin", c.margin}};
    };
    return {{"lemma1", check(rep.lemma1)},
            {"lemma2", check(rep.lemma2)},
            {"lemma3",
             {{"pass", rep.lemma3.pass},
              {"margin", rep.lemma3.margin},
              {"by_action",
               {{"skip",
                 {{"F0", rep.lemma3_margin[0][0]}, {"F1", rep.lemma3_margin[0][1]}}},
                {"transmit",
                 {{"F0", rep.lemma3_margin[1][0]}, {"F1", rep.lemma3_margin[1][1]}}}}}}},
            {"theorem1", {{"pass", rep.theorem1_threshold_pass}}},
            {"appendix", check(rep.appendix_inequality)}};
}

nlohmann::json kernel_to_json(const UniformizedMdp& mdp) {
    nlohmann::json rows = nlohmann::json::array();
    for (int s = 0; s < mdp.size(); ++s) {
        for (int a = 0; a < 2; ++a) {
            nlohmann::json to = nlohmann::json::array();
            for (const auto& e : mdp.rows[s][a]) to.push_back({e.to, e.prob});
            rows.push_back({{"s", s}, {"a", a}, {"to", to}, {"r", mdp.rewards[s][a]}});
        }
    }
    return {{"params", params_to_json(mdp.params)}, {"epsilon", mdp.epsilon}, {"rows", rows}};
}

nlohmann::json sim_result_to_json(const SimResult& res) {
    return {{"avg_taoi", res.avg_taoi},
            {"std_error", res.std_error},
            {"per_replication", res.per_replication},
            {"steps", res.steps_taken},
            {"transmissions", res.transmissions},
            {"successes", res.successes},
            {"slots", res.slots_simulated}};
}

nlohmann::json policy_to_json(const std::vector<Action>& policy) {
    nlohmann::json arr = nlohmann::json::array();
    for (Action a : policy) arr.push_back(action_index(a));
    return arr;
}

std::vector<Action> policy_from_json(const nlohmann::json& j) {
    const nlohmann::json& arr = j.is_object() ? j.at("policy") : j;
    if (!arr.is_array()) throw std::invalid_argument("policy JSON must be an array of 0/1");
    std::vector<Action> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        const int a = v.get<int>();
        if (a != 0 && a != 1) throw std::invalid_argument("policy entries must be 0 or 1");
        out.push_back(a == 1 ? Action::transmit : Action::skip);
    }
    return out;
}

std::string trace_to_csv(const std::vector<TraceRecord>& records) {
    std::string out = "step,slot,delta,pre_id,action,d,delta_next\n";
    char line[160];
    for (const auto& r : records) {
        std::snprintf(line, sizeof(line), "%lld,%lld,%d,%d,%d,%d,%d\n", r.step, r.slot, r.delta,
                      r.pre_id, r.action, r.success, r.delta_next);
        out += line;
    }
    return out;
}

std::string csv_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace taoi
