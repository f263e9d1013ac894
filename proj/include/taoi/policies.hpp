#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include "taoi/solver.hpp"

namespace taoi {

/**
 * Stationary deterministic transmission policies compared in experiments:
 * the always-transmit and pre-identification-based baselines, threshold
 * policies, and arbitrary tabular policies (e.g. a solver output).
 */
class Policy {
public:
    static Policy always_transmit();
    /// Transmit exactly when the pre-identifier reports a target; ignores age.
    static Policy pre_id_based();
    /// Transmit when delta >= omega[pre_id]; a disengaged entry never transmits.
    static Policy threshold(Thresholds omega);
    /// Action table in state-index order (age-major within each pre-id group).
    static Policy tabular(std::vector<Action> table, int delta_max);

    Action decide(const State& s) const;
    std::string_view name() const;

private:
    struct Always {};
    struct PreId {};
    struct Thresh {
        Thresholds omega;
    };
    struct Table {
        std::vector<Action> actions;
        int delta_max;
    };

    std::variant<Always, PreId, Thresh, Table> impl_;

    explicit Policy(std::variant<Always, PreId, Thresh, Table> impl) : impl_(std::move(impl)) {}
};

/// Materializes any policy as an action table in state-index order.
std::vector<Action> tabulate(const Policy& policy, const SystemParams& params);

}  // namespace taoi
