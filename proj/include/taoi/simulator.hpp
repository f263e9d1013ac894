#pragma once

#include <cstdint>
#include <vector>

#include "taoi/policies.hpp"

namespace taoi {

struct SimConfig {
    long long total_slots = 1000000;  // horizon, in slots
    long long warmup_slots = -1;      // excluded from averaging; negative = 10 * delta_max
    std::uint64_t seed = 1;           // replication r runs with seed ^ r
    int initial_delta = 1;
    int replications = 1;
};

struct SimResult {
    double avg_taoi = 0.0;   // mean of the per-replication slot averages
    double std_error = 0.0;  // standard error over replications (0 for a single one)
    std::vector<double> per_replication;
    long long steps_taken = 0;      // totals across replications
    long long transmissions = 0;
    long long successes = 0;
    long long slots_simulated = 0;  // whole steps only, so this can exceed the horizon
};

struct TraceRecord {
    long long step = 0;
    long long slot = 0;   // slot index at the start of the step
    int delta = 0;
    int pre_id = 0;
    int action = 0;
    int success = -1;     // -1 when the step was a skip
    int delta_next = 0;
};

/**
 * Slot-level Monte Carlo run of the monitoring loop: per step, draw the image
 * label and the noisy pre-identification, ask the policy, accumulate one age
 * value per slot (ages grow freely within a transmission step), and apply the
 * age update. Replications are independent, run concurrently, and merge in
 * replication order, so results are reproducible from the seed alone.
 */
SimResult simulate(const SystemParams& params, const Policy& policy, const SimConfig& cfg);

/// Step-by-step records of a single replication, enough to re-plot the age
/// staircase. Uses cfg.seed directly (same draws as replication 0).
std::vector<TraceRecord> trace(const SystemParams& params, const Policy& policy,
                               const SimConfig& cfg, long long n_steps);

}  // namespace taoi
