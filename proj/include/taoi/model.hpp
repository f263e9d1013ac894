#pragma once

#include <array>
#include <stdexcept>

namespace taoi {

/// Transmission decision for one time step: skip costs one slot, transmit
/// occupies t_u slots.
enum class Action : int { skip = 0, transmit = 1 };

constexpr std::array<Action, 2> kActions{Action::skip, Action::transmit};

constexpr int action_index(Action a) noexcept { return static_cast<int>(a); }

/**
 * The five scalars defining a monitoring instance.
 *
 * q          prior probability that a captured image is the target
 * p_a        false-positive rate of the sensor-side pre-identifier
 * p_b        false-negative rate of the sensor-side pre-identifier
 * t_u        transmission delay of one image, in slots
 * delta_max  cap on the task-oriented age, in slots
 */
struct SystemParams {
    double q = 0.5;
    double p_a = 0.1;
    double p_b = 0.1;
    int t_u = 1;
    int delta_max = 100;

    /// Throws std::invalid_argument when a field is out of range. The reset
    /// age t_u must be a valid state, so delta_max >= t_u is required.
    void validate() const;
};

/** Probabilities derived from the confusion model. */
struct DerivedProbs {
    double g;        // Pr(F = 1): pre-identifier reports "target"
    double p_hat_a;  // Pr(Y = 0 | F = 1): a positive pre-identification is wrong
    double p_hat_b;  // Pr(Y = 1 | F = 0): a negative pre-identification is wrong
};

/** Decision-epoch state: current age and the latest pre-identification bit. */
struct State {
    int delta = 1;   // task-oriented age in [1, delta_max]
    int pre_id = 0;  // 0 or 1

    friend bool operator==(const State&, const State&) = default;
};

/**
 * Computes g and the posteriors p_hat_a, p_hat_b.
 *
 * Throws std::domain_error when a posterior denominator is zero (the
 * parameter set makes one pre-identification outcome impossible, so its
 * posterior is undefined).
 */
DerivedProbs derive_probs(const SystemParams& params);

/**
 * Total variant of derive_probs: a pre-id value that occurs with probability
 * zero gets its posterior pinned to never-succeed (p_hat_a = 1 resp.
 * p_hat_b = 0) instead of failing. Those states are unreachable, so the
 * reachable dynamics are unchanged; kernels built from this stay stochastic.
 */
DerivedProbs derive_probs_total(const SystemParams& params);

/// Number of slots a step takes: 1 when skipping, t_u when transmitting.
int sojourn(Action a, const SystemParams& params) noexcept;

/// Probability that a transmission started under pre-identification `pre_id`
/// delivers the target image.
double success_prob(int pre_id, const DerivedProbs& dp) noexcept;

/**
 * Age at the start of the next step: reset to t_u after a delivered target
 * (a = 1, d = 1), grow by t_u after a failed transmission, grow by one after
 * a skip; growth saturates at delta_max.
 */
int taoi_step(int delta, Action a, int d, const SystemParams& params) noexcept;

/// Age accumulated over all slots of one step: sum of delta + i - 1 for
/// i = 1..L(a), i.e. L(a) * (delta + (L(a) - 1) / 2). Uncapped within a step.
double smdp_reward(const State& s, Action a, const SystemParams& params) noexcept;

/// Per-slot equivalent of smdp_reward: delta + (L(a) - 1) / 2.
double uniformized_reward(const State& s, Action a, const SystemParams& params) noexcept;

}  // namespace taoi
