#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "taoi/model.hpp"

namespace taoi {

using StateIndex = std::int32_t;

struct TransitionEntry {
    StateIndex to;
    double prob;
};

/// Sparse transition row: destinations are unique and probabilities sum to
/// one. Rows of this chain never have more than five entries.
using TransitionRow = std::vector<TransitionEntry>;

/// Number of states: two pre-id groups of delta_max ages each.
int state_count(const SystemParams& params);

/// All states, ascending age within the F=0 group followed by the F=1 group.
/// The ascending-age order inside each group is what the threshold sweep of
/// the solver relies on.
std::vector<State> enumerate_states(const SystemParams& params);

/// Bijection with enumerate_states: idx = pre_id * delta_max + (delta - 1).
StateIndex state_to_index(const State& s, const SystemParams& params);
State index_to_state(StateIndex idx, const SystemParams& params);

/** The decision-epoch chain of the monitoring problem, with per-step
 *  accumulated-age rewards and action-dependent sojourn times. */
struct EmbeddedSmdp {
    SystemParams params;
    DerivedProbs probs;
    std::vector<State> states;
    std::vector<std::array<TransitionRow, 2>> rows;  // [state][action]
    std::vector<std::array<double, 2>> rewards;      // accumulated age per step
    std::array<int, 2> sojourns{1, 1};               // slots per step, by action

    int size() const { return static_cast<int>(states.size()); }
};

/// How uniformization treats transition mass that natively stays in place
/// (possible at age-capped states): fold it into the self-loop so rows stay
/// stochastic, or apply the two-case formula literally. fold_native is the
/// default; literal exists for side-by-side comparison and loses the native
/// self-mass at capped states.
enum class SelfLoopMode { fold_native, literal };

/** Discrete-time equivalent of the embedded chain: off-diagonal mass scaled
 *  by epsilon / L(a), the remainder on the self-loop, rewards per slot. */
struct UniformizedMdp {
    SystemParams params;
    double epsilon = 1.0;
    std::vector<State> states;
    std::vector<std::array<TransitionRow, 2>> rows;
    std::vector<std::array<double, 2>> rewards;      // per-step age equivalents

    int size() const { return static_cast<int>(states.size()); }
};

/**
 * Materializes the transition kernel. For a transmit the age resets to t_u
 * with the success probability of the current pre-id value and jumps by t_u
 * (saturating at delta_max) otherwise; a skip grows the age by one. The next
 * pre-id bit is drawn fresh with probability g either way. Coinciding
 * destinations (possible only when delta_max == t_u) are merged by addition.
 */
EmbeddedSmdp build_transitions(const SystemParams& params);

/// Uniformizes the embedded chain. epsilon must lie in (0, min_a L(a)] = (0, 1].
UniformizedMdp uniformize(const EmbeddedSmdp& smdp, double epsilon,
                          SelfLoopMode mode = SelfLoopMode::fold_native);

}  // namespace taoi
