#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "taoi/kernel.hpp"

namespace taoi {

struct SolverConfig {
    double epsilon = 0.9;      // uniformization constant, in (0, 1]
    double tol = 1e-9;         // sup-norm threshold on successive relative values
    long max_iters = 1000000;
    std::optional<StateIndex> ref_state;  // defaults to the post-success state (t_u, 1)
};

/// Transmission thresholds per pre-identification bit; a disengaged entry
/// means the policy never transmits in that group.
using Thresholds = std::array<std::optional<int>, 2>;

/** Converged output of relative value iteration. */
struct Solution {
    double gain = 0.0;                        // optimal average age per slot
    std::vector<double> h;                    // relative values, h[ref] == 0
    std::vector<std::array<double, 2>> q_values;
    std::vector<Action> policy;               // argmin of q_values, ties favor transmit
    Thresholds thresholds;
    bool threshold_structured = false;
    long iters = 0;
    double residual = 0.0;
    bool converged = false;
    long minimizations = 0;                   // two-action argmin evaluations performed
};

/** Long-run value of a fixed policy on the embedded chain. */
struct PolicyValue {
    double avg_taoi = 0.0;
    std::vector<double> stationary;
};

struct StructureCheck {
    bool pass = false;
    double margin = 0.0;  // >= 0 means the property held with this much room
};

/** Numerical verdicts on the structural properties of a converged solution. */
struct LemmaReport {
    StructureCheck lemma1;    // relative values non-decreasing in age per group
    StructureCheck lemma2;    // relative values concave in age per group
    StructureCheck lemma3;    // age slope bounded below by L(a) / (eps (1 - p1))
    std::array<std::array<double, 2>, 2> lemma3_margin{};  // [action][pre_id]
    bool theorem1_threshold_pass = false;                  // optimal policy is threshold-type
    StructureCheck appendix_inequality;  // Q differences dominated by V differences
};

/// Raised when an action table is not monotone in age within a pre-id group.
class NonThresholdPolicyError : public std::runtime_error {
public:
    NonThresholdPolicyError(int delta, int pre_id);
    int delta;
    int pre_id;
};

/**
 * Relative value iteration on the uniformized chain: Q from the current
 * relative values, V as the action minimum, relative values re-anchored at
 * the reference state. Stops when successive relative values differ by less
 * than cfg.tol in sup norm; a run that exhausts max_iters is returned with
 * converged == false and the last residual.
 */
Solution rvi(const UniformizedMdp& mdp, const SolverConfig& cfg);

/**
 * Same fixed point, exploiting the threshold structure: each iteration sweeps
 * ages in ascending order per pre-id group and, once a group's running
 * threshold is known, assigns transmit without evaluating both actions.
 */
Solution rvi_threshold(const UniformizedMdp& mdp, const SolverConfig& cfg);

/// Smallest age with a transmit action per group, verifying the action table
/// is monotone above it. Throws NonThresholdPolicyError on a violation.
Thresholds extract_thresholds(const std::vector<Action>& policy, const SystemParams& params);

enum class StationaryMethod { automatic, dense, power };

/**
 * Stationary distribution of a unichain transition matrix given as sparse
 * rows. Dense replace-one-row elimination up to 1024 states, lazy-chain power
 * iteration beyond that; throws std::runtime_error when the solve is singular
 * or fails to converge.
 */
std::vector<double> stationary_distribution(const std::vector<TransitionRow>& rows,
                                            StationaryMethod method = StationaryMethod::automatic);

/// Exact long-run average age of a fixed policy: stationary distribution of
/// the embedded chain and the ratio of expected per-step reward to expected
/// sojourn.
PolicyValue evaluate_policy_exact(const EmbeddedSmdp& smdp, const std::vector<Action>& policy);

struct BruteForceResult {
    std::vector<Action> policy;
    double value = 0.0;
    long policies_evaluated = 0;
};

/// Exhaustive minimum over all deterministic stationary policies; ties go to
/// the lexicographically smaller action table. Refuses instances with more
/// than 20 states.
BruteForceResult brute_force_optimal(const EmbeddedSmdp& smdp);

/// Checks monotonicity, concavity, the slope lower bound, threshold shape,
/// and the Q-vs-V difference inequality on a converged solution.
LemmaReport verify_structure(const Solution& sol, const UniformizedMdp& mdp,
                             const SolverConfig& cfg);

}  // namespace taoi
