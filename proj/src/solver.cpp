#include "taoi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

namespace taoi {

namespace {

constexpr double kStructureTol = 1e-9;
constexpr int kDenseStationaryLimit = 1024;

// Rows, rewards and offsets flattened per (state, action) for the iteration
// inner loop.
struct FlatMdp {
    int n = 0;
    std::vector<int> offset;
    std::vector<TransitionEntry> entries;
    std::vector<double> reward;
};

FlatMdp flatten(const UniformizedMdp& mdp) {
    FlatMdp f;
    f.n = mdp.size();
    f.offset.reserve(2 * f.n + 1);
    f.offset.push_back(0);
    f.reward.reserve(2 * f.n);
    for (int s = 0; s < f.n; ++s) {
        for (int a = 0; a < 2; ++a) {
            const auto& row = mdp.rows[s][a];
            f.entries.insert(f.entries.end(), row.begin(), row.end());
            f.offset.push_back(static_cast<int>(f.entries.size()));
            f.reward.push_back(mdp.rewards[s][a]);
        }
    }
    return f;
}

inline double q_value(const FlatMdp& f, const std::vector<double>& h, int s, int a) {
    const int row = s * 2 + a;
    double acc = f.reward[row];
    for (int k = f.offset[row]; k < f.offset[row + 1]; ++k)
        acc += f.entries[k].prob * h[f.entries[k].to];
    return acc;
}

void validate_config(const SolverConfig& cfg) {
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be at least one");
}

StateIndex resolve_ref_state(const UniformizedMdp& mdp, const SolverConfig& cfg) {
    if (cfg.ref_state) {
        if (*cfg.ref_state < 0 || *cfg.ref_state >= mdp.size())
            throw std::invalid_argument("reference state outside the state space");
        return *cfg.ref_state;
    }
    return state_to_index(State{mdp.params.t_u, 1}, mdp.params);
}

// Relative-value re-anchoring shared by both solvers; returns the sup-norm
// distance between successive relative values.
double update_relative_values(const std::vector<double>& v, StateIndex ref,
                              std::vector<double>& h) {
    const double v_ref = v[ref];
    double lambda = 0.0;
    for (std::size_t s = 0; s < h.size(); ++s) {
        const double h_new = v[s] - v_ref;
        lambda = std::max(lambda, std::abs(h_new - h[s]));
        h[s] = h_new;
    }
    return lambda;
}

// Converged state-action values, greedy policy and thresholds from the final
// relative values.
void finalize_solution(Solution& sol, const FlatMdp& f, const UniformizedMdp& mdp) {
    sol.q_values.resize(f.n);
    sol.policy.resize(f.n);
    for (int s = 0; s < f.n; ++s) {
        const double q0 = q_value(f, sol.h, s, 0);
        const double q1 = q_value(f, sol.h, s, 1);
        sol.q_values[s] = {q0, q1};
        sol.policy[s] = q1 <= q0 ? Action::transmit : Action::skip;  // ties favor transmit
    }
    try {
        sol.thresholds = extract_thresholds(sol.policy, mdp.params);
        sol.threshold_structured = true;
    } catch (const NonThresholdPolicyError&) {
        sol.thresholds = {std::nullopt, std::nullopt};
        sol.threshold_structured = false;
    }
}

}  // namespace

NonThresholdPolicyError::NonThresholdPolicyError(int delta_, int pre_id_)
    : std::runtime_error("policy is not threshold-type: skip at age " + std::to_string(delta_) +
                         " after a transmit in pre-id group " + std::to_string(pre_id_)),
      delta(delta_),
      pre_id(pre_id_) {}

Solution rvi(const UniformizedMdp& mdp, const SolverConfig& cfg) {
    validate_config(cfg);
    const FlatMdp f = flatten(mdp);
    const StateIndex ref = resolve_ref_state(mdp, cfg);

    std::vector<double> h(f.n, 0.0), v(f.n, 0.0);
    Solution sol;
    double lambda = std::numeric_limits<double>::infinity();
    long iter = 0;
    while (iter < cfg.max_iters) {
        ++iter;
        for (int s = 0; s < f.n; ++s)
            v[s] = std::min(q_value(f, h, s, 0), q_value(f, h, s, 1));
        sol.minimizations += f.n;
        sol.gain = v[ref];
        lambda = update_relative_values(v, ref, h);
        if (lambda < cfg.tol) {
            sol.converged = true;
            break;
        }
    }
    sol.iters = iter;
    sol.residual = lambda;
    sol.h = std::move(h);
    finalize_solution(sol, f, mdp);
    return sol;
}

Solution rvi_threshold(const UniformizedMdp& mdp, const SolverConfig& cfg) {
    validate_config(cfg);
    const FlatMdp f = flatten(mdp);
    const StateIndex ref = resolve_ref_state(mdp, cfg);
    const int cap = mdp.params.delta_max;

    std::vector<double> h(f.n, 0.0), v(f.n, 0.0);
    Solution sol;
    double lambda = std::numeric_limits<double>::infinity();
    long iter = 0;
    while (iter < cfg.max_iters) {
        ++iter;
        for (int fbit = 0; fbit <= 1; ++fbit) {
            int omega = cap + 1;  // no transmit seen in this group yet
            for (int delta = 1; delta <= cap; ++delta) {
                const int s = fbit * cap + (delta - 1);
                if (delta >= omega) {
                    // above the running threshold: transmit without comparing
                    v[s] = q_value(f, h, s, 1);
                    continue;
                }
                const double q0 = q_value(f, h, s, 0);
                const double q1 = q_value(f, h, s, 1);
                ++sol.minimizations;
                if (q1 <= q0) {
                    omega = delta;
                    v[s] = q1;
                } else {
                    v[s] = q0;
                }
            }
        }
        sol.gain = v[ref];
        lambda = update_relative_values(v, ref, h);
        if (lambda < cfg.tol) {
            sol.converged = true;
            break;
        }
    }
    sol.iters = iter;
    sol.residual = lambda;
    sol.h = std::move(h);
    finalize_solution(sol, f, mdp);
    return sol;
}

Thresholds extract_thresholds(const std::vector<Action>& policy, const SystemParams& params) {
    if (static_cast<int>(policy.size()) != state_count(params))
        throw std::invalid_argument("policy table size does not match the state space");
    Thresholds out{};
    for (int fbit = 0; fbit <= 1; ++fbit) {
        std::optional<int> first;
        for (int delta = 1; delta <= params.delta_max; ++delta) {
            const Action a = policy[fbit * params.delta_max + delta - 1];
            if (a == Action::transmit) {
                if (!first) first = delta;
            } else if (first) {
                throw NonThresholdPolicyError(delta, fbit);
            }
        }
        out[fbit] = first;
    }
    return out;
}

namespace {

std::vector<double> stationary_dense(const std::vector<TransitionRow>& rows) {
    const int n = static_cast<int>(rows.size());
    // A x = b with A = P^T - I, the last balance equation replaced by the
    // normalization sum(x) = 1.
    std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0), b(n, 0.0);
    for (int s = 0; s < n; ++s) {
        for (const auto& e : rows[s]) a[static_cast<std::size_t>(e.to) * n + s] += e.prob;
        a[static_cast<std::size_t>(s) * n + s] -= 1.0;
    }
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(n - 1) * n + j] = 1.0;
    b[n - 1] = 1.0;

    // Gaussian elimination with partial pivoting.
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(a[static_cast<std::size_t>(col) * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double cand = std::abs(a[static_cast<std::size_t>(r) * n + col]);
            if (cand > best) {
                best = cand;
                pivot = r;
            }
        }
        if (best < 1e-13) throw std::runtime_error("stationary solve is singular");
        if (pivot != col) {
            for (int j = col; j < n; ++j)
                std::swap(a[static_cast<std::size_t>(pivot) * n + j],
                          a[static_cast<std::size_t>(col) * n + j]);
            std::swap(b[pivot], b[col]);
        }
        const double inv = 1.0 / a[static_cast<std::size_t>(col) * n + col];
        for (int r = col + 1; r < n; ++r) {
            const double factor = a[static_cast<std::size_t>(r) * n + col] * inv;
            if (factor == 0.0) continue;
            for (int j = col; j < n; ++j)
                a[static_cast<std::size_t>(r) * n + j] -= factor * a[static_cast<std::size_t>(col) * n + j];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int j = r + 1; j < n; ++j) acc -= a[static_cast<std::size_t>(r) * n + j] * x[j];
        x[r] = acc / a[static_cast<std::size_t>(r) * n + r];
    }
    for (double& xi : x) {
        if (xi < 0.0) {
            if (xi < -1e-8) throw std::runtime_error("stationary solve is ill-conditioned");
            xi = 0.0;
        }
    }
    return x;
}

std::vector<double> stationary_power(const std::vector<TransitionRow>& rows) {
    const int n = static_cast<int>(rows.size());
    std::vector<double> mu(n, 1.0 / n), next(n, 0.0);
    constexpr double kResidualTol = 1e-13;
    constexpr long kMaxSweeps = 1000000;
    for (long sweep = 0; sweep < kMaxSweeps; ++sweep) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < n; ++s) {
            const double m = mu[s];
            if (m == 0.0) continue;
            for (const auto& e : rows[s]) next[e.to] += m * e.prob;
        }
        double residual = 0.0;
        for (int s = 0; s < n; ++s) residual += std::abs(next[s] - mu[s]);
        // half-identity mix keeps the iteration aperiodic
        for (int s = 0; s < n; ++s) mu[s] = 0.5 * (mu[s] + next[s]);
        if (residual < kResidualTol) {
            double total = 0.0;
            for (double m : mu) total += m;
            for (double& m : mu) m /= total;
            return mu;
        }
    }
    throw std::runtime_error("stationary distribution did not converge");
}

}  // namespace

std::vector<double> stationary_distribution(const std::vector<TransitionRow>& rows,
                                            StationaryMethod method) {
    if (rows.empty()) throw std::invalid_argument("empty transition matrix");
    if (method == StationaryMethod::dense ||
        (method == StationaryMethod::automatic &&
         static_cast<int>(rows.size()) <= kDenseStationaryLimit))
        return stationary_dense(rows);
    return stationary_power(rows);
}

PolicyValue evaluate_policy_exact(const EmbeddedSmdp& smdp, const std::vector<Action>& policy) {
    const int n = smdp.size();
    if (static_cast<int>(policy.size()) != n)
        throw std::invalid_argument("policy table size does not match the state space");
    std::vector<TransitionRow> rows(n);
    for (int s = 0; s < n; ++s) rows[s] = smdp.rows[s][action_index(policy[s])];

    PolicyValue pv;
    pv.stationary = stationary_distribution(rows);
    double reward = 0.0, time = 0.0;
    for (int s = 0; s < n; ++s) {
        const int a = action_index(policy[s]);
        reward += pv.stationary[s] * smdp.rewards[s][a];
        time += pv.stationary[s] * smdp.sojourns[a];
    }
    pv.avg_taoi = reward / time;
    return pv;
}

BruteForceResult brute_force_optimal(const EmbeddedSmdp& smdp) {
    const int n = smdp.size();
    if (n > 20)
        throw std::invalid_argument(
            "state space too large for exhaustive policy enumeration (limit: 20 states)");
    const std::uint64_t count = std::uint64_t{1} << n;
    BruteForceResult best;
    best.value = std::numeric_limits<double>::infinity();
    best.policies_evaluated = static_cast<long>(count);
    std::vector<Action> pol(n);
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        // ascending mask order = lexicographic order over the action table
        for (int s = 0; s < n; ++s)
            pol[s] = ((mask >> (n - 1 - s)) & 1) != 0 ? Action::transmit : Action::skip;
        const double value = evaluate_policy_exact(smdp, pol).avg_taoi;
        if (value < best.value) {
            best.value = value;
            best.policy = pol;
        }
    }
    return best;
}

LemmaReport verify_structure(const Solution& sol, const UniformizedMdp& mdp,
                             const SolverConfig& cfg) {
    if (!sol.converged)
        throw std::invalid_argument("verify_structure requires a converged solution");
    const int cap = mdp.params.delta_max;
    const int n = mdp.size();
    if (static_cast<int>(sol.h.size()) != n || static_cast<int>(sol.q_values.size()) != n)
        throw std::invalid_argument("solution does not match the state space");

    LemmaReport rep;
    const auto idx = [cap](int delta, int fbit) { return fbit * cap + (delta - 1); };

    // Lemma 1: relative values non-decreasing in age within each group.
    double m1 = std::numeric_limits<double>::infinity();
    std::array<double, 2> group_min_slope{m1, m1};
    for (int fbit = 0; fbit <= 1; ++fbit)
        for (int d = 1; d < cap; ++d)
            group_min_slope[fbit] =
                std::min(group_min_slope[fbit], sol.h[idx(d + 1, fbit)] - sol.h[idx(d, fbit)]);
    m1 = std::min(group_min_slope[0], group_min_slope[1]);
    if (!std::isfinite(m1)) m1 = 0.0;  // single-age groups have nothing to compare
    rep.lemma1 = {m1 >= -kStructureTol, m1};

    // Lemma 2: concavity, i.e. non-positive second differences.
    double m2 = std::numeric_limits<double>::infinity();
    for (int fbit = 0; fbit <= 1; ++fbit)
        for (int d = 1; d + 2 <= cap; ++d)
            m2 = std::min(m2, -(sol.h[idx(d + 2, fbit)] - 2.0 * sol.h[idx(d + 1, fbit)] +
                                sol.h[idx(d, fbit)]));
    if (!std::isfinite(m2)) m2 = 0.0;
    rep.lemma2 = {m2 >= -kStructureTol, m2};

    // Lemma 3: per action and group, min slope vs L(a) / (eps (1 - p1)) with
    // p1 the failure probability of a transmission from that group.
    const DerivedProbs dp = derive_probs_total(mdp.params);
    double m3 = std::numeric_limits<double>::infinity();
    for (Action a : kActions) {
        const double len = sojourn(a, mdp.params);
        for (int fbit = 0; fbit <= 1; ++fbit) {
            const double p1 = fbit == 1 ? dp.p_hat_a : 1.0 - dp.p_hat_b;
            double margin = -std::numeric_limits<double>::max();
            if (1.0 - p1 > 0.0) {
                const double bound = len / (cfg.epsilon * (1.0 - p1));
                margin = (cap > 1 ? group_min_slope[fbit] : 0.0) - bound;
            }
            rep.lemma3_margin[action_index(a)][fbit] = margin;
            m3 = std::min(m3, margin);
        }
    }
    rep.lemma3 = {m3 >= -kStructureTol, m3};

    // Theorem 1: the converged greedy policy is threshold-type.
    rep.theorem1_threshold_pass = sol.threshold_structured;

    // Q(s2, a) - Q(s1, a) <= V(s2) - V(s1) for all age pairs within a group
    // is equivalent to Q(., a) - V(.) being non-increasing in age.
    double ma = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 2; ++a) {
        for (int fbit = 0; fbit <= 1; ++fbit) {
            double prefix_min = std::numeric_limits<double>::infinity();
            for (int d = 1; d <= cap; ++d) {
                const int s = idx(d, fbit);
                const double diff =
                    sol.q_values[s][a] - std::min(sol.q_values[s][0], sol.q_values[s][1]);
                if (d > 1) ma = std::min(ma, prefix_min - diff);
                prefix_min = std::min(prefix_min, diff);
            }
        }
    }
    if (!std::isfinite(ma)) ma = 0.0;
    rep.appendix_inequality = {ma >= -kStructureTol, ma};
    return rep;
}

}  // namespace taoi
