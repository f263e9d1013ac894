#include "taoi/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace taoi {

namespace {

// Splits total into two non-negative parts whose rounded sum is total again,
// with the first part as close as possible to `first`. A fixed first part can
// make the target unreachable when every candidate sum is a round-half-even
// tie, so the first part may shift by an ulp as well.
std::array<double, 2> exact_split(double total, double first) {
    if (total <= 0.0) return {0.0, 0.0};
    double a = std::clamp(first, 0.0, total);
    for (int ai = 0; ai < 3; ++ai) {
        double b = total - a;
        if (b < 0.0) b = 0.0;
        for (int bi = 0; bi < 6 && b >= 0.0; ++bi) {
            if (a + b == total) return {a, b};
            b = a + b > total ? std::nextafter(b, -1.0)
                              : std::nextafter(b, std::numeric_limits<double>::infinity());
        }
        a = std::nextafter(a, 0.0);
    }
    return {first, total - first};
}

void push_mass(TransitionRow& row, StateIndex to, double prob) {
    if (prob <= 0.0) return;
    for (auto& e : row) {
        if (e.to == to) {
            e.prob += prob;
            return;
        }
    }
    row.push_back({to, prob});
}

}  // namespace

int state_count(const SystemParams& params) { return 2 * params.delta_max; }

std::vector<State> enumerate_states(const SystemParams& params) {
    params.validate();
    std::vector<State> states;
    states.reserve(state_count(params));
    for (int f = 0; f <= 1; ++f)
        for (int delta = 1; delta <= params.delta_max; ++delta)
            states.push_back(State{delta, f});
    return states;
}

StateIndex state_to_index(const State& s, const SystemParams& params) {
    if (s.delta < 1 || s.delta > params.delta_max || (s.pre_id != 0 && s.pre_id != 1))
        throw std::out_of_range("state outside the enumerated space");
    return static_cast<StateIndex>(s.pre_id * params.delta_max + (s.delta - 1));
}

State index_to_state(StateIndex idx, const SystemParams& params) {
    if (idx < 0 || idx >= state_count(params))
        throw std::out_of_range("state index outside the enumerated space");
    return State{idx % params.delta_max + 1, idx / params.delta_max};
}

EmbeddedSmdp build_transitions(const SystemParams& params) {
    EmbeddedSmdp smdp;
    smdp.params = params;
    smdp.probs = derive_probs_total(params);
    smdp.states = enumerate_states(params);
    smdp.sojourns = {sojourn(Action::skip, params), sojourn(Action::transmit, params)};

    const int n = smdp.size();
    smdp.rows.resize(n);
    smdp.rewards.resize(n);
    const double g = smdp.probs.g;
    const StateIndex reset1 = state_to_index(State{params.t_u, 1}, params);
    const StateIndex reset0 = state_to_index(State{params.t_u, 0}, params);

    for (StateIndex i = 0; i < n; ++i) {
        const State s = smdp.states[i];

        // skip: age grows by one, next pre-id drawn fresh
        const int up = std::min(s.delta + 1, params.delta_max);
        TransitionRow& skip_row = smdp.rows[i][action_index(Action::skip)];
        push_mass(skip_row, state_to_index(State{up, 1}, params), g);
        push_mass(skip_row, state_to_index(State{up, 0}, params), 1.0 - g);

        // transmit: reset on success, jump by t_u on failure. The F'=0
        // branches are complements so the reset mass sums back to the
        // success probability exactly.
        const double ps = success_prob(s.pre_id, smdp.probs);
        const double pf = 1.0 - ps;
        const int fail = std::min(s.delta + params.t_u, params.delta_max);
        const auto succ = exact_split(ps, ps * g);
        const auto failm = exact_split(pf, pf * g);
        TransitionRow& tx_row = smdp.rows[i][action_index(Action::transmit)];
        push_mass(tx_row, reset1, succ[0]);
        push_mass(tx_row, reset0, succ[1]);
        push_mass(tx_row, state_to_index(State{fail, 1}, params), failm[0]);
        push_mass(tx_row, state_to_index(State{fail, 0}, params), failm[1]);

        smdp.rewards[i] = {smdp_reward(s, Action::skip, params),
                           smdp_reward(s, Action::transmit, params)};
    }
    return smdp;
}

UniformizedMdp uniformize(const EmbeddedSmdp& smdp, double epsilon, SelfLoopMode mode) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw std::invalid_argument("epsilon must lie in (0, min_a L(a)] = (0, 1]");

    UniformizedMdp mdp;
    mdp.params = smdp.params;
    mdp.epsilon = epsilon;
    mdp.states = smdp.states;
    const int n = smdp.size();
    mdp.rows.resize(n);
    mdp.rewards.resize(n);

    for (StateIndex i = 0; i < n; ++i) {
        for (Action a : kActions) {
            const int ai = action_index(a);
            const double factor = epsilon / smdp.sojourns[ai];
            double native_self = 0.0;
            TransitionRow& out = mdp.rows[i][ai];
            for (const auto& e : smdp.rows[i][ai]) {
                if (e.to == i) {
                    native_self = e.prob;
                    continue;
                }
                out.push_back({e.to, factor * e.prob});
            }
            const double self_mass = mode == SelfLoopMode::fold_native
                                         ? 1.0 - factor * (1.0 - native_self)
                                         : 1.0 - factor;
            push_mass(out, i, self_mass);
            mdp.rewards[i][ai] = uniformized_reward(smdp.states[i], a, smdp.params);
        }
    }
    return mdp;
}

}  // namespace taoi
