#include "taoi/model.hpp"

#include <algorithm>
#include <cmath>

namespace taoi {

namespace {

bool in_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

// Denominators of the two posteriors: Pr(F = 1) and Pr(F = 0).
double pos_denominator(const SystemParams& p) {
    return (1.0 - p.q) * p.p_a + p.q * (1.0 - p.p_b);
}

double neg_denominator(const SystemParams& p) {
    return (1.0 - p.q) * (1.0 - p.p_a) + p.q * p.p_b;
}

}  // namespace

void SystemParams::validate() const {
    if (!in_unit_interval(q)) throw std::invalid_argument("q must lie in [0, 1]");
    if (!in_unit_interval(p_a)) throw std::invalid_argument("p_a must lie in [0, 1]");
    if (!in_unit_interval(p_b)) throw std::invalid_argument("p_b must lie in [0, 1]");
    if (t_u < 1) throw std::invalid_argument("t_u must be a positive number of slots");
    if (delta_max < t_u)
        throw std::invalid_argument("delta_max must be at least t_u (the reset age must be a valid state)");
}

DerivedProbs derive_probs(const SystemParams& params) {
    params.validate();
    const double dpos = pos_denominator(params);
    const double dneg = neg_denominator(params);
    if (dpos <= 0.0)
        throw std::domain_error("posterior for a positive pre-identification is undefined: Pr(F=1) = 0");
    if (dneg <= 0.0)
        throw std::domain_error("posterior for a negative pre-identification is undefined: Pr(F=0) = 0");
    DerivedProbs dp;
    dp.g = params.p_a * (1.0 - params.q) + (1.0 - params.p_b) * params.q;
    dp.p_hat_a = (1.0 - params.q) * params.p_a / dpos;
    dp.p_hat_b = params.q * params.p_b / dneg;
    return dp;
}

DerivedProbs derive_probs_total(const SystemParams& params) {
    params.validate();
    const double dpos = pos_denominator(params);
    const double dneg = neg_denominator(params);
    DerivedProbs dp;
    dp.g = params.p_a * (1.0 - params.q) + (1.0 - params.p_b) * params.q;
    // An impossible pre-id value never occurs; pinning its posterior to
    // never-succeed keeps downstream transition rows stochastic.
    dp.p_hat_a = dpos > 0.0 ? (1.0 - params.q) * params.p_a / dpos : 1.0;
    dp.p_hat_b = dneg > 0.0 ? params.q * params.p_b / dneg : 0.0;
    return dp;
}

int sojourn(Action a, const SystemParams& params) noexcept {
    return a == Action::transmit ? params.t_u : 1;
}

double success_prob(int pre_id, const DerivedProbs& dp) noexcept {
    return pre_id == 1 ? 1.0 - dp.p_hat_a : dp.p_hat_b;
}

int taoi_step(int delta, Action a, int d, const SystemParams& params) noexcept {
    if (a == Action::transmit) {
        if (d == 1) return params.t_u;
        return std::min(delta + params.t_u, params.delta_max);
    }
    return std::min(delta + 1, params.delta_max);
}

double smdp_reward(const State& s, Action a, const SystemParams& params) noexcept {
    const double len = sojourn(a, params);
    return len * (s.delta + 0.5 * (len - 1.0));
}

double uniformized_reward(const State& s, Action a, const SystemParams& params) noexcept {
    return s.delta + 0.5 * (sojourn(a, params) - 1.0);
}

}  // namespace taoi
