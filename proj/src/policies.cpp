#include "taoi/policies.hpp"

#include <stdexcept>

namespace taoi {

Policy Policy::always_transmit() { return Policy{Always{}}; }

Policy Policy::pre_id_based() { return Policy{PreId{}}; }

Policy Policy::threshold(Thresholds omega) {
    for (const auto& w : omega)
        if (w && *w < 1) throw std::invalid_argument("thresholds must be at least one slot");
    return Policy{Thresh{omega}};
}

Policy Policy::tabular(std::vector<Action> table, int delta_max) {
    if (delta_max < 1 || static_cast<int>(table.size()) != 2 * delta_max)
        throw std::invalid_argument("action table must cover both pre-id groups");
    return Policy{Table{std::move(table), delta_max}};
}

Action Policy::decide(const State& s) const {
    return std::visit(
        [&s](const auto& impl) -> Action {
            using T = std::decay_t<decltype(impl)>;
            if constexpr (std::is_same_v<T, Always>) {
                return Action::transmit;
            } else if constexpr (std::is_same_v<T, PreId>) {
                return s.pre_id == 1 ? Action::transmit : Action::skip;
            } else if constexpr (std::is_same_v<T, Thresh>) {
                const auto& omega = impl.omega[s.pre_id == 1 ? 1 : 0];
                return omega && s.delta >= *omega ? Action::transmit : Action::skip;
            } else {
                if (s.delta < 1 || s.delta > impl.delta_max || (s.pre_id != 0 && s.pre_id != 1))
                    throw std::out_of_range("state outside the policy table");
                return impl.actions[s.pre_id * impl.delta_max + (s.delta - 1)];
            }
        },
        impl_);
}

std::string_view Policy::name() const {
    switch (impl_.index()) {
        case 0: return "always_transmit";
        case 1: return "pre_id_based";
        case 2: return "threshold";
        default: return "tabular";
    }
}

std::vector<Action> tabulate(const Policy& policy, const SystemParams& params) {
    std::vector<Action> table;
    table.reserve(state_count(params));
    for (const State& s : enumerate_states(params)) table.push_back(policy.decide(s));
    return table;
}

}  // namespace taoi
