#include <doctest.h>

#include "taoi/policies.hpp"
#include "taoi/serde.hpp"

using namespace taoi;

TEST_SUITE_BEGIN("policies");

TEST_CASE("baseline decisions") {
    const Policy always = Policy::always_transmit();
    CHECK(always.decide(State{7, 0}) == Action::transmit);
    CHECK(always.decide(State{1, 1}) == Action::transmit);

    const Policy preid = Policy::pre_id_based();
    CHECK(preid.decide(State{7, 0}) == Action::skip);
    CHECK(preid.decide(State{7, 1}) == Action::transmit);
}

TEST_CASE("threshold decisions") {
    const Policy pol = Policy::threshold(Thresholds{std::nullopt, 5});
    CHECK(pol.decide(State{5, 1}) == Action::transmit);
    CHECK(pol.decide(State{4, 1}) == Action::skip);
    CHECK(pol.decide(State{400, 0}) == Action::skip);  // "never" group
    CHECK_THROWS_AS(Policy::threshold(Thresholds{0, 1}), std::invalid_argument);
}

TEST_CASE("tabular lookup and bounds") {
    const std::vector<Action> table{Action::skip, Action::transmit, Action::transmit,
                                    Action::skip, Action::skip, Action::transmit};
    const Policy pol = Policy::tabular(table, 3);
    CHECK(pol.decide(State{2, 0}) == Action::transmit);
    CHECK(pol.decide(State{2, 1}) == Action::skip);
    CHECK_THROWS_AS(pol.decide(State{4, 0}), std::out_of_range);
    CHECK_THROWS_AS(Policy::tabular(table, 4), std::invalid_argument);
}

TEST_CASE("threshold policy from a solved table reproduces it exactly") {
    const SystemParams p{0.9, 0.1, 0.1, 4, 80};
    const UniformizedMdp mdp = uniformize(build_transitions(p), 0.9);
    const Solution sol = rvi_threshold(mdp, SolverConfig{});
    REQUIRE(sol.converged);
    REQUIRE(sol.threshold_structured);

    const std::vector<Action> rebuilt = tabulate(Policy::threshold(sol.thresholds), p);
    REQUIRE(rebuilt.size() == sol.policy.size());
    for (std::size_t s = 0; s < rebuilt.size(); ++s) CHECK(rebuilt[s] == sol.policy[s]);
}

TEST_CASE("policy JSON round-trip") {
    const std::vector<Action> table{Action::skip, Action::transmit, Action::skip,
                                    Action::transmit};
    const nlohmann::json j = policy_to_json(table);
    CHECK(policy_from_json(j) == table);

    // the solver export wraps the array in an object
    const nlohmann::json wrapped{{"policy", j}};
    CHECK(policy_from_json(wrapped) == table);

    CHECK_THROWS_AS(policy_from_json(nlohmann::json::array({0, 2})), std::invalid_argument);
}

TEST_SUITE_END();
