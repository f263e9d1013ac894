#include <doctest.h>

#include <cmath>
#include <random>

#include "taoi/policies.hpp"
#include "taoi/solver.hpp"

using namespace taoi;

namespace {

struct Instance {
    SystemParams params;
    EmbeddedSmdp smdp;
    UniformizedMdp mdp;
};

Instance make_instance(const SystemParams& p, double epsilon = 0.9) {
    Instance inst{p, build_transitions(p), {}};
    inst.mdp = uniformize(inst.smdp, epsilon);
    return inst;
}

}  // namespace

TEST_SUITE_BEGIN("solver");

TEST_CASE("rvi matches the exhaustive oracle on a tiny instance") {
    const Instance inst = make_instance(SystemParams{0.5, 0.2, 0.2, 2, 8});
    const SolverConfig cfg;
    const Solution sol = rvi(inst.mdp, cfg);
    REQUIRE(sol.converged);

    const BruteForceResult oracle = brute_force_optimal(inst.smdp);
    CHECK(oracle.policies_evaluated == 65536);
    CHECK(std::abs(sol.gain - oracle.value) < 1e-6);
    CHECK(evaluate_policy_exact(inst.smdp, sol.policy).avg_taoi ==
          doctest::Approx(oracle.value).epsilon(1e-9));
}

TEST_CASE("unit transmission delay collapses to always-transmit") {
    for (double q : {0.5, 0.9}) {
        const Instance inst = make_instance(SystemParams{q, 0.1, 0.1, 1, 20});
        const Solution sol = rvi(inst.mdp, SolverConfig{});
        REQUIRE(sol.converged);
        for (Action a : sol.policy) CHECK(a == Action::transmit);
        REQUIRE(sol.thresholds[0].has_value());
        REQUIRE(sol.thresholds[1].has_value());
        CHECK(*sol.thresholds[0] == 1);
        CHECK(*sol.thresholds[1] == 1);
    }
    // free successful transmissions with perfect pre-identification
    const Instance free = make_instance(SystemParams{0.5, 0.0, 0.0, 1, 30});
    const Solution sol = rvi(free.mdp, SolverConfig{});
    REQUIRE(sol.converged);
    for (Action a : sol.policy) CHECK(a == Action::transmit);
}

TEST_CASE("Bellman residual is small at convergence") {
    const Instance inst = make_instance(SystemParams{0.9, 0.1, 0.1, 4, 60});
    const SolverConfig cfg;
    const Solution sol = rvi(inst.mdp, cfg);
    REQUIRE(sol.converged);
    for (int s = 0; s < inst.mdp.size(); ++s) {
        const double v = std::min(sol.q_values[s][0], sol.q_values[s][1]);
        CHECK(std::abs(v - sol.gain - sol.h[s]) < 10.0 * cfg.tol);
    }
    CHECK(sol.h[state_to_index(State{inst.params.t_u, 1}, inst.params)] == 0.0);
}

TEST_CASE("plain and threshold-structured solvers agree") {
    const SystemParams grid[] = {
        {0.5, 0.2, 0.2, 2, 40},
        {0.9, 0.1, 0.1, 10, 200},
        {0.7, 0.3, 0.3, 5, 100},
    };
    for (const SystemParams& p : grid) {
        const Instance inst = make_instance(p);
        const Solution plain = rvi(inst.mdp, SolverConfig{});
        const Solution thr = rvi_threshold(inst.mdp, SolverConfig{});
        REQUIRE(plain.converged);
        REQUIRE(thr.converged);
        CHECK(std::abs(plain.gain - thr.gain) < 1e-9);
        REQUIRE(plain.policy.size() == thr.policy.size());
        for (std::size_t s = 0; s < plain.policy.size(); ++s)
            CHECK(plain.policy[s] == thr.policy[s]);

        // the sweep shortcut saves two-action evaluations once a threshold
        // below the cap exists
        CHECK(plain.minimizations == plain.iters * inst.mdp.size());
        if (thr.thresholds[0] && thr.thresholds[1] &&
            (*thr.thresholds[0] < p.delta_max || *thr.thresholds[1] < p.delta_max))
            CHECK(thr.minimizations < thr.iters * inst.mdp.size());
    }
}

TEST_CASE("threshold sweep saves minimizations on a large instance") {
    const Instance inst = make_instance(SystemParams{0.9, 0.1, 0.1, 10, 2000});
    const Solution plain = rvi(inst.mdp, SolverConfig{});
    const Solution thr = rvi_threshold(inst.mdp, SolverConfig{});
    REQUIRE(plain.converged);
    REQUIRE(thr.converged);
    CHECK(plain.minimizations == plain.iters * inst.mdp.size());
    CHECK(thr.minimizations < thr.iters * inst.mdp.size());
    CHECK(std::abs(plain.gain - thr.gain) < 1e-9);
    CHECK(plain.policy == thr.policy);
}

TEST_CASE("threshold extraction") {
    const SystemParams p{0.5, 0.1, 0.1, 1, 5};
    const auto tx = Action::transmit;
    const auto sk = Action::skip;

    const Thresholds all = extract_thresholds(std::vector<Action>(10, tx), p);
    CHECK(*all[0] == 1);
    CHECK(*all[1] == 1);

    std::vector<Action> stepped{sk, sk, tx, tx, tx, sk, sk, sk, sk, tx};
    const Thresholds mixed = extract_thresholds(stepped, p);
    CHECK(*mixed[0] == 3);
    CHECK(*mixed[1] == 5);

    const Thresholds never = extract_thresholds(std::vector<Action>(10, sk), p);
    CHECK(!never[0].has_value());
    CHECK(!never[1].has_value());

    std::vector<Action> broken{sk, tx, sk, sk, sk, sk, sk, sk, sk, sk};
    CHECK_THROWS_AS(extract_thresholds(broken, p), NonThresholdPolicyError);
    try {
        extract_thresholds(broken, p);
    } catch (const NonThresholdPolicyError& e) {
        CHECK(e.delta == 3);
        CHECK(e.pre_id == 0);
    }
}

TEST_CASE("exact evaluation: closed forms") {
    // every transmission succeeds: the age cycles through t_u .. 2 t_u - 1
    const SystemParams ideal{1.0, 0.0, 0.0, 3, 30};
    const EmbeddedSmdp smdp = build_transitions(ideal);
    const std::vector<Action> always(smdp.size(), Action::transmit);
    const PolicyValue pv = evaluate_policy_exact(smdp, always);
    CHECK(pv.avg_taoi == doctest::Approx(4.0).epsilon(1e-12));

    double total = 0.0;
    for (double m : pv.stationary) total += m;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

    // never transmitting pins the chain at the cap
    const SystemParams p{0.6, 0.2, 0.1, 4, 25};
    const EmbeddedSmdp chain = build_transitions(p);
    const std::vector<Action> never(chain.size(), Action::skip);
    CHECK(evaluate_policy_exact(chain, never).avg_taoi ==
          doctest::Approx(25.0).epsilon(1e-10));
}

TEST_CASE("exact values stay in range for arbitrary policies") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> unit(0.1, 0.9);
    for (int trial = 0; trial < 25; ++trial) {
        const SystemParams p{unit(rng), unit(rng), unit(rng),
                             1 + static_cast<int>(rng() % 5),
                             8 + static_cast<int>(rng() % 20)};
        const EmbeddedSmdp smdp = build_transitions(p);
        std::vector<Action> policy(smdp.size());
        for (auto& a : policy) a = rng() % 2 == 0 ? Action::skip : Action::transmit;
        const PolicyValue pv = evaluate_policy_exact(smdp, policy);
        CHECK(pv.avg_taoi >= 1.0 - 1e-9);
        CHECK(pv.avg_taoi <= p.delta_max + 0.5 * (p.t_u - 1) + 1e-9);
        double total = 0.0;
        for (double m : pv.stationary) {
            CHECK(m >= 0.0);
            total += m;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("dense and power-iteration stationary solves agree") {
    const SystemParams p{0.8, 0.15, 0.1, 3, 90};
    const EmbeddedSmdp smdp = build_transitions(p);
    std::mt19937 rng(5);
    std::vector<Action> policy(smdp.size());
    for (int s = 0; s < smdp.size(); ++s) {
        const State st = smdp.states[s];
        policy[s] = st.delta >= (st.pre_id == 1 ? 5 : 12) ? Action::transmit : Action::skip;
    }
    std::vector<TransitionRow> rows(smdp.size());
    for (int s = 0; s < smdp.size(); ++s) rows[s] = smdp.rows[s][action_index(policy[s])];

    const auto dense = stationary_distribution(rows, StationaryMethod::dense);
    const auto power = stationary_distribution(rows, StationaryMethod::power);
    for (std::size_t s = 0; s < rows.size(); ++s)
        CHECK(dense[s] == doctest::Approx(power[s]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("gain respects its bounds and baselines") {
    const SystemParams p{0.9, 0.1, 0.1, 10, 200};
    const Instance inst = make_instance(p);
    const Solution sol = rvi_threshold(inst.mdp, SolverConfig{});
    REQUIRE(sol.converged);
    CHECK(sol.gain >= 1.0);
    CHECK(sol.gain <= p.delta_max);
    for (const Policy& baseline : {Policy::always_transmit(), Policy::pre_id_based()})
        CHECK(sol.gain <=
              evaluate_policy_exact(inst.smdp, tabulate(baseline, p)).avg_taoi + 1e-9);
}

TEST_CASE("enumeration guard refuses large instances") {
    const EmbeddedSmdp big = build_transitions(SystemParams{0.5, 0.2, 0.2, 2, 64});
    CHECK_THROWS_AS(brute_force_optimal(big), std::invalid_argument);
}

TEST_CASE("exhaustive optimum is reproduced and threshold-typed") {
    const Instance inst = make_instance(SystemParams{0.9, 0.1, 0.1, 2, 8});
    const BruteForceResult oracle = brute_force_optimal(inst.smdp);
    const Solution sol = rvi_threshold(inst.mdp, SolverConfig{});
    REQUIRE(sol.converged);
    CHECK(std::abs(sol.gain - oracle.value) < 1e-6);
    CHECK_NOTHROW(extract_thresholds(oracle.policy, inst.params));
}

TEST_CASE("structure report on a solved instance") {
    const SystemParams p{0.9, 0.1, 0.1, 10, 500};
    const Instance inst = make_instance(p);
    const SolverConfig cfg;
    const Solution sol = rvi_threshold(inst.mdp, cfg);
    REQUIRE(sol.converged);
    const LemmaReport rep = verify_structure(sol, inst.mdp, cfg);

    CHECK(rep.theorem1_threshold_pass);
    CHECK(rep.lemma1.pass);
    CHECK(rep.lemma1.margin >= -1e-9);
    CHECK(std::isfinite(rep.lemma2.margin));
    CHECK(std::isfinite(rep.appendix_inequality.margin));
    for (int a = 0; a < 2; ++a)
        for (int f = 0; f < 2; ++f) CHECK(std::isfinite(rep.lemma3_margin[a][f]));

    // relative values flatten at the cap, so the lemma-3 slope bound of at
    // least 1/epsilon cannot hold there; it is reported, not asserted
    CHECK(rep.lemma3.margin < 1.0 / cfg.epsilon);

    Solution unconverged = sol;
    unconverged.converged = false;
    CHECK_THROWS_AS(verify_structure(unconverged, inst.mdp, cfg), std::invalid_argument);
}

TEST_CASE("solver configuration is validated") {
    const Instance inst = make_instance(SystemParams{0.5, 0.2, 0.2, 2, 8});
    SolverConfig bad_tol;
    bad_tol.tol = 0.0;
    CHECK_THROWS_AS(rvi(inst.mdp, bad_tol), std::invalid_argument);
    SolverConfig bad_ref;
    bad_ref.ref_state = 1000;
    CHECK_THROWS_AS(rvi(inst.mdp, bad_ref), std::invalid_argument);

    SolverConfig tight;
    tight.max_iters = 3;
    const Solution sol = rvi(inst.mdp, tight);
    CHECK(!sol.converged);
    CHECK(sol.iters == 3);
    CHECK(sol.residual > 0.0);
}

TEST_SUITE_END();
