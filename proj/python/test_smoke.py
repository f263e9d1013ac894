"""Smoke tests for the taoi_py extension module."""

import taoi_py as taoi


def test_derived_probs():
    p = taoi.SystemParams(q=0.9, p_a=0.1, p_b=0.1, t_u=4, delta_max=80)
    dp = taoi.derive_probs(p)
    assert abs(dp.g - 0.82) < 1e-12
    assert abs(dp.p_hat_a - 0.01 / 0.82) < 1e-12
    assert abs(dp.p_hat_b - 0.5) < 1e-12


def test_solve_and_evaluate():
    p = taoi.SystemParams(q=0.9, p_a=0.1, p_b=0.1, t_u=4, delta_max=80)
    sol = taoi.solve(p)
    assert sol.converged
    assert sol.threshold_structured
    f0, f1 = sol.thresholds
    assert f1 is not None and f1 >= 1

    optimal = taoi.Policy.tabular(sol.policy, p.delta_max)
    ev = taoi.evaluate_policy_exact(p, optimal)
    assert abs(ev.avg_taoi - sol.gain) < 1e-6
    assert 1.0 <= ev.avg_taoi <= p.delta_max

    always = taoi.evaluate_policy_exact(p, taoi.Policy.always_transmit())
    preid = taoi.evaluate_policy_exact(p, taoi.Policy.pre_id_based())
    assert ev.avg_taoi <= always.avg_taoi + 1e-9
    assert ev.avg_taoi <= preid.avg_taoi + 1e-9


def test_simulation_tracks_exact_value():
    p = taoi.SystemParams(q=0.9, p_a=0.1, p_b=0.1, t_u=4, delta_max=80)
    sol = taoi.solve(p)
    optimal = taoi.Policy.tabular(sol.policy, p.delta_max)
    ev = taoi.evaluate_policy_exact(p, optimal)
    sim = taoi.simulate(p, optimal, total_slots=200000, seed=7, replications=4)
    assert abs(sim.avg_taoi - ev.avg_taoi) < max(5 * sim.std_error, 0.05)
    rerun = taoi.simulate(p, optimal, total_slots=200000, seed=7, replications=4)
    assert rerun.avg_taoi == sim.avg_taoi


def test_brute_force_agrees_with_solver():
    tiny = taoi.SystemParams(q=0.5, p_a=0.2, p_b=0.2, t_u=2, delta_max=8)
    policy, value = taoi.brute_force_optimal(tiny)
    assert len(policy) == 16
    sol = taoi.solve(tiny)
    assert abs(sol.gain - value) < 1e-6


def test_trace_dynamics():
    p = taoi.SystemParams(q=0.8, p_a=0.2, p_b=0.1, t_u=3, delta_max=40)
    records = taoi.trace(p, taoi.Policy.pre_id_based(), 200, seed=3)
    assert len(records) == 200
    for r in records:
        if r.action == 1 and r.success == 1:
            assert r.delta_next == p.t_u
        elif r.action == 0:
            assert r.success == -1
            assert r.delta_next == min(r.delta + 1, p.delta_max)


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    main()
