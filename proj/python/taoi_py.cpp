#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "taoi/policies.hpp"
#include "taoi/simulator.hpp"
#include "taoi/solver.hpp"

namespace py = pybind11;
using namespace taoi;

namespace {

std::vector<int> policy_as_ints(const std::vector<Action>& policy) {
    std::vector<int> out;
    out.reserve(policy.size());
    for (Action a : policy) out.push_back(action_index(a));
    return out;
}

std::vector<Action> policy_from_ints(const std::vector<int>& table) {
    std::vector<Action> out;
    out.reserve(table.size());
    for (int a : table) {
        if (a != 0 && a != 1) throw std::invalid_argument("policy entries must be 0 or 1");
        out.push_back(a == 1 ? Action::transmit : Action::skip);
    }
    return out;
}

py::object threshold_or_none(const std::optional<int>& omega) {
    if (omega) return py::int_(*omega);
    return py::none();
}

Solution solve_impl(const SystemParams& p, double epsilon, double tol, long max_iters,
                    bool threshold_rvi) {
    SolverConfig cfg;
    cfg.epsilon = epsilon;
    cfg.tol = tol;
    cfg.max_iters = max_iters;
    const UniformizedMdp mdp = uniformize(build_transitions(p), epsilon);
    return threshold_rvi ? rvi_threshold(mdp, cfg) : rvi(mdp, cfg);
}

}  // namespace

PYBIND11_MODULE(taoi_py, m) {
    m.doc() = "Task-oriented age-of-information model, solver and simulator";

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init([](double q, double p_a, double p_b, int t_u, int delta_max) {
                 SystemParams p{q, p_a, p_b, t_u, delta_max};
                 p.validate();
                 return p;
             }),
             py::arg("q"), py::arg("p_a"), py::arg("p_b"), py::arg("t_u"),
             py::arg("delta_max"))
        .def_readonly("q", &SystemParams::q)
        .def_readonly("p_a", &SystemParams::p_a)
        .def_readonly("p_b", &SystemParams::p_b)
        .def_readonly("t_u", &SystemParams::t_u)
        .def_readonly("delta_max", &SystemParams::delta_max)
        .def("__repr__", [](const SystemParams& p) {
            return "SystemParams(q=" + std::to_string(p.q) + ", p_a=" + std::to_string(p.p_a) +
                   ", p_b=" + std::to_string(p.p_b) + ", t_u=" + std::to_string(p.t_u) +
                   ", delta_max=" + std::to_string(p.delta_max) + ")";
        });

    py::class_<DerivedProbs>(m, "DerivedProbs")
        .def_readonly("g", &DerivedProbs::g)
        .def_readonly("p_hat_a", &DerivedProbs::p_hat_a)
        .def_readonly("p_hat_b", &DerivedProbs::p_hat_b);

    py::class_<Policy>(m, "Policy")
        .def_static("always_transmit", &Policy::always_transmit)
        .def_static("pre_id_based", &Policy::pre_id_based)
        .def_static(
            "threshold",
            [](py::object omega0, py::object omega1) {
                Thresholds omega{};
                if (!omega0.is_none()) omega[0] = omega0.cast<int>();
                if (!omega1.is_none()) omega[1] = omega1.cast<int>();
                return Policy::threshold(omega);
            },
            py::arg("omega0") = py::none(), py::arg("omega1") = py::none())
        .def_static(
            "tabular",
            [](const std::vector<int>& table, int delta_max) {
                return Policy::tabular(policy_from_ints(table), delta_max);
            },
            py::arg("table"), py::arg("delta_max"))
        .def(
            "decide",
            [](const Policy& pol, int delta, int pre_id) {
                return action_index(pol.decide(State{delta, pre_id}));
            },
            py::arg("delta"), py::arg("pre_id"))
        .def("__repr__",
             [](const Policy& pol) { return "Policy(" + std::string(pol.name()) + ")"; });

    py::class_<Solution>(m, "Solution")
        .def_readonly("gain", &Solution::gain)
        .def_readonly("h", &Solution::h)
        .def_readonly("iters", &Solution::iters)
        .def_readonly("residual", &Solution::residual)
        .def_readonly("converged", &Solution::converged)
        .def_readonly("threshold_structured", &Solution::threshold_structured)
        .def_property_readonly(
            "policy", [](const Solution& s) { return policy_as_ints(s.policy); })
        .def_property_readonly("thresholds", [](const Solution& s) {
            return py::make_tuple(threshold_or_none(s.thresholds[0]),
                                  threshold_or_none(s.thresholds[1]));
        });

    py::class_<PolicyValue>(m, "PolicyValue")
        .def_readonly("avg_taoi", &PolicyValue::avg_taoi)
        .def_readonly("stationary", &PolicyValue::stationary);

    py::class_<SimResult>(m, "SimResult")
        .def_readonly("avg_taoi", &SimResult::avg_taoi)
        .def_readonly("std_error", &SimResult::std_error)
        .def_readonly("per_replication", &SimResult::per_replication)
        .def_readonly("steps_taken", &SimResult::steps_taken)
        .def_readonly("transmissions", &SimResult::transmissions)
        .def_readonly("successes", &SimResult::successes)
        .def_readonly("slots_simulated", &SimResult::slots_simulated);

    py::class_<TraceRecord>(m, "TraceRecord")
        .def_readonly("step", &TraceRecord::step)
        .def_readonly("slot", &TraceRecord::slot)
        .def_readonly("delta", &TraceRecord::delta)
        .def_readonly("pre_id", &TraceRecord::pre_id)
        .def_readonly("action", &TraceRecord::action)
        .def_readonly("success", &TraceRecord::success)
        .def_readonly("delta_next", &TraceRecord::delta_next);

    m.def("derive_probs", &derive_probs, py::arg("params"));

    m.def("solve", &solve_impl, py::arg("params"), py::arg("epsilon") = 0.9,
          py::arg("tol") = 1e-9, py::arg("max_iters") = 1000000,
          py::arg("threshold_rvi") = true);

    m.def(
        "evaluate_policy_exact",
        [](const SystemParams& p, const Policy& policy) {
            const EmbeddedSmdp smdp = build_transitions(p);
            return evaluate_policy_exact(smdp, tabulate(policy, p));
        },
        py::arg("params"), py::arg("policy"));

    m.def(
        "brute_force_optimal",
        [](const SystemParams& p) {
            const BruteForceResult res = brute_force_optimal(build_transitions(p));
            return py::make_tuple(policy_as_ints(res.policy), res.value);
        },
        py::arg("params"));

    m.def(
        "simulate",
        [](const SystemParams& p, const Policy& policy, long long total_slots,
           long long warmup_slots, std::uint64_t seed, int initial_delta, int replications) {
            SimConfig cfg;
            cfg.total_slots = total_slots;
            cfg.warmup_slots = warmup_slots;
            cfg.seed = seed;
            cfg.initial_delta = initial_delta;
            cfg.replications = replications;
            return simulate(p, policy, cfg);
        },
        py::arg("params"), py::arg("policy"), py::arg("total_slots") = 1000000,
        py::arg("warmup_slots") = -1, py::arg("seed") = 1, py::arg("initial_delta") = 1,
        py::arg("replications") = 1);

    m.def(
        "trace",
        [](const SystemParams& p, const Policy& policy, long long n_steps, std::uint64_t seed,
           int initial_delta) {
            SimConfig cfg;
            cfg.seed = seed;
            cfg.initial_delta = initial_delta;
            return trace(p, policy, cfg, n_steps);
        },
        py::arg("params"), py::arg("policy"), py::arg("n_steps"), py::arg("seed") = 1,
        py::arg("initial_delta") = 1);
}
