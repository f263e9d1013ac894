#include "taoi/simulator.hpp"

#include <cmath>
#include <future>
#include <random>
#include <stdexcept>

namespace taoi {

namespace {

struct RepOutcome {
    double avg = 0.0;
    long long steps = 0;
    long long transmissions = 0;
    long long successes = 0;
    long long slots = 0;
};

struct StepDraw {
    int label;   // Y
    int pre_id;  // F
};

StepDraw draw_step(std::mt19937_64& rng, std::uniform_real_distribution<double>& unit,
                   const SystemParams& p) {
    const int y = unit(rng) < p.q ? 1 : 0;
    const double u = unit(rng);
    const int f = y == 1 ? (u < p.p_b ? 0 : 1) : (u < p.p_a ? 1 : 0);
    return {y, f};
}

RepOutcome run_replication(const SystemParams& p, const Policy& policy, long long total_slots,
                           long long warmup, int initial_delta, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    RepOutcome out;
    int delta = initial_delta;
    long long slots_done = 0;
    long long age_sum = 0;  // integer slot ages sum exactly

    while (slots_done < total_slots) {
        const StepDraw draw = draw_step(rng, unit, p);
        const Action a = policy.decide(State{delta, draw.pre_id});
        const long long len = sojourn(a, p);

        if (slots_done >= warmup) {
            age_sum += len * delta + len * (len - 1) / 2;
        } else if (slots_done + len > warmup) {
            for (long long i = warmup - slots_done; i < len; ++i) age_sum += delta + i;
        }
        slots_done += len;

        int d = 0;
        if (a == Action::transmit) {
            d = draw.label;  // the receiver-side classifier is exact
            ++out.transmissions;
            out.successes += d;
        }
        delta = taoi_step(delta, a, d, p);
        ++out.steps;
    }
    out.slots = slots_done;
    out.avg = static_cast<double>(age_sum) / static_cast<double>(slots_done - warmup);
    return out;
}

long long resolve_warmup(const SystemParams& params, const SimConfig& cfg) {
    const long long warmup =
        cfg.warmup_slots >= 0 ? cfg.warmup_slots : 10LL * params.delta_max;
    if (warmup >= cfg.total_slots)
        throw std::invalid_argument("warmup must leave slots to average over");
    return warmup;
}

void validate_sim_config(const SystemParams& params, const SimConfig& cfg) {
    params.validate();
    if (cfg.total_slots < 1) throw std::invalid_argument("total_slots must be positive");
    if (cfg.replications < 1) throw std::invalid_argument("replications must be at least one");
    if (cfg.initial_delta < 1 || cfg.initial_delta > params.delta_max)
        throw std::invalid_argument("initial_delta outside [1, delta_max]");
}

}  // namespace

SimResult simulate(const SystemParams& params, const Policy& policy, const SimConfig& cfg) {
    validate_sim_config(params, cfg);
    const long long warmup = resolve_warmup(params, cfg);

    std::vector<std::future<RepOutcome>> futures;
    futures.reserve(cfg.replications);
    for (int r = 0; r < cfg.replications; ++r) {
        const std::uint64_t seed = cfg.seed ^ static_cast<std::uint64_t>(r);
        futures.push_back(std::async(std::launch::async, run_replication, params, policy,
                                     cfg.total_slots, warmup, cfg.initial_delta, seed));
    }

    SimResult res;
    res.per_replication.reserve(cfg.replications);
    for (auto& fut : futures) {
        const RepOutcome o = fut.get();
        res.per_replication.push_back(o.avg);
        res.steps_taken += o.steps;
        res.transmissions += o.transmissions;
        res.successes += o.successes;
        res.slots_simulated += o.slots;
    }

    double mean = 0.0;
    for (double x : res.per_replication) mean += x;
    mean /= res.per_replication.size();
    res.avg_taoi = mean;
    if (cfg.replications >= 2) {
        double ss = 0.0;
        for (double x : res.per_replication) ss += (x - mean) * (x - mean);
        res.std_error = std::sqrt(ss / (static_cast<double>(cfg.replications) *
                                        (cfg.replications - 1)));
    }
    return res;
}

std::vector<TraceRecord> trace(const SystemParams& params, const Policy& policy,
                               const SimConfig& cfg, long long n_steps) {
    validate_sim_config(params, cfg);
    if (n_steps < 1) throw std::invalid_argument("n_steps must be at least one");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<TraceRecord> records;
    records.reserve(n_steps);
    int delta = cfg.initial_delta;
    long long slot = 0;
    for (long long step = 0; step < n_steps; ++step) {
        const StepDraw draw = draw_step(rng, unit, params);
        const Action a = policy.decide(State{delta, draw.pre_id});
        TraceRecord rec;
        rec.step = step;
        rec.slot = slot;
        rec.delta = delta;
        rec.pre_id = draw.pre_id;
        rec.action = action_index(a);
        rec.success = a == Action::transmit ? draw.label : -1;
        delta = taoi_step(delta, a, a == Action::transmit ? draw.label : 0, params);
        rec.delta_next = delta;
        records.push_back(rec);
        slot += sojourn(a, params);
    }
    return records;
}

}  // namespace taoi
