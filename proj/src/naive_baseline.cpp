#include "dropt/naive_baseline.hpp"

#include <stdexcept>

namespace dropt {

NaiveFloodResult naive_flood(const WeightMatrix& w,
                             const std::vector<LocalObjective>& objectives,
                             const AgentVectors& x0, const DelayModel& delays,
                             long max_ticks) {
    const int n_agents = w.size();
    if (n_agents > 64)
        throw std::invalid_argument("naive flood supports up to 64 nodes");
    if (static_cast<int>(x0.size()) != n_agents ||
        static_cast<int>(objectives.size()) != n_agents)
        throw std::invalid_argument("agent count mismatch");

    // Values being flooded and per-node knowledge bitmasks.
    AgentVectors values(n_agents);
    for (int i = 0; i < n_agents; ++i) values[i] = objectives[i].grad(x0[i]);
    const std::uint64_t full =
        n_agents == 64 ? ~0ULL : ((1ULL << n_agents) - 1);

    std::vector<HistoryBuffer<std::uint64_t>> known_hist;
    known_hist.reserve(n_agents);
    std::vector<std::uint64_t> known(n_agents);
    for (int i = 0; i < n_agents; ++i) {
        known[i] = 1ULL << i;
        known_hist.emplace_back(std::max(delays.tau_max, 1), std::uint64_t{0});
        known_hist[i].publish(0, known[i]);
    }

    NaiveFloodResult result;
    result.completion_tick.assign(n_agents, -1);
    result.worst_case_bound =
        static_cast<long>(std::max(delays.tau_max, 1)) * (n_agents - 1);

    const auto record = [&](long tick) {
        NaiveFloodResult::TickRow row;
        row.tick = tick;
        row.known_count.resize(n_agents);
        row.estimate.resize(n_agents);
        for (int i = 0; i < n_agents; ++i) {
            Vector acc = Vector::Zero(values[0].size());
            double mass = 0.0;
            int count = 0;
            for (int j = 0; j < n_agents; ++j)
                if (known[i] & (1ULL << j)) {
                    acc += w.fle[j] * values[j];
                    mass += w.fle[j];
                    ++count;
                }
            row.known_count[i] = count;
            row.estimate[i] = acc / mass;
            if (known[i] == full && result.completion_tick[i] < 0)
                result.completion_tick[i] = tick;
        }
        result.trace.push_back(std::move(row));
    };
    record(0);

    // In-neighbour lists from the weight pattern, self excluded.
    std::vector<std::vector<int>> g_in(n_agents);
    for (int i = 0; i < n_agents; ++i)
        for (int j = 0; j < n_agents; ++j)
            if (i != j && w(i, j) != 0.0) g_in[i].push_back(j);

    for (long t = 1; t <= max_ticks; ++t) {
        std::vector<std::uint64_t> next = known;
        for (int i = 0; i < n_agents; ++i)
            for (int j : g_in[i]) {
                const int lag = std::max(1, sample_delay(delays, j, i, t));
                // Reads before tick 0 return the empty pre-history mask.
                next[i] |= known_hist[j].read(t - lag);
            }
        known = std::move(next);
        for (int i = 0; i < n_agents; ++i) known_hist[i].publish(t, known[i]);
        record(t);
        bool all_done = true;
        for (int i = 0; i < n_agents; ++i) all_done &= known[i] == full;
        if (all_done) break;
    }
    return result;
}

} // namespace dropt
