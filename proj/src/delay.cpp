#include "dropt/delay.hpp"

#include <istream>
#include <ostream>
#include <sstream>

namespace dropt {

DelayModel DelayModel::constant(int tau) {
    if (tau < 0) throw std::invalid_argument("constant delay must be nonnegative");
    DelayModel m;
    m.tau_max = tau;
    m.distribution = DelayDistribution::constant;
    m.lo = m.hi = tau;
    m.mean_tau = tau;
    return m;
}

DelayModel DelayModel::uniform(int lo, int hi, std::uint64_t seed, bool per_edge) {
    if (lo < 0 || hi < lo)
        throw std::invalid_argument("uniform delay requires 0 <= lo <= hi");
    DelayModel m;
    m.tau_max = hi;
    m.distribution = DelayDistribution::uniform_integer;
    m.lo = lo;
    m.hi = hi;
    m.seed = seed;
    m.per_edge = per_edge;
    m.mean_tau = 0.5 * (lo + hi);
    return m;
}

DelayModel DelayModel::from_schedule(std::shared_ptr<const DelaySchedule> schedule) {
    if (!schedule || schedule->entries.empty())
        throw std::invalid_argument("empty delay schedule");
    DelayModel m;
    m.distribution = DelayDistribution::deterministic_schedule;
    double sum = 0.0;
    int max_tau = 0;
    for (const auto& [key, tau] : schedule->entries) {
        if (tau < 0) throw std::invalid_argument("scheduled delay must be nonnegative");
        sum += tau;
        max_tau = std::max(max_tau, tau);
    }
    m.tau_max = max_tau;
    m.mean_tau = sum / static_cast<double>(schedule->entries.size());
    m.schedule = std::move(schedule);
    return m;
}

int sample_delay(const DelayModel& m, int from, int to, long tick) {
    switch (m.distribution) {
    case DelayDistribution::constant:
        return m.lo;
    case DelayDistribution::uniform_integer: {
        const std::uint64_t ta = m.per_edge ? static_cast<std::uint64_t>(from) + 1 : 0;
        const std::uint64_t tb = m.per_edge ? static_cast<std::uint64_t>(to) + 1 : 0;
        const std::uint64_t h = hash_coords(m.seed, static_cast<std::uint64_t>(tick), ta, tb);
        return hash_uniform_int(h, m.lo, m.hi);
    }
    case DelayDistribution::deterministic_schedule: {
        const auto it = m.schedule->entries.find({tick, from, to});
        if (it == m.schedule->entries.end()) {
            std::ostringstream msg;
            msg << "delay schedule has no entry for tick " << tick
                << " edge " << from << "->" << to;
            throw std::out_of_range(msg.str());
        }
        return it->second;
    }
    }
    throw std::logic_error("unknown delay distribution");
}

void dump_delay_schedule(std::ostream& out, const DelayModel& m,
                         const std::vector<std::pair<int, int>>& edges,
                         long first_tick, long last_tick) {
    out << "tick,from,to,tau\n";
    for (long t = first_tick; t <= last_tick; ++t)
        for (const auto& [from, to] : edges)
            out << t << ',' << from << ',' << to << ',' << sample_delay(m, from, to, t)
                << '\n';
}

std::shared_ptr<const DelaySchedule> load_delay_schedule(std::istream& in) {
    auto schedule = std::make_shared<DelaySchedule>();
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("tick", 0) == 0) continue; // header
        }
        std::istringstream ls(line);
        long tick = 0;
        int from = 0, to = 0, tau = 0;
        char comma = 0;
        if (!(ls >> tick >> comma >> from >> comma >> to >> comma >> tau))
            throw std::invalid_argument("malformed delay schedule line: " + line);
        schedule->entries[{tick, from, to}] = tau;
    }
    return schedule;
}

} // namespace dropt
