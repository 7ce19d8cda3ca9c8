/**
 * Bounded time-varying communication delays with sampled-state semantics:
 * at tick t a receiver reads the value the sender published tau(t) ticks
 * in the past. Reads before tick 0 return a designated pre-history value.
 *
 * Delay draws are counter-based (pure hash of seed, edge and tick), so a
 * replay with the same seed is bitwise identical and draws are independent
 * of evaluation order.
 */
#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <memory>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "dropt/util.hpp"

namespace dropt {

enum class DelayDistribution { constant, uniform_integer, deterministic_schedule };

// Explicit (tick, from, to) -> tau table, e.g. loaded from a schedule dump.
struct DelaySchedule {
    std::map<std::tuple<long, int, int>, int> entries;
};

struct DelayModel {
    int tau_max = 0;
    DelayDistribution distribution = DelayDistribution::constant;
    int lo = 0, hi = 0;              // uniform_integer support
    std::uint64_t seed = 0;
    bool per_edge = true;            // false: one draw shared by all edges each tick
    double mean_tau = 0.0;           // analytic mean of the distribution
    std::shared_ptr<const DelaySchedule> schedule;

    static DelayModel constant(int tau);
    static DelayModel uniform(int lo, int hi, std::uint64_t seed, bool per_edge = true);
    static DelayModel from_schedule(std::shared_ptr<const DelaySchedule> schedule);
};

/// Delay on edge (from -> to) at the given tick; in [0, tau_max] and
/// deterministic in (seed, edge, tick).
int sample_delay(const DelayModel& m, int from, int to, long tick);

/// Ring buffer over the last tau_max + 1 published values of one signal.
/// Exactly one owner publishes consecutive ticks; everyone else reads.
template <typename T>
class HistoryBuffer {
public:
    HistoryBuffer(int tau_max, T pre_history)
        : capacity_(tau_max + 1), pre_history_(std::move(pre_history)) {}

    void publish(long tick, T value) {
        if (tick != next_tick_)
            throw std::logic_error("history published out of order");
        ring_.push_back(std::move(value));
        if (static_cast<long>(ring_.size()) > capacity_) ring_.pop_front();
        ++next_tick_;
    }

    // Value published at `tick`; pre-history for negative ticks.
    const T& read(long tick) const {
        if (tick < 0) return pre_history_;
        const long newest = next_tick_ - 1;
        if (tick > newest || tick < newest - static_cast<long>(ring_.size()) + 1)
            throw std::logic_error("history read outside retained window");
        return ring_[ring_.size() - 1 - (newest - tick)];
    }

    long published_ticks() const { return next_tick_; }
    const T& pre_history() const { return pre_history_; }

private:
    long capacity_;
    T pre_history_;
    long next_tick_ = 0;
    std::deque<T> ring_;
};

/// Stale read r_j(t - tau). Enforces tau <= tau_max of the buffer window.
template <typename T>
const T& stale_read(const HistoryBuffer<T>& buf, long tick, int tau, int tau_max) {
    if (tau < 0 || tau > tau_max)
        throw std::logic_error("delay exceeds the configured tau_max");
    return buf.read(tick - tau);
}

// --- schedule CSV (tick,from,to,tau) ----------------------------------------

void dump_delay_schedule(std::ostream& out, const DelayModel& m,
                         const std::vector<std::pair<int, int>>& edges,
                         long first_tick, long last_tick);
std::shared_ptr<const DelaySchedule> load_delay_schedule(std::istream& in);

} // namespace dropt
