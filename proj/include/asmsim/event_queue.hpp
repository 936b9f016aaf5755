#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "asmsim/time.hpp"

namespace asmsim {

enum class EventKind : std::uint8_t {
    PacketArrival,
    PacketDeparture,
    FeedbackDelivery,
    TimerExpiry,
    FlowStart,
    FlowStop,
    TraceSample,
};

using EventHandle = std::uint64_t;

struct SimSummary {
    std::uint64_t events_dispatched = 0;
    TimeNs clock_end = 0;
    double wall_ms = 0; // informational only, excluded from equality

    friend bool operator==(const SimSummary& a, const SimSummary& b) {
        return a.events_dispatched == b.events_dispatched && a.clock_end == b.clock_end;
    }
};

// Single-threaded deterministic event loop. Events fire in non-decreasing
// time order; equal times dispatch in insertion order (FIFO among equals).
class Simulator {
  public:
    TimeNs now() const { return now_; }

    EventHandle schedule(TimeNs fire_time, EventKind kind, std::function<void()> fn) {
        if (fire_time < now_)
            throw std::logic_error("schedule: fire_time is in the past");
        const EventHandle h = next_seq_++;
        queue_.push(Entry{fire_time, h, kind, std::move(fn)});
        return h;
    }

    void cancel(EventHandle h) { cancelled_.insert(h); }

    SimSummary run_until(TimeNs t_end) {
        if (t_end < now_)
            throw std::logic_error("run_until: t_end precedes current clock");
        const auto wall0 = std::chrono::steady_clock::now();
        std::uint64_t dispatched = 0;
        while (!queue_.empty() && queue_.top().fire_time <= t_end) {
            Entry e = queue_.top();
            queue_.pop();
            if (auto it = cancelled_.find(e.sequence); it != cancelled_.end()) {
                cancelled_.erase(it);
                continue;
            }
            now_ = e.fire_time;
            e.fn();
            ++dispatched;
        }
        now_ = t_end;
        const auto wall1 = std::chrono::steady_clock::now();
        SimSummary s;
        s.events_dispatched = dispatched;
        s.clock_end = now_;
        s.wall_ms = std::chrono::duration<double, std::milli>(wall1 - wall0).count();
        return s;
    }

    bool empty() const { return queue_.empty(); }

  private:
    struct Entry {
        TimeNs fire_time;
        std::uint64_t sequence;
        EventKind kind;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
            return a.sequence > b.sequence;
        }
    };

    TimeNs now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
    std::unordered_set<EventHandle> cancelled_;
};

} // namespace asmsim
