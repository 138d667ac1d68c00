#pragma once

#include "xchain/sim/rng.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace xchain::sim {

// Virtual seconds. No wall clock is ever consulted by simulation code.
using Time = double;

enum class EventKind : std::uint8_t {
    Mining,
    Delivery,
    Timer,
    DetectorSweep,
    Harness,
};

const char* to_string(EventKind kind);

struct EventHandle {
    std::uint64_t seq = 0;
    bool valid() const { return seq != 0; }
};

struct TraceRecord {
    Time time;
    std::uint64_t seq;
    EventKind kind;

    bool operator==(const TraceRecord&) const = default;
};

class SchedulingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Single-threaded discrete-event scheduler. Events fire in nondecreasing
// time; equal times fire in ascending insertion sequence.
class Kernel {
public:
    using Callback = std::function<void()>;

    explicit Kernel(std::uint64_t seed = 0);

    Kernel(const Kernel&) = delete;
    Kernel& operator=(const Kernel&) = delete;

    Time now() const { return now_; }
    std::uint64_t seed() const { return seed_; }

    EventHandle schedule(Time fire_time, EventKind kind, Callback fn);
    EventHandle schedule_in(Time delay, EventKind kind, Callback fn)
    {
        return schedule(now_ + delay, kind, std::move(fn));
    }

    // Returns false when the event already fired or was cancelled.
    bool cancel(EventHandle handle);

    // Fires every event with fire_time <= t_end (including events scheduled
    // by handlers during the run), then advances now to t_end.
    std::size_t run_until(Time t_end);

    // Same stream object for the same label within one kernel.
    RngStream& rng_stream(const std::string& label);

    std::uint64_t scheduled_count() const { return scheduled_; }
    std::uint64_t fired_count() const { return fired_; }
    std::uint64_t cancelled_count() const { return cancelled_; }
    std::uint64_t pending_count() const { return live_.size(); }

    void enable_trace(bool on) { tracing_ = on; }
    const std::vector<TraceRecord>& trace() const { return trace_; }

private:
    struct Entry {
        Time time;
        std::uint64_t seq;
        EventKind kind;
        Callback fn;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const
        {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    std::uint64_t seed_;
    Time now_ = 0.0;
    std::uint64_t next_seq_ = 1;
    std::vector<Entry> heap_;
    std::unordered_set<std::uint64_t> live_;
    std::uint64_t scheduled_ = 0;
    std::uint64_t fired_ = 0;
    std::uint64_t cancelled_ = 0;
    bool tracing_ = false;
    std::vector<TraceRecord> trace_;
    std::map<std::string, std::unique_ptr<RngStream>> streams_;
};

} // namespace xchain::sim
