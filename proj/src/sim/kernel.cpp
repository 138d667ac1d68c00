#include "xchain/sim/kernel.hpp"

#include <algorithm>
#include <string>

namespace xchain::sim {

const char* to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::Mining: return "mining";
    case EventKind::Delivery: return "delivery";
    case EventKind::Timer: return "timer";
    case EventKind::DetectorSweep: return "detector-sweep";
    case EventKind::Harness: return "harness";
    }
    return "unknown";
}

Kernel::Kernel(std::uint64_t seed) : seed_(seed) {}

EventHandle Kernel::schedule(Time fire_time, EventKind kind, Callback fn)
{
    if (fire_time < now_) {
        throw SchedulingError("cannot schedule event at t=" + std::to_string(fire_time) +
                              " before now=" + std::to_string(now_));
    }
    const std::uint64_t seq = next_seq_++;
    heap_.push_back(Entry{fire_time, seq, kind, std::move(fn)});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
    live_.insert(seq);
    ++scheduled_;
    return EventHandle{seq};
}

bool Kernel::cancel(EventHandle handle)
{
    if (!handle.valid()) return false;
    if (live_.erase(handle.seq) == 0) return false;
    ++cancelled_;
    return true;
}

std::size_t Kernel::run_until(Time t_end)
{
    if (t_end < now_) {
        throw SchedulingError("run_until target " + std::to_string(t_end) + " is before now=" +
                              std::to_string(now_));
    }
    std::size_t count = 0;
    while (!heap_.empty() && heap_.front().time <= t_end) {
        std::pop_heap(heap_.begin(), heap_.end(), Later{});
        Entry ev = std::move(heap_.back());
        heap_.pop_back();
        if (live_.erase(ev.seq) == 0) continue; // cancelled
        now_ = ev.time;
        ++fired_;
        ++count;
        if (tracing_) trace_.push_back(TraceRecord{ev.time, ev.seq, ev.kind});
        ev.fn();
    }
    now_ = t_end;
    return count;
}

RngStream& Kernel::rng_stream(const std::string& label)
{
    auto it = streams_.find(label);
    if (it == streams_.end()) {
        it = streams_.emplace(label, std::make_unique<RngStream>(seed_, label)).first;
    }
    return *it->second;
}

} // namespace xchain::sim
