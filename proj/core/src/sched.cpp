#include "coda/sched.hpp"

#include <algorithm>
#include <ostream>
#include <queue>

#include "coda/errors.hpp"

namespace coda::sched {

const char* to_string(SchedulerPolicy p) {
    switch (p) {
        case SchedulerPolicy::Affinity: return "affinity";
        case SchedulerPolicy::BaselineAnyAvailable: return "baseline";
        case SchedulerPolicy::WorkStealing: return "work-stealing";
    }
    return "?";
}

std::uint32_t affinity(std::uint64_t block_id, const SystemShape& shape) {
    return static_cast<std::uint32_t>((block_id / shape.blocks_per_stack()) % shape.num_stacks);
}

namespace {

// (free_time, stack, sm) min-heap entry; ties resolve to the lowest SM.
struct SmSlot {
    double free_at;
    std::uint32_t stack;
    std::uint32_t sm;

    bool operator>(const SmSlot& o) const {
        if (free_at != o.free_at) return free_at > o.free_at;
        if (stack != o.stack) return stack > o.stack;
        return sm > o.sm;
    }
};

using SmHeap = std::priority_queue<SmSlot, std::vector<SmSlot>, std::greater<SmSlot>>;

void run_queue_on_stack(std::uint32_t stack, const std::vector<std::uint32_t>& queue,
                        const DurationFn& duration, const SystemShape& shape,
                        std::vector<ScheduleEvent>& out) {
    SmHeap heap;
    for (std::uint32_t sm = 0; sm < shape.sms_per_stack; ++sm) heap.push({0.0, stack, sm});
    for (std::uint32_t block : queue) {
        SmSlot slot = heap.top();
        heap.pop();
        const double d = duration(block, stack);
        if (d < 0) throw ConfigError("negative block duration");
        out.push_back({block, stack, slot.sm, slot.free_at, slot.free_at + d});
        slot.free_at += d;
        heap.push(slot);
    }
}

} // namespace

std::vector<ScheduleEvent> dispatch(SchedulerPolicy policy, std::uint32_t total_blocks,
                                    const DurationFn& duration, const SystemShape& shape,
                                    std::optional<std::uint32_t> pin_stack) {
    shape.validate();
    if (total_blocks < 1) throw ConfigError("dispatch requires at least one block");
    if (policy == SchedulerPolicy::WorkStealing)
        throw ConfigError("work-stealing scheduling is not implemented");
    if (pin_stack && *pin_stack >= shape.num_stacks)
        throw ConfigError("pin stack " + std::to_string(*pin_stack) + " out of range");

    std::vector<ScheduleEvent> events;
    events.reserve(total_blocks);

    if (pin_stack) {
        std::vector<std::uint32_t> queue(total_blocks);
        for (std::uint32_t b = 0; b < total_blocks; ++b) queue[b] = b;
        run_queue_on_stack(*pin_stack, queue, duration, shape, events);
    } else if (policy == SchedulerPolicy::Affinity) {
        std::vector<std::vector<std::uint32_t>> queues(shape.num_stacks);
        for (std::uint32_t b = 0; b < total_blocks; ++b)
            queues[affinity(b, shape)].push_back(b);
        for (std::uint32_t s = 0; s < shape.num_stacks; ++s)
            run_queue_on_stack(s, queues[s], duration, shape, events);
    } else {
        SmHeap heap;
        for (std::uint32_t s = 0; s < shape.num_stacks; ++s)
            for (std::uint32_t sm = 0; sm < shape.sms_per_stack; ++sm) heap.push({0.0, s, sm});
        for (std::uint32_t b = 0; b < total_blocks; ++b) {
            SmSlot slot = heap.top();
            heap.pop();
            const double d = duration(b, slot.stack);
            if (d < 0) throw ConfigError("negative block duration");
            events.push_back({b, slot.stack, slot.sm, slot.free_at, slot.free_at + d});
            slot.free_at += d;
            heap.push(slot);
        }
    }

    std::sort(events.begin(), events.end(), [](const ScheduleEvent& a, const ScheduleEvent& b) {
        if (a.start != b.start) return a.start < b.start;
        if (a.stack != b.stack) return a.stack < b.stack;
        if (a.sm != b.sm) return a.sm < b.sm;
        return a.block < b.block;
    });
    return events;
}

double makespan(std::span<const ScheduleEvent> events) {
    double m = 0;
    for (const auto& e : events) m = std::max(m, e.end);
    return m;
}

void write_schedule_csv(std::ostream& os, std::span<const ScheduleEvent> events) {
    os << "block,stack,sm,start,end\n";
    for (const auto& e : events)
        os << e.block << ',' << e.stack << ',' << e.sm << ',' << e.start << ',' << e.end << '\n';
}

} // namespace coda::sched
