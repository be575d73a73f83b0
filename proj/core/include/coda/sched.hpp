#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "coda/system.hpp"

namespace coda::sched {

enum class SchedulerPolicy : std::uint8_t {
    Affinity,
    BaselineAnyAvailable,
    WorkStealing, // reserved, not implemented
};

const char* to_string(SchedulerPolicy p);

struct ScheduleEvent {
    std::uint32_t block = 0;
    std::uint32_t stack = 0;
    std::uint32_t sm = 0; // SM index within the stack
    double start = 0;
    double end = 0;
};

// Stack a block gravitates to: floor(block_id / N_blocks_per_stack) mod N_stacks.
std::uint32_t affinity(std::uint64_t block_id, const SystemShape& shape);

// Model time a block takes when it runs on a given stack.
using DurationFn = std::function<double(std::uint32_t block, std::uint32_t stack)>;

// List-scheduling engine. Each SM executes one block at a time; under
// Affinity an SM only receives blocks whose affinity matches its stack and
// idles when that queue drains (no work stealing). The baseline hands the
// lowest-id unscheduled block to the earliest-free SM. Ties break on lowest
// SM index, then lowest block id. With pin_stack set, all blocks run on that
// stack regardless of policy.
std::vector<ScheduleEvent> dispatch(SchedulerPolicy policy, std::uint32_t total_blocks,
                                    const DurationFn& duration, const SystemShape& shape,
                                    std::optional<std::uint32_t> pin_stack = std::nullopt);

double makespan(std::span<const ScheduleEvent> events);

void write_schedule_csv(std::ostream& os, std::span<const ScheduleEvent> events);

} // namespace coda::sched
