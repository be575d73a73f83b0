#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "coda/kernel.hpp"

namespace coda::kmodel {

struct TraceEntry {
    std::uint32_t block = 0;
    std::uint32_t thread = 0;
    std::uint16_t object = 0; // index into KernelSpec::objects
    std::uint64_t element_index = 0;
    std::uint64_t byte_offset = 0; // element_index * element_size
    bool is_write = false;
};

// Concrete enumeration of every access of every thread in one block. Threads
// run row-major (x fastest), each thread's accesses in declaration order,
// loop iterations in order. Ranged accesses are strided across the block's
// threads. Out-of-bounds indices throw TraceError naming the expression and
// thread.
std::vector<TraceEntry> gen_trace(const KernelSpec& k, std::uint32_t block);

// Per-block, per-object footprint summary used by the profiler-assisted
// placement path.
struct BlockFootprint {
    std::uint64_t accesses = 0;
    std::uint64_t min_byte = 0;
    std::uint64_t max_byte = 0; // inclusive, of the last touched element's first byte

    bool any() const { return accesses != 0; }
};

std::vector<BlockFootprint> object_footprints(const KernelSpec& k, const std::string& object);

void write_trace_csv(std::ostream& os, const KernelSpec& k,
                     const std::vector<TraceEntry>& entries);

} // namespace coda::kmodel
