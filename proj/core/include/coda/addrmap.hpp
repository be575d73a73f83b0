#pragma once

#include <cstdint>
#include <string>

namespace coda::addrmap {

using PhysAddr = std::uint64_t;

enum class Granularity : std::uint8_t { FGP, CGP };

const char* to_string(Granularity g);

// Geometry of the stacked-memory address map. Two stack-selection bit fields
// coexist: the fine-grain field sits at log2(fg_interleave) and stripes a page
// across all stacks, the coarse-grain field sits at log2(page_size) and pins a
// whole page to one stack.
struct MappingConfig {
    std::uint32_t num_stacks = 4;
    std::uint64_t page_size = 4096;
    std::uint64_t fg_interleave = 128;
    std::uint64_t access_granularity = 128;
    std::uint64_t total_bytes = 32ull << 30; // flat physical space, whole page-groups

    std::uint32_t stack_bits() const;
    std::uint32_t fg_shift() const;   // low bit of the FGP selector field
    std::uint32_t cg_shift() const;   // low bit of the CGP selector field
    std::uint64_t group_bytes() const { return num_stacks * page_size; }
    std::uint64_t stack_bytes() const { return total_bytes / num_stacks; }
    std::uint64_t total_pages() const { return total_bytes / page_size; }

    // Throws ConfigError naming the offending field.
    void validate() const;
};

struct StackLocation {
    std::uint32_t stack_id = 0;
    std::uint64_t local_offset = 0;

    bool operator==(const StackLocation&) const = default;
};

// Routes a physical address to (stack, dense per-stack offset). The selector
// field is deleted from the address and the remaining bits compacted, so each
// stack sees a dense [0, stack_bytes) offset space. The address value itself
// is never changed, only its routing.
StackLocation decode(PhysAddr pa, Granularity g, const MappingConfig& cfg);

// Exact inverse of decode for the same granularity.
PhysAddr encode(const StackLocation& loc, Granularity g, const MappingConfig& cfg);

// True iff the page-group starting at group_base_pa occupies exactly the same
// set of physical blocks under all-FGP and all-CGP decoding (differently
// arranged). Base must be aligned to num_stacks * page_size.
bool coverage_equivalence(PhysAddr group_base_pa, const MappingConfig& cfg);

} // namespace coda::addrmap
