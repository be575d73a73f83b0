#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coda/addrmap.hpp"

#include <nlohmann/json_fwd.hpp>

namespace coda::mem {

using addrmap::Granularity;
using addrmap::MappingConfig;

struct PageTableEntry {
    std::uint64_t vpn = 0;
    std::uint64_t ppn = 0;
    Granularity granularity = Granularity::FGP;
    bool valid = false;
    std::uint32_t owner = 0;
};

enum class GroupMode : std::uint8_t { Free, FGP, CGP };

const char* to_string(GroupMode m);

// A page-group spans num_stacks contiguous pages and carries one mode; the
// mode can change only while the group is entirely free.
struct PageGroup {
    GroupMode mode = GroupMode::Free;
    std::uint64_t used_mask = 0; // bit i = page (base_ppn + i)
};

struct AllocationRequest {
    std::uint64_t num_pages = 0;
    Granularity mode = Granularity::FGP;
    std::optional<std::uint32_t> target_stack; // CGP only
    bool contiguous_vpn = true;
};

// OS view of physical memory: page tables with per-page granularity bits and
// a first-fit free list over page-groups. Groups already in the requested
// mode are preferred over converting Free groups, minimizing mode churn.
class MemoryManager {
public:
    explicit MemoryManager(const MappingConfig& cfg);

    // Allocates n fine-grain pages, mapping vpns [base_vpn, base_vpn + n).
    std::vector<PageTableEntry> alloc_fgp(std::uint32_t owner, std::uint64_t base_vpn,
                                          std::uint64_t n);

    // Allocates n coarse-grain pages that all decode to `stack`.
    std::vector<PageTableEntry> alloc_cgp(std::uint32_t owner, std::uint64_t base_vpn,
                                          std::uint64_t n, std::uint32_t stack);

    std::vector<PageTableEntry> alloc(std::uint32_t owner, std::uint64_t base_vpn,
                                      const AllocationRequest& req);

    void free_pages(std::span<const PageTableEntry> ptes);

    // va -> (pa, granularity); throws PageFaultError when unmapped.
    std::pair<addrmap::PhysAddr, Granularity> translate(std::uint64_t va,
                                                        std::uint32_t owner) const;

    std::uint64_t total_pages() const { return cfg_.total_pages(); }
    std::uint64_t free_page_count() const { return free_pages_; }
    std::uint64_t group_count() const { return groups_.size(); }
    const PageGroup& group(std::uint64_t idx) const { return groups_[idx]; }
    const MappingConfig& config() const { return cfg_; }

    // In an aligned group, the page at slot s is the one whose CGP decoding
    // lands on stack s.
    static std::uint32_t cgp_slot_for_stack(std::uint32_t stack) { return stack; }

    nlohmann::json dump_json() const;

private:
    std::uint64_t find_fgp_group();
    std::uint64_t find_cgp_group(std::uint32_t stack);
    std::uint64_t count_available(Granularity mode, std::optional<std::uint32_t> stack) const;
    void release_page(std::uint64_t ppn);
    void check_group(std::uint64_t gidx) const;

    MappingConfig cfg_;
    std::vector<PageGroup> groups_;
    std::uint64_t free_pages_ = 0;
    // Incremental availability counters and first-fit scan hints; hints only
    // ever point at or below the lowest candidate group.
    std::uint64_t free_groups_ = 0;
    std::uint64_t fgp_free_pages_ = 0;           // free pages inside FGP-mode groups
    std::vector<std::uint64_t> cgp_free_slots_;  // per stack: CGP groups with that slot free
    std::uint64_t hint_free_ = 0;
    std::uint64_t hint_fgp_ = 0;
    std::vector<std::uint64_t> hint_cgp_;
    // owner -> vpn -> PTE
    std::map<std::uint32_t, std::map<std::uint64_t, PageTableEntry>> tables_;
};

} // namespace coda::mem
