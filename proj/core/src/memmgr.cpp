#include "coda/memmgr.hpp"

#include <bit>

#include <nlohmann/json.hpp>

#include "coda/errors.hpp"

namespace coda::mem {

const char* to_string(GroupMode m) {
    switch (m) {
        case GroupMode::Free: return "free";
        case GroupMode::FGP: return "fgp";
        case GroupMode::CGP: return "cgp";
    }
    return "?";
}

MemoryManager::MemoryManager(const MappingConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.num_stacks > 64)
        throw ConfigError("memory manager supports at most 64 stacks");
    groups_.resize(cfg_.total_pages() / cfg_.num_stacks);
    free_pages_ = cfg_.total_pages();
    free_groups_ = groups_.size();
    cgp_free_slots_.assign(cfg_.num_stacks, 0);
    hint_cgp_.assign(cfg_.num_stacks, 0);
}

std::uint64_t MemoryManager::count_available(Granularity mode,
                                             std::optional<std::uint32_t> stack) const {
    if (mode == Granularity::FGP) return fgp_free_pages_ + free_groups_ * cfg_.num_stacks;
    return cgp_free_slots_[*stack] + free_groups_;
}

std::uint64_t MemoryManager::find_fgp_group() {
    for (std::uint64_t i = hint_fgp_; i < groups_.size(); ++i) {
        const auto& g = groups_[i];
        if (g.mode == GroupMode::FGP &&
            std::popcount(g.used_mask) < static_cast<int>(cfg_.num_stacks)) {
            hint_fgp_ = i;
            return i;
        }
    }
    hint_fgp_ = groups_.size(); // nothing to revisit until a free lowers it
    for (std::uint64_t i = hint_free_; i < groups_.size(); ++i) {
        if (groups_[i].mode == GroupMode::Free) {
            hint_free_ = i;
            return i;
        }
    }
    throw CapacityError("out of memory: no FGP-capable page-group");
}

std::uint64_t MemoryManager::find_cgp_group(std::uint32_t stack) {
    const std::uint32_t slot = cgp_slot_for_stack(stack);
    for (std::uint64_t i = hint_cgp_[stack]; i < groups_.size(); ++i) {
        const auto& g = groups_[i];
        if (g.mode == GroupMode::CGP && !((g.used_mask >> slot) & 1)) {
            hint_cgp_[stack] = i;
            return i;
        }
    }
    hint_cgp_[stack] = groups_.size();
    for (std::uint64_t i = hint_free_; i < groups_.size(); ++i) {
        if (groups_[i].mode == GroupMode::Free) {
            hint_free_ = i;
            return i;
        }
    }
    throw CapacityError("out of memory: no CGP-capable page-group on stack " +
                        std::to_string(stack));
}

std::vector<PageTableEntry> MemoryManager::alloc_fgp(std::uint32_t owner, std::uint64_t base_vpn,
                                                     std::uint64_t n) {
    if (n == 0) return {};
    if (count_available(Granularity::FGP, std::nullopt) < n)
        throw CapacityError("out of memory: requested " + std::to_string(n) + " FGP pages");

    std::vector<PageTableEntry> ptes;
    ptes.reserve(n);
    auto& table = tables_[owner];
    for (std::uint64_t k = 0; k < n; ++k) {
        const std::uint64_t vpn = base_vpn + k;
        if (table.count(vpn))
            throw InvariantError("vpn " + std::to_string(vpn) + " already mapped");
        const std::uint64_t gidx = find_fgp_group();
        auto& g = groups_[gidx];
        if (g.mode == GroupMode::Free) {
            g.mode = GroupMode::FGP;
            --free_groups_;
            fgp_free_pages_ += cfg_.num_stacks;
            hint_fgp_ = std::min(hint_fgp_, gidx);
        }
        std::uint32_t slot = 0;
        while ((g.used_mask >> slot) & 1) ++slot;
        g.used_mask |= std::uint64_t{1} << slot;
        --free_pages_;
        --fgp_free_pages_;
        check_group(gidx);

        PageTableEntry pte{vpn, gidx * cfg_.num_stacks + slot, Granularity::FGP, true, owner};
        table[vpn] = pte;
        ptes.push_back(pte);
    }
    return ptes;
}

std::vector<PageTableEntry> MemoryManager::alloc_cgp(std::uint32_t owner, std::uint64_t base_vpn,
                                                     std::uint64_t n, std::uint32_t stack) {
    if (stack >= cfg_.num_stacks)
        throw ConfigError("invalid stack index " + std::to_string(stack) + " (num_stacks " +
                          std::to_string(cfg_.num_stacks) + ")");
    if (n == 0) return {};
    if (count_available(Granularity::CGP, stack) < n)
        throw CapacityError("out of memory: requested " + std::to_string(n) +
                            " CGP pages on stack " + std::to_string(stack));

    const std::uint32_t slot = cgp_slot_for_stack(stack);
    std::vector<PageTableEntry> ptes;
    ptes.reserve(n);
    auto& table = tables_[owner];
    for (std::uint64_t k = 0; k < n; ++k) {
        const std::uint64_t vpn = base_vpn + k;
        if (table.count(vpn))
            throw InvariantError("vpn " + std::to_string(vpn) + " already mapped");
        const std::uint64_t gidx = find_cgp_group(stack);
        auto& g = groups_[gidx];
        if (g.mode == GroupMode::Free) {
            g.mode = GroupMode::CGP;
            --free_groups_;
            for (std::uint32_t s = 0; s < cfg_.num_stacks; ++s) {
                ++cgp_free_slots_[s];
                hint_cgp_[s] = std::min(hint_cgp_[s], gidx);
            }
        }
        g.used_mask |= std::uint64_t{1} << slot;
        --free_pages_;
        --cgp_free_slots_[stack];
        check_group(gidx);

        PageTableEntry pte{vpn, gidx * cfg_.num_stacks + slot, Granularity::CGP, true, owner};
        table[vpn] = pte;
        ptes.push_back(pte);
    }
    return ptes;
}

std::vector<PageTableEntry> MemoryManager::alloc(std::uint32_t owner, std::uint64_t base_vpn,
                                                 const AllocationRequest& req) {
    if (req.target_stack && req.mode != Granularity::CGP)
        throw ConfigError("target_stack is only valid for CGP allocations");
    if (req.mode == Granularity::CGP) {
        if (!req.target_stack) throw ConfigError("CGP allocation requires target_stack");
        return alloc_cgp(owner, base_vpn, req.num_pages, *req.target_stack);
    }
    return alloc_fgp(owner, base_vpn, req.num_pages);
}

void MemoryManager::release_page(std::uint64_t ppn) {
    const std::uint64_t gidx = ppn / cfg_.num_stacks;
    const std::uint32_t slot = static_cast<std::uint32_t>(ppn % cfg_.num_stacks);
    auto& g = groups_[gidx];
    if (!((g.used_mask >> slot) & 1))
        throw InvariantError("double free of ppn " + std::to_string(ppn));
    g.used_mask &= ~(std::uint64_t{1} << slot);
    ++free_pages_;
    if (g.mode == GroupMode::FGP) {
        ++fgp_free_pages_;
        hint_fgp_ = std::min(hint_fgp_, gidx);
    } else if (g.mode == GroupMode::CGP) {
        ++cgp_free_slots_[slot];
        hint_cgp_[slot] = std::min(hint_cgp_[slot], gidx);
    }
    if (g.used_mask == 0) {
        // Mode switches are only legal on fully-free groups; revert to Free.
        if (g.mode == GroupMode::FGP) {
            fgp_free_pages_ -= cfg_.num_stacks;
        } else {
            for (std::uint32_t s = 0; s < cfg_.num_stacks; ++s) --cgp_free_slots_[s];
        }
        g.mode = GroupMode::Free;
        ++free_groups_;
        hint_free_ = std::min(hint_free_, gidx);
    }
    check_group(gidx);
}

void MemoryManager::free_pages(std::span<const PageTableEntry> ptes) {
    for (const auto& pte : ptes) {
        auto it = tables_.find(pte.owner);
        if (it == tables_.end())
            throw InvariantError("free of unmapped owner " + std::to_string(pte.owner));
        auto vit = it->second.find(pte.vpn);
        if (vit == it->second.end() || !vit->second.valid || vit->second.ppn != pte.ppn)
            throw InvariantError("double free of vpn " + std::to_string(pte.vpn));
        release_page(pte.ppn);
        it->second.erase(vit);
    }
}

std::pair<addrmap::PhysAddr, Granularity> MemoryManager::translate(std::uint64_t va,
                                                                   std::uint32_t owner) const {
    const std::uint64_t vpn = va / cfg_.page_size;
    auto it = tables_.find(owner);
    if (it == tables_.end())
        throw PageFaultError("page fault: owner " + std::to_string(owner) + " has no mappings");
    auto vit = it->second.find(vpn);
    if (vit == it->second.end())
        throw PageFaultError("page fault at va 0x" + std::to_string(va));
    const auto& pte = vit->second;
    return {pte.ppn * cfg_.page_size + (va & (cfg_.page_size - 1)), pte.granularity};
}

void MemoryManager::check_group(std::uint64_t gidx) const {
    const auto& g = groups_[gidx];
    if (g.mode == GroupMode::Free && g.used_mask != 0)
        throw InvariantError("free group " + std::to_string(gidx) + " has used pages");
    if (g.used_mask >> cfg_.num_stacks)
        throw InvariantError("group " + std::to_string(gidx) + " mask exceeds group size");
}

nlohmann::json MemoryManager::dump_json() const {
    nlohmann::json j;
    j["total_pages"] = total_pages();
    j["free_pages"] = free_pages_;
    j["group_count"] = groups_.size();
    nlohmann::json arr = nlohmann::json::array();
    for (std::uint64_t i = 0; i < groups_.size(); ++i) {
        const auto& g = groups_[i];
        if (g.mode == GroupMode::Free && g.used_mask == 0) continue; // keep dumps small
        arr.push_back({{"group", i},
                       {"base_ppn", i * cfg_.num_stacks},
                       {"mode", to_string(g.mode)},
                       {"used_mask", g.used_mask}});
    }
    j["groups"] = std::move(arr);
    return j;
}

} // namespace coda::mem
