#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coda/kernel.hpp"
#include "coda/memmgr.hpp"
#include "coda/profile.hpp"
#include "coda/stride.hpp"
#include "coda/system.hpp"

#include <nlohmann/json_fwd.hpp>

namespace coda::placement {

enum class PlaceMode : std::uint8_t { FGP, CGP };

enum class Rationale : std::uint8_t {
    RegularStride,
    ProfiledExclusive,
    Shared,
    Irregular,
    ParameterObject,
    Policy,     // forced by FGP-Only / CGP-Only
    FirstTouch, // idealized CGP-Only+FTA oracle
};

const char* to_string(PlaceMode m);
const char* to_string(Rationale r);

// Per-stack chunk of a localized object: min(page_size, B * N_blocks_per_stack);
// the classic 4KB cap generalizes to the configured page size.
std::uint64_t chunk_size(std::uint64_t B, const SystemShape& shape, std::uint64_t page_size);

// Chunk-cyclic stack assignment: floor((va - obj_start) / chunk_size) mod N.
std::uint32_t stack_of(std::uint64_t va, std::uint64_t obj_start, std::uint64_t chunk_size,
                       std::uint32_t num_stacks);

struct ObjectPlacement {
    std::string object;
    PlaceMode mode = PlaceMode::FGP;
    Rationale rationale = Rationale::Shared;
    std::uint64_t per_block_bytes = 0; // B
    std::uint64_t raw_chunk = 0;       // chunk before page round-up
    std::uint64_t chunk_size = 0;      // effective: rounded up to a page multiple
    std::uint64_t start_va = 0;
    std::uint64_t bytes = 0;
    std::uint64_t pages = 0;
    std::vector<std::uint32_t> page_stacks; // explicit per-page stacks; empty -> chunk-cyclic

    // CGP only; va must lie inside the object.
    std::uint32_t stack_of(std::uint64_t va, std::uint32_t num_stacks,
                           std::uint64_t page_size) const;
};

struct PlacementPlan {
    std::vector<ObjectPlacement> objects;
    std::uint64_t page_size = 4096;
    std::uint32_t num_stacks = 4;

    bool any_cgp() const;
    const ObjectPlacement& entry(const std::string& name) const;
    nlohmann::json dump_json() const;
};

struct AccessAnalysis {
    std::string object;
    bool ranged = false;
    kmodel::StrideResult stride;
};

std::vector<AccessAnalysis> analyze_kernel(const kmodel::KernelSpec& k);

// The co-placement decision. Objects with a positive runtime-constant block
// stride whose chunk saturates the page size become CGP; irregular
// objects may still become CGP when the profile shows >90% of their pages
// touched by a single stack and that attribution agrees with the chunk-cyclic
// assignment. Everything else stays FGP. When several kernels touch one
// object, the first kernel in list order wins.
PlacementPlan plan(const std::vector<kmodel::KernelSpec>& kernels,
                   const std::vector<std::vector<AccessAnalysis>>& analyses,
                   const std::optional<kmodel::PageAccessHistogram>& profile,
                   const kmodel::ObjectLayout& layout, const SystemShape& shape);

// Idealized first-touch oracle: every page CGP on the stack of the lowest
// flattened block id that touches it (host accesses ignored).
PlacementPlan first_touch_plan(const std::vector<kmodel::KernelSpec>& kernels,
                               const kmodel::ObjectLayout& layout, const SystemShape& shape);

PlacementPlan uniform_fgp_plan(const kmodel::ObjectLayout& layout, const SystemShape& shape);

// Consecutive pages on consecutive stacks in circular order.
PlacementPlan uniform_cgp_plan(const kmodel::ObjectLayout& layout, const SystemShape& shape);

// Every page of every object on one stack (multiprogrammed CGP mode).
PlacementPlan pinned_cgp_plan(const kmodel::ObjectLayout& layout, const SystemShape& shape,
                              std::uint32_t stack);

struct MaterializeResult {
    std::vector<mem::PageTableEntry> ptes;
    std::uint64_t fgp_fallback_pages = 0; // CGP pages demoted on capacity failure
};

MaterializeResult materialize(const PlacementPlan& plan, mem::MemoryManager& mm,
                              std::uint32_t owner);

} // namespace coda::placement
