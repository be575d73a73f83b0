#include "coda/placement.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "coda/errors.hpp"
#include "coda/sched.hpp"
#include "coda/trace.hpp"

namespace coda::placement {

const char* to_string(PlaceMode m) { return m == PlaceMode::FGP ? "FGP" : "CGP"; }

const char* to_string(Rationale r) {
    switch (r) {
        case Rationale::RegularStride: return "regular-stride";
        case Rationale::ProfiledExclusive: return "profiled-exclusive";
        case Rationale::Shared: return "shared";
        case Rationale::Irregular: return "irregular";
        case Rationale::ParameterObject: return "parameter-object";
        case Rationale::Policy: return "policy";
        case Rationale::FirstTouch: return "first-touch";
    }
    return "?";
}

std::uint64_t chunk_size(std::uint64_t B, const SystemShape& shape, std::uint64_t page_size) {
    return std::min<std::uint64_t>(page_size, B * shape.blocks_per_stack());
}

std::uint32_t stack_of(std::uint64_t va, std::uint64_t obj_start, std::uint64_t chunk_size,
                       std::uint32_t num_stacks) {
    if (va < obj_start) throw ConfigError("va below object start in stack_of");
    if (chunk_size == 0) throw ConfigError("stack_of with zero chunk_size");
    return static_cast<std::uint32_t>(((va - obj_start) / chunk_size) % num_stacks);
}

std::uint32_t ObjectPlacement::stack_of(std::uint64_t va, std::uint32_t num_stacks,
                                        std::uint64_t page_size) const {
    if (mode != PlaceMode::CGP) throw ConfigError("stack_of on an FGP object");
    if (va < start_va || va >= start_va + pages * page_size)
        throw ConfigError("va 0x" + std::to_string(va) + " outside object '" + object + "'");
    if (!page_stacks.empty()) return page_stacks[(va - start_va) / page_size];
    return placement::stack_of(va, start_va, chunk_size, num_stacks);
}

bool PlacementPlan::any_cgp() const {
    for (const auto& o : objects)
        if (o.mode == PlaceMode::CGP) return true;
    return false;
}

const ObjectPlacement& PlacementPlan::entry(const std::string& name) const {
    for (const auto& o : objects)
        if (o.object == name) return o;
    throw ConfigError("object '" + name + "' not in placement plan");
}

nlohmann::json PlacementPlan::dump_json() const {
    nlohmann::ordered_json j;
    j["page_size"] = page_size;
    j["num_stacks"] = num_stacks;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& o : objects) {
        nlohmann::ordered_json jo;
        jo["object"] = o.object;
        jo["mode"] = to_string(o.mode);
        jo["rationale"] = to_string(o.rationale);
        jo["B"] = o.per_block_bytes;
        jo["raw_chunk_size"] = o.raw_chunk;
        jo["chunk_size"] = o.chunk_size;
        jo["start_va"] = o.start_va;
        jo["bytes"] = o.bytes;
        jo["pages"] = o.pages;
        if (o.mode == PlaceMode::CGP) {
            nlohmann::ordered_json stacks = nlohmann::ordered_json::array();
            for (std::uint64_t p = 0; p < o.pages; ++p)
                stacks.push_back(o.stack_of(o.start_va + p * page_size, num_stacks, page_size));
            jo["page_stacks"] = std::move(stacks);
        } else {
            jo["page_stacks"] = nullptr;
        }
        arr.push_back(std::move(jo));
    }
    j["objects"] = std::move(arr);
    return j;
}

std::vector<AccessAnalysis> analyze_kernel(const kmodel::KernelSpec& k) {
    std::vector<AccessAnalysis> out;
    out.reserve(k.accesses.size());
    for (const auto& a : k.accesses) {
        AccessAnalysis aa;
        aa.object = a.object;
        aa.ranged = a.is_ranged();
        aa.stride = kmodel::analyze_stride(k, a);
        out.push_back(std::move(aa));
    }
    return out;
}

namespace {

std::uint64_t round_up_pages(std::uint64_t bytes, std::uint64_t page_size) {
    return (bytes + page_size - 1) / page_size * page_size;
}

ObjectPlacement base_entry(const kmodel::ObjectLayout::Entry& e) {
    ObjectPlacement o;
    o.object = e.name;
    o.start_va = e.start_va;
    o.bytes = e.bytes;
    o.pages = e.pages;
    return o;
}

// Decision for one object given the analyses of the first kernel accessing it.
void decide_regular(ObjectPlacement& o, const std::vector<const AccessAnalysis*>& accs,
                    const SystemShape& shape, std::uint64_t page_size) {
    bool any_irregular = false;
    bool any_zero_stride = false;
    bool any_positive = false;
    bool stride_conflict = false;
    std::int64_t stride = -1;
    std::int64_t lo = 0, hi = 0; // combined footprint bounds (bytes)
    bool have_bounds = false;
    bool param_like = true;

    for (const auto* a : accs) {
        if (a->ranged || !a->stride.regular) {
            any_irregular = true;
            continue;
        }
        if (a->stride.block_stride == 0)
            any_zero_stride = true;
        else {
            any_positive = true;
            if (stride >= 0 && stride != a->stride.block_stride) stride_conflict = true;
            stride = a->stride.block_stride;
        }
        if (a->stride.per_block_bytes > 0) {
            const std::int64_t b0 = a->stride.base_offset;
            const std::int64_t b1 =
                a->stride.base_offset + static_cast<std::int64_t>(a->stride.per_block_bytes);
            if (!have_bounds) {
                lo = b0;
                hi = b1;
                have_bounds = true;
            } else {
                lo = std::min(lo, b0);
                hi = std::max(hi, b1);
            }
        }
        // Parameter-like: one element, independent of block and thread ids.
        if (a->stride.block_stride != 0 || a->stride.per_block_bytes > 8) param_like = false;
    }

    if (any_irregular) {
        o.mode = PlaceMode::FGP;
        o.rationale = Rationale::Irregular;
        return;
    }
    if (!any_positive) {
        o.mode = PlaceMode::FGP;
        o.rationale = param_like ? Rationale::ParameterObject : Rationale::Shared;
        return;
    }
    if (any_zero_stride || stride_conflict) {
        // Conflicting views of one object: shared access dominates.
        o.mode = PlaceMode::FGP;
        o.rationale = Rationale::Shared;
        return;
    }

    const std::uint64_t B = have_bounds ? static_cast<std::uint64_t>(hi - lo) : 0;
    o.per_block_bytes = B;
    o.raw_chunk = chunk_size(B, shape, page_size);
    if (o.raw_chunk < page_size) {
        // Sub-page chunks cannot be realized by page-granularity hardware.
        o.mode = PlaceMode::FGP;
        o.rationale = Rationale::Shared;
        return;
    }
    o.mode = PlaceMode::CGP;
    o.rationale = Rationale::RegularStride;
    o.chunk_size = round_up_pages(o.raw_chunk, page_size);
}

// Profiler-assisted path for irregularly accessed objects.
void decide_profiled(ObjectPlacement& o, const kmodel::KernelSpec& first_kernel,
                     const kmodel::PageAccessHistogram& prof, const SystemShape& shape,
                     std::uint64_t page_size) {
    std::vector<const kmodel::PageAccessHistogram::PageInfo*> pages;
    for (const auto& p : prof.pages)
        if (p.object == o.object) pages.push_back(&p);
    if (pages.empty()) return;

    std::uint64_t single = 0;
    for (const auto* p : pages)
        if (p->stacks.size() == 1) ++single;
    if (static_cast<double>(single) <= 0.9 * static_cast<double>(pages.size())) return;

    // Estimated per-block footprint from the profiling traces.
    const auto fps = kmodel::object_footprints(first_kernel, o.object);
    double sum = 0;
    std::uint64_t n = 0;
    for (const auto& fp : fps) {
        if (!fp.any()) continue;
        const auto& obj = *first_kernel.find_object(o.object);
        sum += static_cast<double>(fp.max_byte - fp.min_byte + obj.element_size);
        ++n;
    }
    if (n == 0) return;
    const std::uint64_t B_est = static_cast<std::uint64_t>(std::llround(sum / n));
    const std::uint64_t raw = chunk_size(B_est, shape, page_size);
    if (raw < page_size) return;
    const std::uint64_t chunk = round_up_pages(raw, page_size);

    // The arithmetic stack assignment must agree with the observed page->stack
    // attribution, otherwise localizing misplaces pages and degrades over FGP.
    std::uint64_t agree = 0;
    for (const auto* p : pages) {
        if (p->stacks.size() != 1) continue;
        const std::uint64_t page_va = p->vpn * page_size;
        if (stack_of(page_va, o.start_va, chunk, shape.num_stacks) == *p->stacks.begin())
            ++agree;
    }
    if (static_cast<double>(agree) <= 0.9 * static_cast<double>(single)) return;

    o.mode = PlaceMode::CGP;
    o.rationale = Rationale::ProfiledExclusive;
    o.per_block_bytes = B_est;
    o.raw_chunk = raw;
    o.chunk_size = chunk;
}

} // namespace

PlacementPlan plan(const std::vector<kmodel::KernelSpec>& kernels,
                   const std::vector<std::vector<AccessAnalysis>>& analyses,
                   const std::optional<kmodel::PageAccessHistogram>& profile,
                   const kmodel::ObjectLayout& layout, const SystemShape& shape) {
    if (analyses.size() != kernels.size())
        throw ConfigError("plan: one analysis list per kernel required");
    PlacementPlan out;
    out.page_size = layout.page_size;
    out.num_stacks = shape.num_stacks;

    for (const auto& ent : layout.entries) {
        ObjectPlacement o = base_entry(ent);

        // First kernel (in list order) that accesses the object wins.
        const kmodel::KernelSpec* first_kernel = nullptr;
        std::vector<const AccessAnalysis*> accs;
        for (std::size_t ki = 0; ki < kernels.size() && !first_kernel; ++ki) {
            for (const auto& aa : analyses[ki]) {
                if (aa.object != ent.name) continue;
                if (!first_kernel) first_kernel = &kernels[ki];
                accs.push_back(&aa);
            }
        }
        if (!first_kernel) {
            o.mode = PlaceMode::FGP; // never touched by a kernel: host data
            o.rationale = Rationale::Shared;
            out.objects.push_back(std::move(o));
            continue;
        }

        decide_regular(o, accs, shape, layout.page_size);
        if (o.mode == PlaceMode::FGP && o.rationale == Rationale::Irregular && profile)
            decide_profiled(o, *first_kernel, *profile, shape, layout.page_size);
        out.objects.push_back(std::move(o));
    }
    return out;
}

PlacementPlan first_touch_plan(const std::vector<kmodel::KernelSpec>& kernels,
                               const kmodel::ObjectLayout& layout, const SystemShape& shape) {
    PlacementPlan out;
    out.page_size = layout.page_size;
    out.num_stacks = shape.num_stacks;

    std::map<std::string, std::vector<std::optional<std::uint32_t>>> first_stack;
    for (const auto& ent : layout.entries)
        first_stack[ent.name].resize(ent.pages);

    // Kernels execute in order, blocks in ascending id order; host-side
    // initialization accesses are ignored.
    for (const auto& k : kernels) {
        std::vector<std::vector<std::optional<std::uint32_t>>*> slots;
        for (const auto& o : k.objects) slots.push_back(&first_stack.at(o.name));
        for (std::uint32_t b = 0; b < k.total_blocks(); ++b) {
            const std::uint32_t stack = sched::affinity(b, shape);
            for (const auto& e : gen_trace(k, b)) {
                auto& slot = (*slots[e.object])[e.byte_offset / layout.page_size];
                if (!slot) slot = stack;
            }
        }
    }

    for (const auto& ent : layout.entries) {
        ObjectPlacement o = base_entry(ent);
        o.mode = PlaceMode::CGP;
        o.rationale = Rationale::FirstTouch;
        o.chunk_size = layout.page_size;
        o.raw_chunk = layout.page_size;
        o.page_stacks.reserve(ent.pages);
        for (const auto& slot : first_stack[ent.name])
            o.page_stacks.push_back(slot.value_or(0));
        out.objects.push_back(std::move(o));
    }
    return out;
}

PlacementPlan uniform_fgp_plan(const kmodel::ObjectLayout& layout, const SystemShape& shape) {
    PlacementPlan out;
    out.page_size = layout.page_size;
    out.num_stacks = shape.num_stacks;
    for (const auto& ent : layout.entries) {
        ObjectPlacement o = base_entry(ent);
        o.mode = PlaceMode::FGP;
        o.rationale = Rationale::Policy;
        out.objects.push_back(std::move(o));
    }
    return out;
}

PlacementPlan uniform_cgp_plan(const kmodel::ObjectLayout& layout, const SystemShape& shape) {
    PlacementPlan out;
    out.page_size = layout.page_size;
    out.num_stacks = shape.num_stacks;
    for (const auto& ent : layout.entries) {
        ObjectPlacement o = base_entry(ent);
        o.mode = PlaceMode::CGP;
        o.rationale = Rationale::Policy;
        o.chunk_size = layout.page_size;
        o.raw_chunk = layout.page_size;
        o.page_stacks.reserve(ent.pages);
        for (std::uint64_t p = 0; p < ent.pages; ++p) {
            const std::uint64_t vpn = ent.start_va / layout.page_size + p;
            o.page_stacks.push_back(static_cast<std::uint32_t>(vpn % shape.num_stacks));
        }
        out.objects.push_back(std::move(o));
    }
    return out;
}

PlacementPlan pinned_cgp_plan(const kmodel::ObjectLayout& layout, const SystemShape& shape,
                              std::uint32_t stack) {
    if (stack >= shape.num_stacks)
        throw ConfigError("pinned_cgp_plan: stack " + std::to_string(stack) + " out of range");
    PlacementPlan out;
    out.page_size = layout.page_size;
    out.num_stacks = shape.num_stacks;
    for (const auto& ent : layout.entries) {
        ObjectPlacement o = base_entry(ent);
        o.mode = PlaceMode::CGP;
        o.rationale = Rationale::Policy;
        o.chunk_size = layout.page_size;
        o.raw_chunk = layout.page_size;
        o.page_stacks.assign(ent.pages, stack);
        out.objects.push_back(std::move(o));
    }
    return out;
}

MaterializeResult materialize(const PlacementPlan& plan, mem::MemoryManager& mm,
                              std::uint32_t owner) {
    MaterializeResult res;
    for (const auto& o : plan.objects) {
        const std::uint64_t base_vpn = o.start_va / plan.page_size;
        if (o.mode == PlaceMode::FGP) {
            auto ptes = mm.alloc_fgp(owner, base_vpn, o.pages);
            res.ptes.insert(res.ptes.end(), ptes.begin(), ptes.end());
            continue;
        }
        bool fell_back = false;
        for (std::uint64_t p = 0; p < o.pages; ++p) {
            const std::uint64_t page_va = o.start_va + p * plan.page_size;
            if (!fell_back) {
                const std::uint32_t stack = o.stack_of(page_va, plan.num_stacks, plan.page_size);
                try {
                    auto ptes = mm.alloc_cgp(owner, base_vpn + p, 1, stack);
                    res.ptes.insert(res.ptes.end(), ptes.begin(), ptes.end());
                    continue;
                } catch (const CapacityError&) {
                    fell_back = true; // demote the rest of this object to FGP
                }
            }
            auto ptes = mm.alloc_fgp(owner, base_vpn + p, 1);
            res.ptes.insert(res.ptes.end(), ptes.begin(), ptes.end());
            ++res.fgp_fallback_pages;
        }
    }
    return res;
}

} // namespace coda::placement
