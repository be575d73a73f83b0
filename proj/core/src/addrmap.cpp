#include "coda/addrmap.hpp"

#include <algorithm>
#include <bit>
#include <vector>

#include "coda/errors.hpp"

namespace coda::addrmap {

namespace {

bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

std::uint32_t log2u(std::uint64_t v) { return static_cast<std::uint32_t>(std::countr_zero(v)); }

} // namespace

const char* to_string(Granularity g) { return g == Granularity::FGP ? "FGP" : "CGP"; }

std::uint32_t MappingConfig::stack_bits() const { return log2u(num_stacks); }
std::uint32_t MappingConfig::fg_shift() const { return log2u(fg_interleave); }
std::uint32_t MappingConfig::cg_shift() const { return log2u(page_size); }

void MappingConfig::validate() const {
    if (num_stacks < 2 || !is_pow2(num_stacks))
        throw ConfigError("num_stacks must be a power of two >= 2, got " + std::to_string(num_stacks));
    if (!is_pow2(page_size))
        throw ConfigError("page_size must be a power of two, got " + std::to_string(page_size));
    if (!is_pow2(fg_interleave))
        throw ConfigError("fg_interleave must be a power of two, got " + std::to_string(fg_interleave));
    if (!is_pow2(access_granularity))
        throw ConfigError("access_granularity must be a power of two, got " +
                          std::to_string(access_granularity));
    if (fg_interleave < access_granularity)
        throw ConfigError("fg_interleave (" + std::to_string(fg_interleave) +
                          ") must be >= access_granularity (" + std::to_string(access_granularity) + ")");
    if (fg_interleave >= page_size)
        throw ConfigError("fg_interleave (" + std::to_string(fg_interleave) +
                          ") must be < page_size (" + std::to_string(page_size) + ")");
    if (fg_interleave * num_stacks > page_size)
        throw ConfigError("fg_interleave * num_stacks must not exceed page_size");
    if (total_bytes == 0 || total_bytes % group_bytes() != 0)
        throw ConfigError("total_bytes must be a nonzero multiple of num_stacks * page_size");
}

StackLocation decode(PhysAddr pa, Granularity g, const MappingConfig& cfg) {
    if (pa >= cfg.total_bytes)
        throw ConfigError("physical address 0x" + std::to_string(pa) + " outside configured space");
    const std::uint32_t shift = (g == Granularity::CGP) ? cfg.cg_shift() : cfg.fg_shift();
    const std::uint32_t bits = cfg.stack_bits();
    const std::uint64_t low_mask = (std::uint64_t{1} << shift) - 1;

    StackLocation loc;
    loc.stack_id = static_cast<std::uint32_t>((pa >> shift) & (cfg.num_stacks - 1));
    loc.local_offset = ((pa >> (shift + bits)) << shift) | (pa & low_mask);
    return loc;
}

PhysAddr encode(const StackLocation& loc, Granularity g, const MappingConfig& cfg) {
    if (loc.stack_id >= cfg.num_stacks)
        throw ConfigError("stack_id " + std::to_string(loc.stack_id) + " out of range");
    if (loc.local_offset >= cfg.stack_bytes())
        throw ConfigError("local_offset " + std::to_string(loc.local_offset) +
                          " exceeds per-stack capacity");
    const std::uint32_t shift = (g == Granularity::CGP) ? cfg.cg_shift() : cfg.fg_shift();
    const std::uint32_t bits = cfg.stack_bits();
    const std::uint64_t low_mask = (std::uint64_t{1} << shift) - 1;

    return ((loc.local_offset >> shift) << (shift + bits)) |
           (static_cast<std::uint64_t>(loc.stack_id) << shift) | (loc.local_offset & low_mask);
}

bool coverage_equivalence(PhysAddr group_base_pa, const MappingConfig& cfg) {
    if (group_base_pa % cfg.group_bytes() != 0)
        throw ConfigError("page-group base 0x" + std::to_string(group_base_pa) +
                          " not aligned to num_stacks * page_size");

    const std::uint64_t step = cfg.access_granularity;
    std::vector<StackLocation> fgp, cgp;
    fgp.reserve(cfg.group_bytes() / step);
    cgp.reserve(cfg.group_bytes() / step);
    for (PhysAddr pa = group_base_pa; pa < group_base_pa + cfg.group_bytes(); pa += step) {
        fgp.push_back(decode(pa, Granularity::FGP, cfg));
        cgp.push_back(decode(pa, Granularity::CGP, cfg));
    }
    auto key = [](const StackLocation& a, const StackLocation& b) {
        return a.stack_id != b.stack_id ? a.stack_id < b.stack_id : a.local_offset < b.local_offset;
    };
    std::sort(fgp.begin(), fgp.end(), key);
    std::sort(cgp.begin(), cgp.end(), key);
    return fgp == cgp;
}

} // namespace coda::addrmap
