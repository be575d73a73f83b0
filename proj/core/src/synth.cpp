#include "coda/synth.hpp"

#include <cmath>

#include "coda/errors.hpp"

namespace coda::synth {

using kmodel::AccessExpr;
using kmodel::Expr;
using kmodel::KernelSpec;
using kmodel::LoopSpec;
using kmodel::ObjectSpec;

KernelSpec block_exclusive(std::uint32_t blocks, std::uint32_t threads,
                           std::uint32_t elems_per_thread) {
    KernelSpec k;
    k.name = "block_exclusive";
    k.grid = {blocks, 1};
    k.block = {threads, 1};
    k.params["epr"] = elems_per_thread;
    k.objects.push_back(
        {"data", 4, std::uint64_t{blocks} * threads * elems_per_thread, true});
    AccessExpr a;
    a.object = "data";
    a.index = Expr::parse("(blockIdx.x*blockDim.x + threadIdx.x)*epr + i");
    a.loop = LoopSpec{"i", Expr::parse("epr")};
    k.accesses.push_back(std::move(a));
    k.validate();
    return k;
}

KernelSpec broadcast(std::uint32_t blocks, std::uint32_t threads, std::uint64_t total_elems) {
    if (total_elems % threads != 0)
        throw ConfigError("broadcast: total_elems must be a multiple of threads");
    KernelSpec k;
    k.name = "broadcast";
    k.grid = {blocks, 1};
    k.block = {threads, 1};
    k.params["rounds"] = static_cast<std::int64_t>(total_elems / threads);
    k.objects.push_back({"table", 4, total_elems, true});
    AccessExpr a;
    a.object = "table";
    a.index = Expr::parse("threadIdx.x + i*blockDim.x");
    a.loop = LoopSpec{"i", Expr::parse("rounds")};
    k.accesses.push_back(std::move(a));
    k.validate();
    return k;
}

KernelSpec streaming(std::uint32_t blocks, std::uint32_t threads, std::uint32_t elems_per_line) {
    KernelSpec k;
    k.name = "streaming";
    k.grid = {blocks, 1};
    k.block = {threads, 1};
    k.params["stride"] = elems_per_line;
    k.objects.push_back(
        {"stream", 4, std::uint64_t{blocks} * threads * elems_per_line, true});
    AccessExpr a;
    a.object = "stream";
    a.index = Expr::parse("(blockIdx.x*blockDim.x + threadIdx.x)*stride");
    k.accesses.push_back(std::move(a));
    k.validate();
    return k;
}

KernelSpec csr_graph(const CsrParams& p) {
    if (p.group_count < 1 || p.group_size < 1 || p.mean_elems < 1)
        throw ConfigError("csr_graph: degenerate parameters");
    if (p.cv < 0) throw ConfigError("csr_graph: cv must be nonnegative");

    // Hub magnitude k pages and pair rate q such that q*k*(k+1) = cv^2 with
    // q*(1+k) <= 1. Each hub community of (1+k) pages is followed by k empty
    // communities, so cumulative offsets re-anchor at page boundaries.
    std::uint32_t k_pages = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(
                                                           std::ceil(p.cv * p.cv)));
    const double q = p.cv * p.cv / (static_cast<double>(k_pages) * (k_pages + 1));
    std::uint64_t n_pairs = static_cast<std::uint64_t>(std::llround(q * p.group_count));
    const std::uint64_t pair_span = 1 + k_pages;
    if (n_pairs * pair_span > p.group_count) n_pairs = p.group_count / pair_span;

    // Per-group page multiplicity: 1 nominal, 1+k for hubs, 0 for the k
    // groups after each hub. Hubs are spread evenly.
    std::vector<std::uint32_t> group_pages(p.group_count, 1);
    for (std::uint64_t j = 0; j < n_pairs; ++j) {
        const std::uint64_t at = n_pairs == 0 ? 0 : (j * p.group_count) / n_pairs;
        std::uint64_t g = at;
        while (g + pair_span <= p.group_count) {
            bool clear = true;
            for (std::uint64_t i = 0; i < pair_span; ++i)
                if (group_pages[g + i] != 1) clear = false;
            if (clear) break;
            ++g;
        }
        if (g + pair_span > p.group_count) continue;
        group_pages[g] = 1 + k_pages;
        for (std::uint64_t i = 1; i <= k_pages; ++i) group_pages[g + i] = 0;
    }

    const std::uint64_t page_elems = p.mean_elems * p.group_size;
    KernelSpec k;
    k.name = "csr_graph";
    k.grid = {p.blocks(), 1};
    k.block = {p.threads, 1};

    kmodel::RangedTable table;
    table.start_elem.reserve(p.blocks());
    table.elem_count.reserve(p.blocks());
    std::uint64_t offset = 0;
    for (std::uint32_t g = 0; g < p.group_count; ++g) {
        const std::uint64_t group_total = group_pages[g] * page_elems;
        const std::uint64_t per_block = group_total / p.group_size;
        for (std::uint32_t b = 0; b < p.group_size; ++b) {
            table.start_elem.push_back(offset);
            table.elem_count.push_back(per_block);
            offset += per_block;
        }
    }

    k.objects.push_back({"edges", 4, std::max<std::uint64_t>(offset, 1), true});
    AccessExpr a;
    a.object = "edges";
    a.ranged = std::move(table);
    k.accesses.push_back(std::move(a));
    k.validate();
    return k;
}

} // namespace coda::synth
