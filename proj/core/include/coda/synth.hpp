#pragma once

#include <cstdint>

#include "coda/kernel.hpp"

namespace coda::synth {

// Disjoint per-block footprints: block b streams elements
// [b*threads*elems_per_thread, ...). B = threads * elems_per_thread * 4.
kmodel::KernelSpec block_exclusive(std::uint32_t blocks, std::uint32_t threads,
                                   std::uint32_t elems_per_thread);

// Every block reads the whole object.
kmodel::KernelSpec broadcast(std::uint32_t blocks, std::uint32_t threads,
                             std::uint64_t total_elems);

// Sequential stream at one access_granularity line per thread.
kmodel::KernelSpec streaming(std::uint32_t blocks, std::uint32_t threads,
                             std::uint32_t elems_per_line);

struct CsrParams {
    std::uint32_t group_count = 420;    // affinity groups (N_blocks_per_stack blocks each)
    std::uint32_t group_size = 8;       // must equal the scenario's N_blocks_per_stack
    std::uint32_t threads = 64;         // threads per block
    std::uint64_t mean_elems = 128;     // mean edges per block; group_size*mean = page elems
    double cv = 0.1;                    // target coefficient of variation of per-block counts

    std::uint32_t blocks() const { return group_count * group_size; }
};

// Synthetic CSR edge stream with community-structured degree variance. Most
// groups of group_size blocks cover exactly one page worth of edges; a
// cv-calibrated fraction form hub communities of (1+k) pages followed by k
// empty communities, so row offsets stay page-aligned while the arithmetic
// stack assignment drifts out of alignment as cv grows.
kmodel::KernelSpec csr_graph(const CsrParams& p);

} // namespace coda::synth
