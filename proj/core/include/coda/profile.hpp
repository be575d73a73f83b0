#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "coda/kernel.hpp"
#include "coda/system.hpp"

#include <nlohmann/json_fwd.hpp>

namespace coda::kmodel {

// Distribution of virtual pages by the thread-blocks and stacks that touch
// them. Stack attribution follows the affinity assignment of the accessing
// blocks.
struct PageAccessHistogram {
    struct PageInfo {
        std::uint64_t vpn = 0;
        std::string object;
        std::set<std::uint64_t> blocks;
        std::set<std::uint32_t> stacks;
        std::uint64_t accesses = 0;
    };

    std::vector<PageInfo> pages; // sorted by vpn
    std::uint64_t total_blocks = 0;
    std::uint64_t page_size = 4096;

    std::map<std::uint64_t, std::uint64_t> by_block_count() const;
    std::map<std::uint64_t, std::uint64_t> by_stack_count() const;
    std::uint64_t pages_touched_by_all() const;
    std::uint64_t distinct_pairs() const; // total (page, block) pairs

    nlohmann::json to_json() const;
};

PageAccessHistogram profile(const KernelSpec& k, const ObjectLayout& layout,
                            const SystemShape& shape);

// Merges histograms of the kernels of one workload; block ids are namespaced
// per kernel so sharing across kernels is still visible.
PageAccessHistogram merge_profiles(std::span<const PageAccessHistogram> parts);

struct RegularityEstimate {
    double mu = 0;
    double sigma = 0;
    double cv = 0;
};

// Population mean / standard deviation / cv of per-block work. Throws
// ConfigError on an empty list or mu == 0.
RegularityEstimate estimate_regularity(std::span<const std::uint64_t> per_block_counts);

} // namespace coda::kmodel
