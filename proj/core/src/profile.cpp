#include "coda/profile.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "coda/errors.hpp"
#include "coda/sched.hpp"
#include "coda/trace.hpp"

namespace coda::kmodel {

std::map<std::uint64_t, std::uint64_t> PageAccessHistogram::by_block_count() const {
    std::map<std::uint64_t, std::uint64_t> h;
    for (const auto& p : pages) ++h[p.blocks.size()];
    return h;
}

std::map<std::uint64_t, std::uint64_t> PageAccessHistogram::by_stack_count() const {
    std::map<std::uint64_t, std::uint64_t> h;
    for (const auto& p : pages) ++h[p.stacks.size()];
    return h;
}

std::uint64_t PageAccessHistogram::pages_touched_by_all() const {
    std::uint64_t n = 0;
    for (const auto& p : pages)
        if (p.blocks.size() == total_blocks) ++n;
    return n;
}

std::uint64_t PageAccessHistogram::distinct_pairs() const {
    std::uint64_t n = 0;
    for (const auto& p : pages) n += p.blocks.size();
    return n;
}

nlohmann::json PageAccessHistogram::to_json() const {
    nlohmann::ordered_json j;
    j["total_pages"] = pages.size();
    j["total_blocks"] = total_blocks;
    nlohmann::ordered_json bb = nlohmann::ordered_json::object();
    for (const auto& [k, v] : by_block_count()) bb[std::to_string(k)] = v;
    j["by_block_count"] = std::move(bb);
    nlohmann::ordered_json bs = nlohmann::ordered_json::object();
    for (const auto& [k, v] : by_stack_count()) bs[std::to_string(k)] = v;
    j["by_stack_count"] = std::move(bs);
    j["pages_touched_by_all_blocks"] = pages_touched_by_all();
    return j;
}

PageAccessHistogram profile(const KernelSpec& k, const ObjectLayout& layout,
                            const SystemShape& shape) {
    PageAccessHistogram hist;
    hist.total_blocks = k.total_blocks();
    hist.page_size = layout.page_size;

    const auto start_vas = layout.start_vas(k);
    std::map<std::uint64_t, PageAccessHistogram::PageInfo> by_vpn;
    for (std::uint32_t b = 0; b < k.total_blocks(); ++b) {
        const std::uint32_t stack = sched::affinity(b, shape);
        for (const auto& e : gen_trace(k, b)) {
            const std::uint64_t va = start_vas[e.object] + e.byte_offset;
            const std::uint64_t vpn = va / layout.page_size;
            auto& info = by_vpn[vpn];
            info.vpn = vpn;
            info.object = k.objects[e.object].name;
            info.blocks.insert(b);
            info.stacks.insert(stack);
            ++info.accesses;
        }
    }
    hist.pages.reserve(by_vpn.size());
    for (auto& [vpn, info] : by_vpn) hist.pages.push_back(std::move(info));
    return hist;
}

PageAccessHistogram merge_profiles(std::span<const PageAccessHistogram> parts) {
    PageAccessHistogram out;
    if (parts.empty()) return out;
    out.page_size = parts.front().page_size;

    std::map<std::uint64_t, PageAccessHistogram::PageInfo> by_vpn;
    std::uint64_t block_base = 0;
    for (const auto& part : parts) {
        for (const auto& p : part.pages) {
            auto& info = by_vpn[p.vpn];
            info.vpn = p.vpn;
            info.object = p.object;
            for (auto b : p.blocks) info.blocks.insert(block_base + b);
            info.stacks.insert(p.stacks.begin(), p.stacks.end());
            info.accesses += p.accesses;
        }
        block_base += part.total_blocks;
    }
    out.total_blocks = block_base;
    out.pages.reserve(by_vpn.size());
    for (auto& [vpn, info] : by_vpn) out.pages.push_back(std::move(info));
    return out;
}

RegularityEstimate estimate_regularity(std::span<const std::uint64_t> per_block_counts) {
    if (per_block_counts.empty())
        throw ConfigError("estimate_regularity: empty per-block count list");
    double sum = 0;
    for (auto c : per_block_counts) sum += static_cast<double>(c);
    const double mu = sum / static_cast<double>(per_block_counts.size());
    if (mu == 0) throw ConfigError("estimate_regularity: mean is zero, cv undefined");
    double ss = 0;
    for (auto c : per_block_counts) {
        const double d = static_cast<double>(c) - mu;
        ss += d * d;
    }
    const double sigma = std::sqrt(ss / static_cast<double>(per_block_counts.size()));
    return {mu, sigma, sigma / mu};
}

} // namespace coda::kmodel
