#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coda/expr.hpp"

#include <nlohmann/json_fwd.hpp>

namespace coda::kmodel {

struct Dim2 {
    std::uint32_t x = 1;
    std::uint32_t y = 1;
    std::uint64_t count() const { return std::uint64_t{x} * y; }
};

struct ObjectSpec {
    std::string name;
    std::uint32_t element_size = 4; // one of 1,2,4,8
    std::uint64_t element_count = 1;
    bool init_by_host = true;

    std::uint64_t bytes() const { return element_count * element_size; }
};

struct LoopSpec {
    std::string var;
    Expr count; // invocation-constant trip count
};

// Per-block [start, start+count) element ranges for input-dependent accesses
// (e.g. CSR neighbor lists). The compile-time analyzer treats these as
// irregular; traces and the profiler evaluate them exactly.
struct RangedTable {
    std::vector<std::uint64_t> start_elem;
    std::vector<std::uint64_t> elem_count;
};

struct AccessExpr {
    std::string object;
    Expr index;                     // affine accesses
    std::optional<LoopSpec> loop;
    std::optional<RangedTable> ranged;
    bool is_write = false;

    bool is_ranged() const { return ranged.has_value(); }
};

struct KernelSpec {
    std::string name;
    Dim2 grid;
    Dim2 block;
    std::map<std::string, std::int64_t> params;
    std::vector<ObjectSpec> objects;
    std::vector<AccessExpr> accesses;

    std::uint64_t total_blocks() const { return grid.count(); }
    std::uint64_t threads_per_block() const { return block.count(); }

    // Row-major flattening shared by the analyzer, the trace generator and
    // the scheduler.
    std::uint64_t flatten_block(std::uint32_t bx, std::uint32_t by) const {
        return std::uint64_t{by} * grid.x + bx;
    }

    const ObjectSpec* find_object(const std::string& name) const;
    std::size_t object_index(const std::string& name) const;

    // Resolves invocation constants: params, blockDim.*, gridDim.*.
    std::optional<std::int64_t> invocation_constant(const std::string& sym) const;

    // Loop trip count for an access (1 when no loop). Throws ConfigError if
    // the bound is not an invocation constant.
    std::uint64_t trip_count(const AccessExpr& a) const;

    void validate() const; // throws ConfigError naming the field

    static KernelSpec from_json(const nlohmann::json& j);
    static KernelSpec load_file(const std::string& path);
    nlohmann::json to_json() const;
};

// Virtual-address layout of a set of kernels' objects: each object starts on
// a fresh page, objects in declaration order from va 0.
struct ObjectLayout {
    struct Entry {
        std::string name;
        std::uint64_t start_va = 0;
        std::uint64_t bytes = 0;
        std::uint64_t pages = 0;
    };
    std::vector<Entry> entries;
    std::uint64_t page_size = 4096;

    const Entry& entry(const std::string& name) const;
    std::uint64_t total_pages() const;

    // Start va per object of `k`, indexed like KernelSpec::objects. Hot paths
    // use this instead of name lookups per trace entry.
    std::vector<std::uint64_t> start_vas(const KernelSpec& k) const;
};

ObjectLayout build_layout(const std::vector<KernelSpec>& kernels, std::uint64_t page_size);

} // namespace coda::kmodel
