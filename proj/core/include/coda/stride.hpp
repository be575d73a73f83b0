#pragma once

#include <cstdint>

#include "coda/kernel.hpp"

namespace coda::kmodel {

// Outcome of the inter-block stride examination for one access. When regular,
// consecutive flattened block ids touch footprints of per_block_bytes bytes,
// block_stride bytes apart, starting at base_offset within the object.
struct StrideResult {
    bool regular = false;
    std::uint64_t per_block_bytes = 0; // byte extent of one block's footprint (B)
    std::int64_t block_stride = 0;     // bytes between consecutive blocks' footprints
    std::int64_t base_offset = 0;      // byte offset of block 0's footprint start
};

// Symbolic stride detection: the index must be affine in the flattened block
// id, thread indices and the loop variable, with invocation-constant
// coefficients. Non-affine dependence (or a backwards block march) yields
// regular=false; malformed expressions throw ConfigError.
StrideResult analyze_stride(const KernelSpec& k, const AccessExpr& a);

} // namespace coda::kmodel
