#pragma once

#include <cstdint>

#include "coda/errors.hpp"

namespace coda {

// Compute-side geometry. blocks_per_stack() is the N_blocks_per_stack constant
// used by the affinity equation and the chunk-size computation.
struct SystemShape {
    std::uint32_t num_stacks = 4;
    std::uint32_t sms_per_stack = 4;
    std::uint32_t blocks_per_sm = 6;

    std::uint32_t blocks_per_stack() const { return sms_per_stack * blocks_per_sm; }
    std::uint32_t total_sms() const { return num_stacks * sms_per_stack; }

    void validate() const {
        if (num_stacks < 1) throw ConfigError("shape.num_stacks must be >= 1");
        if (sms_per_stack < 1) throw ConfigError("shape.sms_per_stack must be >= 1");
        if (blocks_per_sm < 1) throw ConfigError("shape.blocks_per_sm must be >= 1");
    }
};

} // namespace coda
