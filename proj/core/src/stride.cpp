#include "coda/stride.hpp"

#include <cstdlib>

#include "coda/errors.hpp"

namespace coda::kmodel {

StrideResult analyze_stride(const KernelSpec& k, const AccessExpr& a) {
    StrideResult r;
    const ObjectSpec* obj = k.find_object(a.object);
    if (!obj) throw ConfigError("analyze_stride: unknown object '" + a.object + "'");
    if (a.is_ranged()) return r; // input-dependent: no compile-time stride

    LinearForm lf = linearize(a.index, [&](const std::string& s) {
        return k.invocation_constant(s);
    });
    if (!lf.affine) return r;

    // Only thread ids, block ids and the loop variable may remain symbolic.
    for (const auto& [sym, coef] : lf.coeffs) {
        (void)coef;
        const bool thread_sym = sym == "threadIdx.x" || sym == "threadIdx.y";
        const bool block_sym = sym == "blockIdx.x" || sym == "blockIdx.y";
        const bool loop_sym = a.loop && sym == a.loop->var;
        if (!thread_sym && !block_sym && !loop_sym)
            throw ConfigError("analyze_stride: unresolved symbol '" + sym + "' in \"" +
                              a.index.to_string() + "\"");
    }

    // Coefficient on the flattened block id b = blockIdx.y * gridDim.x + blockIdx.x.
    const std::int64_t cx = lf.coeff("blockIdx.x");
    const std::int64_t cy = lf.coeff("blockIdx.y");
    std::int64_t c = 0;
    if (k.grid.y == 1) {
        c = (k.grid.x == 1) ? 0 : cx;
    } else if (k.grid.x == 1) {
        c = cy;
    } else {
        if (cy != cx * static_cast<std::int64_t>(k.grid.x)) return r; // not affine in b
        c = cx;
    }
    if (c < 0) return r; // backwards march: treat as irregular, FGP is safe

    const std::uint64_t trips = k.trip_count(a);
    const std::int64_t esize = obj->element_size;
    if (trips == 0) {
        r.regular = true;
        r.block_stride = c * esize;
        return r; // empty footprint
    }

    std::int64_t span = 0;  // sum |coef| * (range-1) over intra-block symbols
    std::int64_t minoff = lf.constant;
    auto fold = [&](const std::string& sym, std::int64_t range) {
        const std::int64_t coef = lf.coeff(sym);
        span += std::abs(coef) * (range - 1);
        minoff += std::min<std::int64_t>(0, coef * (range - 1));
    };
    fold("threadIdx.x", k.block.x);
    fold("threadIdx.y", k.block.y);
    if (a.loop) fold(a.loop->var, static_cast<std::int64_t>(trips));

    r.regular = true;
    r.per_block_bytes = static_cast<std::uint64_t>(span + 1) * esize;
    r.block_stride = c * esize;
    r.base_offset = minoff * esize;
    return r;
}

} // namespace coda::kmodel
