#include "coda/trace.hpp"

#include <ostream>

#include "coda/errors.hpp"

namespace coda::kmodel {

std::vector<TraceEntry> gen_trace(const KernelSpec& k, std::uint32_t block) {
    if (block >= k.total_blocks())
        throw TraceError("block " + std::to_string(block) + " out of range (total " +
                         std::to_string(k.total_blocks()) + ")");
    const std::uint32_t bx = block % k.grid.x;
    const std::uint32_t by = block / k.grid.x;
    const std::uint64_t threads = k.threads_per_block();

    std::vector<TraceEntry> out;
    for (std::uint32_t ty = 0; ty < k.block.y; ++ty) {
        for (std::uint32_t tx = 0; tx < k.block.x; ++tx) {
            const std::uint32_t thread = ty * k.block.x + tx;
            for (const auto& a : k.accesses) {
                const auto oidx = k.object_index(a.object);
                const ObjectSpec& obj = k.objects[oidx];
                if (a.is_ranged()) {
                    const std::uint64_t start = a.ranged->start_elem[block];
                    const std::uint64_t count = a.ranged->elem_count[block];
                    for (std::uint64_t j = thread; j < count; j += threads) {
                        const std::uint64_t elem = start + j;
                        if (elem >= obj.element_count)
                            throw TraceError("ranged access on '" + a.object + "' out of bounds: " +
                                             std::to_string(elem) + " >= " +
                                             std::to_string(obj.element_count) + " (block " +
                                             std::to_string(block) + ", thread " +
                                             std::to_string(thread) + ")");
                        out.push_back({block, thread, static_cast<std::uint16_t>(oidx), elem,
                                       elem * obj.element_size, a.is_write});
                    }
                    continue;
                }
                const std::uint64_t trips = k.trip_count(a);
                for (std::uint64_t i = 0; i < trips; ++i) {
                    auto lookup = [&](const std::string& s) -> std::optional<std::int64_t> {
                        if (s == "threadIdx.x") return tx;
                        if (s == "threadIdx.y") return ty;
                        if (s == "blockIdx.x") return bx;
                        if (s == "blockIdx.y") return by;
                        if (a.loop && s == a.loop->var) return static_cast<std::int64_t>(i);
                        return k.invocation_constant(s);
                    };
                    const std::int64_t idx = a.index.eval(lookup);
                    if (idx < 0 || static_cast<std::uint64_t>(idx) >= obj.element_count)
                        throw TraceError("index \"" + a.index.to_string() + "\" on '" + a.object +
                                         "' out of bounds: " + std::to_string(idx) + " (block " +
                                         std::to_string(block) + ", thread " +
                                         std::to_string(thread) + ")");
                    out.push_back({block, thread, static_cast<std::uint16_t>(oidx),
                                   static_cast<std::uint64_t>(idx),
                                   static_cast<std::uint64_t>(idx) * obj.element_size,
                                   a.is_write});
                }
            }
        }
    }
    return out;
}

std::vector<BlockFootprint> object_footprints(const KernelSpec& k, const std::string& object) {
    const std::uint16_t oidx = static_cast<std::uint16_t>(k.object_index(object));
    std::vector<BlockFootprint> fps(k.total_blocks());
    for (std::uint32_t b = 0; b < k.total_blocks(); ++b) {
        for (const auto& e : gen_trace(k, b)) {
            if (e.object != oidx) continue;
            auto& fp = fps[b];
            if (!fp.any()) {
                fp.min_byte = fp.max_byte = e.byte_offset;
            } else {
                fp.min_byte = std::min(fp.min_byte, e.byte_offset);
                fp.max_byte = std::max(fp.max_byte, e.byte_offset);
            }
            ++fp.accesses;
        }
    }
    return fps;
}

void write_trace_csv(std::ostream& os, const KernelSpec& k,
                     const std::vector<TraceEntry>& entries) {
    os << "block,thread,object,element_index,byte_offset,rw\n";
    for (const auto& e : entries)
        os << e.block << ',' << e.thread << ',' << k.objects[e.object].name << ','
           << e.element_index << ',' << e.byte_offset << ',' << (e.is_write ? 'w' : 'r') << '\n';
}

} // namespace coda::kmodel
