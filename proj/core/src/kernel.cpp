#include "coda/kernel.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "coda/errors.hpp"

namespace coda::kmodel {

namespace {

const std::set<std::string> kBuiltinSyms = {
    "threadIdx.x", "threadIdx.y", "blockIdx.x", "blockIdx.y",
    "blockDim.x",  "blockDim.y",  "gridDim.x",  "gridDim.y",
};

Dim2 dim_from_json(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || j.size() > 2) {
        if (j.is_array() && j.size() == 3)
            throw ConfigError(field + ": 3-D grids/blocks are not supported");
        throw ConfigError(field + ": expected [x] or [x, y]");
    }
    Dim2 d;
    d.x = j.at(0).get<std::uint32_t>();
    d.y = j.size() > 1 ? j.at(1).get<std::uint32_t>() : 1;
    return d;
}

} // namespace

const ObjectSpec* KernelSpec::find_object(const std::string& name) const {
    for (const auto& o : objects)
        if (o.name == name) return &o;
    return nullptr;
}

std::size_t KernelSpec::object_index(const std::string& name) const {
    for (std::size_t i = 0; i < objects.size(); ++i)
        if (objects[i].name == name) return i;
    throw ConfigError("unknown object '" + name + "' in kernel " + this->name);
}

std::optional<std::int64_t> KernelSpec::invocation_constant(const std::string& sym) const {
    if (sym == "blockDim.x") return block.x;
    if (sym == "blockDim.y") return block.y;
    if (sym == "gridDim.x") return grid.x;
    if (sym == "gridDim.y") return grid.y;
    auto it = params.find(sym);
    if (it != params.end()) return it->second;
    return std::nullopt;
}

std::uint64_t KernelSpec::trip_count(const AccessExpr& a) const {
    if (!a.loop) return 1;
    const std::int64_t trips = a.loop->count.eval([&](const std::string& s) {
        return invocation_constant(s);
    });
    if (trips < 0)
        throw ConfigError("loop bound for '" + a.loop->var + "' evaluates to " +
                          std::to_string(trips));
    return static_cast<std::uint64_t>(trips);
}

void KernelSpec::validate() const {
    if (grid.x < 1 || grid.y < 1) throw ConfigError(name + ": grid dims must be >= 1");
    if (block.x < 1 || block.y < 1) throw ConfigError(name + ": block dims must be >= 1");
    std::set<std::string> names;
    for (const auto& o : objects) {
        if (o.name.empty()) throw ConfigError(name + ": object with empty name");
        if (!names.insert(o.name).second)
            throw ConfigError(name + ": duplicate object '" + o.name + "'");
        if (o.element_size != 1 && o.element_size != 2 && o.element_size != 4 &&
            o.element_size != 8)
            throw ConfigError(name + ": object '" + o.name + "' element_size must be 1/2/4/8");
        if (o.element_count < 1)
            throw ConfigError(name + ": object '" + o.name + "' element_count must be >= 1");
    }
    for (const auto& a : accesses) {
        if (!find_object(a.object))
            throw ConfigError(name + ": access references undeclared object '" + a.object + "'");
        if (a.is_ranged()) {
            if (a.ranged->start_elem.size() != total_blocks() ||
                a.ranged->elem_count.size() != total_blocks())
                throw ConfigError(name + ": ranged access on '" + a.object +
                                  "' must provide one (start, count) per block");
            continue;
        }
        std::vector<std::string> syms;
        a.index.collect_symbols(syms);
        for (const auto& s : syms) {
            const bool builtin = kBuiltinSyms.count(s) > 0;
            const bool param = params.count(s) > 0;
            const bool loopvar = a.loop && a.loop->var == s;
            if (!builtin && !param && !loopvar)
                throw ConfigError(name + ": undeclared symbol '" + s + "' in index expression \"" +
                                  a.index.to_string() + "\"");
        }
        if (a.loop) {
            std::vector<std::string> bsyms;
            a.loop->count.collect_symbols(bsyms);
            for (const auto& s : bsyms) {
                if (s == "threadIdx.x" || s == "threadIdx.y" || s == "blockIdx.x" ||
                    s == "blockIdx.y" || (a.loop && s == a.loop->var))
                    throw ConfigError(name + ": loop bound must be an invocation constant, uses '" +
                                      s + "'");
                if (!kBuiltinSyms.count(s) && !params.count(s))
                    throw ConfigError(name + ": undeclared symbol '" + s + "' in loop bound");
            }
        }
    }
}

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
    KernelSpec k;
    k.name = j.value("name", "kernel");
    k.grid = dim_from_json(j.at("grid_dim"), k.name + ".grid_dim");
    k.block = dim_from_json(j.at("block_dim"), k.name + ".block_dim");
    if (j.contains("params"))
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it)
            k.params[it.key()] = it.value().get<std::int64_t>();
    for (const auto& jo : j.value("objects", nlohmann::json::array())) {
        ObjectSpec o;
        o.name = jo.at("name").get<std::string>();
        o.element_size = jo.value("element_size", 4u);
        o.element_count = jo.at("element_count").get<std::uint64_t>();
        o.init_by_host = jo.value("init_by_host", true);
        k.objects.push_back(std::move(o));
    }
    for (const auto& ja : j.value("accesses", nlohmann::json::array())) {
        AccessExpr a;
        a.object = ja.at("object").get<std::string>();
        a.is_write = ja.value("rw", "r") == "w";
        if (ja.contains("ranges")) {
            RangedTable t;
            for (const auto& r : ja["ranges"]) {
                t.start_elem.push_back(r.at(0).get<std::uint64_t>());
                t.elem_count.push_back(r.at(1).get<std::uint64_t>());
            }
            a.ranged = std::move(t);
        } else {
            a.index = Expr::parse(ja.at("index").get<std::string>());
            if (ja.contains("loop")) {
                LoopSpec l;
                l.var = ja["loop"].at("var").get<std::string>();
                l.count = Expr::parse(ja["loop"].at("count").get<std::string>());
                a.loop = std::move(l);
            }
        }
        k.accesses.push_back(std::move(a));
    }
    k.validate();
    return k;
}

KernelSpec KernelSpec::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open kernel spec file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("kernel spec " + path + ": " + e.what());
    }
    try {
        return from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("kernel spec " + path + ": " + e.what());
    }
}

nlohmann::json KernelSpec::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["grid_dim"] = {grid.x, grid.y};
    j["block_dim"] = {block.x, block.y};
    j["params"] = params;
    j["objects"] = nlohmann::json::array();
    for (const auto& o : objects)
        j["objects"].push_back({{"name", o.name},
                                {"element_size", o.element_size},
                                {"element_count", o.element_count},
                                {"init_by_host", o.init_by_host}});
    j["accesses"] = nlohmann::json::array();
    for (const auto& a : accesses) {
        nlohmann::json ja;
        ja["object"] = a.object;
        ja["rw"] = a.is_write ? "w" : "r";
        if (a.is_ranged()) {
            nlohmann::json ranges = nlohmann::json::array();
            for (std::size_t b = 0; b < a.ranged->start_elem.size(); ++b)
                ranges.push_back({a.ranged->start_elem[b], a.ranged->elem_count[b]});
            ja["ranges"] = std::move(ranges);
        } else {
            ja["index"] = a.index.to_string();
            if (a.loop) ja["loop"] = {{"var", a.loop->var}, {"count", a.loop->count.to_string()}};
        }
        j["accesses"].push_back(std::move(ja));
    }
    return j;
}

const ObjectLayout::Entry& ObjectLayout::entry(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw ConfigError("object '" + name + "' not in layout");
}

std::uint64_t ObjectLayout::total_pages() const {
    std::uint64_t n = 0;
    for (const auto& e : entries) n += e.pages;
    return n;
}

std::vector<std::uint64_t> ObjectLayout::start_vas(const KernelSpec& k) const {
    std::vector<std::uint64_t> out;
    out.reserve(k.objects.size());
    for (const auto& o : k.objects) out.push_back(entry(o.name).start_va);
    return out;
}

ObjectLayout build_layout(const std::vector<KernelSpec>& kernels, std::uint64_t page_size) {
    ObjectLayout layout;
    layout.page_size = page_size;
    std::uint64_t va = 0;
    for (const auto& k : kernels) {
        for (const auto& o : k.objects) {
            bool seen = false;
            for (auto& e : layout.entries) {
                if (e.name != o.name) continue;
                seen = true;
                if (e.bytes != o.bytes())
                    throw ConfigError("object '" + o.name +
                                      "' declared with conflicting sizes across kernels");
            }
            if (seen) continue;
            ObjectLayout::Entry e;
            e.name = o.name;
            e.start_va = va;
            e.bytes = o.bytes();
            e.pages = (e.bytes + page_size - 1) / page_size;
            va += e.pages * page_size;
            layout.entries.push_back(std::move(e));
        }
    }
    return layout;
}

} // namespace coda::kmodel
