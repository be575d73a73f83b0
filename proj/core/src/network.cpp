#include "coda/network.hpp"

#include "coda/errors.hpp"

namespace coda::sim {

const char* to_string(AccessClass c) {
    switch (c) {
        case AccessClass::Local: return "local";
        case AccessClass::Remote: return "remote";
        case AccessClass::Host: return "host";
    }
    return "?";
}

void NetworkModel::validate() const {
    if (local_bw <= 0 || host_bw <= 0 || remote_bw <= 0)
        throw ConfigError("network bandwidths must be positive");
    if (local_lat < 0 || host_lat < 0 || remote_lat < 0)
        throw ConfigError("network latencies must be nonnegative");
    if (host_mlp == 0) throw ConfigError("host_mlp must be >= 1");
}

AccessClass classify(const Issuer& issuer, addrmap::PhysAddr pa, addrmap::Granularity g,
                     const addrmap::MappingConfig& cfg) {
    if (issuer.is_host) return AccessClass::Host;
    const auto loc = addrmap::decode(pa, g, cfg);
    return loc.stack_id == issuer.stack ? AccessClass::Local : AccessClass::Remote;
}

} // namespace coda::sim
