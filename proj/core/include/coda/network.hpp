#pragma once

#include <cstdint>

#include "coda/addrmap.hpp"

namespace coda::sim {

// Aggregate bandwidth/latency view of the three networks. local_bw is per
// stack; host_bw and remote_bw are system aggregates whose per-stack shares
// should normally satisfy Local > Host > Remote.
struct NetworkModel {
    double local_bw = 64;  // bytes/cycle per stack
    double host_bw = 128;  // bytes/cycle aggregate
    double remote_bw = 16; // bytes/cycle aggregate
    double local_lat = 100;
    double host_lat = 300;
    double remote_lat = 500;
    std::uint32_t host_mlp = 32; // outstanding host requests per model step

    static NetworkModel from_gbps(double local_total_gbps, double host_gbps, double remote_gbps,
                                  double clock_ghz, std::uint32_t num_stacks) {
        NetworkModel n;
        n.local_bw = local_total_gbps / clock_ghz / num_stacks;
        n.host_bw = host_gbps / clock_ghz;
        n.remote_bw = remote_gbps / clock_ghz;
        return n;
    }

    bool ordering_ok(std::uint32_t num_stacks) const {
        const double host_share = host_bw / num_stacks;
        const double remote_share = remote_bw / num_stacks;
        return local_bw > host_share && host_share > remote_share;
    }

    void validate() const;
};

enum class AccessClass : std::uint8_t { Local, Remote, Host };

const char* to_string(AccessClass c);

struct Issuer {
    bool is_host = false;
    std::uint32_t stack = 0; // valid when !is_host
};

AccessClass classify(const Issuer& issuer, addrmap::PhysAddr pa, addrmap::Granularity g,
                     const addrmap::MappingConfig& cfg);

} // namespace coda::sim
