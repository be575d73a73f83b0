#pragma once

#include <stdexcept>
#include <string>

namespace coda {

// Error taxonomy mirrors the CLI exit codes: config 2, capacity 3, trace 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

struct TraceError : std::runtime_error {
    explicit TraceError(const std::string& what) : std::runtime_error(what) {}
};

struct PageFaultError : TraceError {
    explicit PageFaultError(const std::string& what) : TraceError(what) {}
};

// Internal consistency violations (double free, mixed-mode page group, ...).
struct InvariantError : std::logic_error {
    explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

} // namespace coda
