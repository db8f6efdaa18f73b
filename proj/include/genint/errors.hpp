#pragma once

#include <stdexcept>
#include <string>

namespace genint {

// Error taxonomy shared by every module. Each failure mode the public API
// documents maps onto one of these types so callers (and tests) can
// distinguish contract violations from I/O trouble from numerical blowups.

struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IndexError : std::runtime_error {
    explicit IndexError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonFiniteError : std::runtime_error {
    explicit NonFiniteError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InsufficientDataError : std::runtime_error {
    explicit InsufficientDataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IdentifiabilityError : std::runtime_error {
    explicit IdentifiabilityError(const std::string& msg) : std::runtime_error(msg) {}
};

struct WeakInstrumentError : std::runtime_error {
    explicit WeakInstrumentError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DependencyError : std::runtime_error {
    explicit DependencyError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace genint
