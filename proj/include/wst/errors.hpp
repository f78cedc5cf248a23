#pragma once

#include <stdexcept>
#include <string>

namespace wst {

/// Input data is malformed or violates a documented precondition
/// (bad CSV cell, month gap, negative rainfall, length too short).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A model failed to estimate, converge, or produce finite output.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad flag combination, unknown config key, or unparseable config value.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace wst
