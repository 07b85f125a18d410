#pragma once

#include <stdexcept>
#include <string>

namespace spl {

/// Bad configuration: malformed grammar/experiment files, invalid option values.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad or missing data: CSV problems, shape mismatches, non-finite trajectories.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Caller violated an operation precondition.
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace spl
