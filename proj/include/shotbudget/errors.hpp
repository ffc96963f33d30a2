#pragma once

#include <stdexcept>
#include <string>

namespace shotbudget {

// Thrown for bad user-facing inputs (config files, CLI parameters, malformed
// descriptors). Mapped to exit code 2 at the CLI boundary.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a mathematical invariant fails (non-normalized state,
// non-Hermitian matrix, eigensolver breakdown). Mapped to exit code 3.
struct InvariantError : std::runtime_error {
    explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace shotbudget
