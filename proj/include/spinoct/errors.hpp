#pragma once

#include <stdexcept>
#include <string>

namespace spinoct {

/// Invalid or inconsistent user input (config files, CLI arguments).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical procedure failed (propagation diverged, grid too coarse, ...).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spinoct
