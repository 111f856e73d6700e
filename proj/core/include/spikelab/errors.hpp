#pragma once

#include <stdexcept>
#include <string>

namespace spikelab {

// Invalid or inconsistent user input (config file, CLI flags, bad parameters).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine failed to converge or could not bracket a solution.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spikelab
