#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace fusion_track {

// Invalid configuration value. field() names the offending key, e.g. "noise.sigma_range_m".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& constraint)
      : std::invalid_argument(field + ": " + constraint), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Vehicle and base station coincide, so range/azimuth derivatives are undefined.
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Violated call contract (e.g. measurement batch stamped with the wrong epoch).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class TopologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite state or singular innovation covariance. block() names the observation
// block at fault when known; epoch() is filled in by the runner.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, std::string block = {},
                        std::optional<std::int64_t> epoch = std::nullopt)
      : std::runtime_error(what), block_(std::move(block)), epoch_(epoch) {}

  const std::string& block() const noexcept { return block_; }
  std::optional<std::int64_t> epoch() const noexcept { return epoch_; }

 private:
  std::string block_;
  std::optional<std::int64_t> epoch_;
};

}  // namespace fusion_track
