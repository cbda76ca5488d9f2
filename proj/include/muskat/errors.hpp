#pragma once

#include <stdexcept>
#include <string>

namespace muskat {

// Base class for every error raised by the simulator. `kind()` is a short
// stable tag that ends up in run summaries as the stop reason.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class InvalidInput : public Error {
public:
  explicit InvalidInput(const std::string& what) : Error("invalid-input", what) {}
};

class DegenerateSurface : public Error {
public:
  explicit DegenerateSurface(const std::string& what) : Error("degenerate-normal", what) {}
};

class SelfIntersection : public Error {
public:
  explicit SelfIntersection(const std::string& what) : Error("self-intersection", what) {}
};

class ResolutionError : public Error {
public:
  explicit ResolutionError(const std::string& what) : Error("resolution", what) {}
};

class NonConvergence : public Error {
public:
  NonConvergence(const std::string& what, double best_residual)
      : Error("omega-nonconvergence", what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

private:
  double best_residual_;
};

class RayleighTaylorViolation : public Error {
public:
  explicit RayleighTaylorViolation(const std::string& what)
      : Error("rayleigh-taylor", what) {}
};

class IsothermalizeFailure : public Error {
public:
  explicit IsothermalizeFailure(const std::string& what)
      : Error("isothermalize", what) {}
};

class FormatError : public Error {
public:
  FormatError(const std::string& what, std::size_t offset)
      : Error("format", what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class ConfigError : public Error {
public:
  ConfigError(const std::string& key, const std::string& what)
      : Error("config", "config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

}  // namespace muskat
