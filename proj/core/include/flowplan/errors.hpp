#pragma once

#include <stdexcept>
#include <string>

namespace flowplan {

/// Query outside the region a field, mesh or grid is defined on.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (CSV ingestion, incomplete lattices).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate or unbuildable triangulation.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear solve breakdown or a residual check that was not met.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// An iterative algorithm ran out of its iteration budget.
class IterationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration; carries the offending key and line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, int line, const std::string& what)
      : std::runtime_error(format(key, line, what)), key_(key), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& key, int line, const std::string& what) {
    std::string out = "config";
    if (line > 0) out += ":" + std::to_string(line);
    if (!key.empty()) out += ": '" + key + "'";
    return out + ": " + what;
  }

  std::string key_;
  int line_;
};

}  // namespace flowplan
