#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lxm {

/// Base of every error the library throws. `kind()` is a stable, lowercase
/// tag used by the CLI to produce machine-parsable error lines.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

class DecodeError : public Error {
 public:
  explicit DecodeError(const std::string& what) : Error("decode", what) {}
};

/// Malformed input file. `line()` is 1-based; 0 when the position is unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error("parse", source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class AnalysisError : public Error {
 public:
  explicit AnalysisError(const std::string& what) : Error("analysis", what) {}
};

class NumericError : public Error {
 public:
  NumericError(const std::string& what, int layer, int timestep)
      : Error("numeric", what), layer_(layer), timestep_(timestep) {}

  int layer() const noexcept { return layer_; }
  int timestep() const noexcept { return timestep_; }

 private:
  int layer_;
  int timestep_;
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error("contract", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace lxm
