#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xrisk {

// Base class for every data/contract failure raised by the toolkit. The CLI
// maps anything derived from Error to exit status 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class LabelError : public Error {
 public:
  using Error::Error;
};

class ValueError : public Error {
 public:
  using Error::Error;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(const std::string& id)
      : Error("duplicate id '" + id + "'"), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

// A score set lacks one of the two classes.
class DegenerateSetError : public Error {
 public:
  explicit DegenerateSetError(const std::string& missing_class)
      : Error("degenerate score set: no " + missing_class + " samples"),
        missing_(missing_class) {}
  const std::string& missing_class() const noexcept { return missing_; }

 private:
  std::string missing_;
};

// Precondition violated by the caller (shape mismatch, bad index, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParamMismatchError : public Error {
 public:
  using Error::Error;
};

class UnattainablePrecisionError : public Error {
 public:
  UnattainablePrecisionError(double requested, double max_attainable)
      : Error("no threshold reaches precision " + std::to_string(requested) +
              " (max attainable " + std::to_string(max_attainable) + ")"),
        max_attainable_(max_attainable) {}
  double max_attainable() const noexcept { return max_attainable_; }

 private:
  double max_attainable_;
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(std::size_t epoch)
      : Error("objective became non-finite at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

class DegenerateSequenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace xrisk
