#pragma once

#include <stdexcept>
#include <string>

namespace svart {

// Base of every error raised by the library. The message is prefixed with the
// module that raised it so the CLI can surface it verbatim.
class Error : public std::runtime_error {
 public:
  Error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(module) {}
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error("data", "parse error at row " + std::to_string(row) + ", column " +
                          std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class FrequencyError : public Error {
 public:
  explicit FrequencyError(const std::string& what) : Error("data", what) {}
};

class SizingError : public Error {
 public:
  SizingError(const std::string& module, const std::string& what) : Error(module, what) {}
};

class DegenerateDataError : public Error {
 public:
  DegenerateDataError(const std::string& module, const std::string& what)
      : Error(module, what) {}
};

class NumericError : public Error {
 public:
  NumericError(const std::string& module, const std::string& what) : Error(module, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace svart
