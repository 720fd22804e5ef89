#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace scramble {

// Every failure raised by the library carries the name of the module that
// produced it, so the CLI can print "module: message" without guessing.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error("treebank-io", "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-fatal problems are collected here when the caller cares; otherwise they
// go to stderr.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(const std::string& message);
};

void warn(Diagnostics* diag, const std::string& message);

}  // namespace scramble
