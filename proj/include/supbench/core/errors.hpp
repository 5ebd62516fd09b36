#pragma once

#include <stdexcept>
#include <string>

namespace supbench {

// Bad input: malformed config, unknown key, invalid argument. CLI exit 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure while executing an otherwise valid request. CLI exit 2.
class ExecutionError : public std::runtime_error {
 public:
  explicit ExecutionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace supbench
