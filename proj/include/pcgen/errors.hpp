#pragma once

#include <stdexcept>
#include <string>

namespace pcgen {

// Error taxonomy mirrored by the C API status codes and CLI exit codes:
// config_error -> 2, numeric_error -> 3, io_error -> 4, anything else -> 1.

class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape/arity violations in the tensor core and geometry kernels.
class shape_error : public std::invalid_argument {
 public:
  explicit shape_error(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace pcgen
