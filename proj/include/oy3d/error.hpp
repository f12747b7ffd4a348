#pragma once

#include <stdexcept>
#include <string>

namespace oy3d {

// Bad or inconsistent input data (malformed files, out-of-range indices,
// dimension mismatches). The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem-level failures (missing file, unwritable path).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace oy3d
