#pragma once

#include <stdexcept>
#include <string>

namespace patret {

// Invalid input: malformed files, schema mismatches, violated preconditions.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A broken internal invariant. Indicates a bug rather than bad input.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace patret
