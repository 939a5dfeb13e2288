#pragma once

#include <stdexcept>
#include <string>

namespace agrl {

// Search/sampling budget or guard exceeded; callers map this to exit code 2.
struct GuardExceeded : std::runtime_error {
  explicit GuardExceeded(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace agrl
