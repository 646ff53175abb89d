#pragma once

#include <stdexcept>
#include <string>

namespace bgsol {

// Thrown when a resource guard trips (state-space caps, search budgets).
// Contract violations on arguments throw std::invalid_argument instead.
struct guard_error : std::runtime_error {
  explicit guard_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bgsol
