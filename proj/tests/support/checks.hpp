#pragma once

#include <optional>

#include "capflow/error.hpp"

namespace capflow::testing {

/// Kind of the capflow::Error thrown by fn, or nullopt when it returns.
template <class Fn>
std::optional<ErrorKind> error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace capflow::testing
