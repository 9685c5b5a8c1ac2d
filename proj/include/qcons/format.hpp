#pragma once

#include <charconv>
#include <string>

namespace qcons {

/// Shortest round-trip decimal representation.
inline std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace qcons
