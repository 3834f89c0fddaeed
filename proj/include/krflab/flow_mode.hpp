#pragma once

#include <stdexcept>
#include <string>

namespace krflab {

enum class FlowMode { unnormalized, normalized };

inline const char* mode_name(FlowMode m) { return m == FlowMode::normalized ? "normalized" : "unnormalized"; }

inline FlowMode parse_mode(const std::string& s) {
  if (s == "unnormalized") return FlowMode::unnormalized;
  if (s == "normalized") return FlowMode::normalized;
  throw std::invalid_argument("mode must be 'unnormalized' or 'normalized', got '" + s + "'");
}

}  // namespace krflab
