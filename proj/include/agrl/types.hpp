#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace agrl {

// State identifier in a layered state space. Layer 0 holds the single virtual
// start state s_top and layer H+1 the single virtual end state s_bot; ordinary
// MDP states live in layers 1..H.
struct StateId {
  int layer = 0;
  int index = 0;

  friend auto operator<=>(const StateId&, const StateId&) = default;
};

inline StateId s_top() { return {0, 0}; }
inline StateId s_bot(int horizon) { return {horizon + 1, 0}; }

struct StateIdHash {
  std::size_t operator()(const StateId& s) const {
    return std::hash<std::uint64_t>{}(
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.layer)) << 32) |
        static_cast<std::uint32_t>(s.index));
  }
};

}  // namespace agrl
