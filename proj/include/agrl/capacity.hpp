#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "agrl/mdp.hpp"
#include "agrl/policy.hpp"

namespace agrl {

// Deterministic MDP witnessing the spanning capacity, in tree form: every
// reachable history is its own state. labels[g-1][s] maps a witness state at
// layer g back to the universe state index whose action profile it carries,
// so policies over the original universe can be lifted onto the witness.
struct CapacityWitness {
  LayeredMdp mdp;
  std::vector<std::vector<int>> labels;
  int layer = 1;  // the layer whose cumulative reachability attains the value
};

struct CapacityResult {
  long long value = 0;
  std::vector<long long> per_layer;  // per_layer[h-1] = per-layer capacity
  CapacityWitness witness;
  std::uint64_t nodes_expanded = 0;
  bool exact = true;  // false when the node budget degraded it to a lower bound
};

// Number of distinct (state, action) pairs at layer h lying on some policy's
// rollout in a deterministic MDP (point-mass transitions and init required).
int cumulative_reachability(std::span<const Policy> members,
                            const LayeredMdp& det_mdp, int layer);
int cumulative_reachability(const PolicyClass& pc, const LayeredMdp& det_mdp,
                            int layer);

// Exact spanning capacity of the class, by memoized recursion over
// consistent-member sets with state choices quotiented by their action
// profiles. Exceeding the memo budget degrades the result to a certified
// lower bound (exact = false) instead of failing.
CapacityResult spanning_capacity(const PolicyClass& pc,
                                 std::uint64_t node_budget = 10'000'000);

// Coverability coefficient of the class on a fixed (stochastic) MDP:
// max_h sum_{s,a} sup_pi d^pi_h(s,a).
double coverability(std::span<const Policy> members, const LayeredMdp& mdp);
double coverability(const PolicyClass& pc, const LayeredMdp& mdp);

// Re-indexes a policy over the original universe onto the witness shape.
Policy lift_policy(const Policy& pi, const CapacityWitness& witness);
std::vector<Policy> lift_policies(const PolicyClass& pc,
                                  const CapacityWitness& witness);

}  // namespace agrl
