#pragma once

#include <map>
#include <optional>
#include <vector>

#include "agrl/mdp.hpp"
#include "agrl/mrp.hpp"
#include "agrl/policy.hpp"
#include "agrl/sunflower.hpp"
#include "agrl/types.hpp"

namespace agrl {

// Trajectories collected through a given anchor state. Every stored
// trajectory visits the anchor at its layer (trivially so for s_top).
struct TrajDataset {
  StateId anchor;
  int requested = 0;
  std::vector<Trajectory> trajectories;

  int accepted() const { return static_cast<int>(trajectories.size()); }
};

// Runs `reacher` to the anchor's layer; on reaching the anchor exactly,
// switches to a core policy drawn uniformly and completes the episode.
// For s_top, reacher must be null and every attempt is accepted.
TrajDataset data_collector(const LayeredMdp& mdp, StateId s,
                           const Policy* reacher, const PolicyClass& core,
                           int n, RngStream& rng);

struct EdgeEstimate {
  double p = 0.0;
  double r = 0.0;
  long long violations = 0;  // weighted terms with no consistent core member
  bool empty_dataset = false;
};

// Importance-sampling estimate of one policy-specific MRP edge from the
// anchor's dataset. Terms whose denominator vanishes contribute 0 and are
// counted as violations.
EdgeEstimate estimate_edge(const TrajDataset& dataset, const PolicyClass& core,
                           const Policy& pi, const std::vector<StateId>& s_pi,
                           StateId s, StateId s_prime);

struct EmpiricalMrp {
  Mrp mrp;
  std::vector<long long> row_samples;  // |D_s| backing each node's row
  long long violations = 0;
  int core_size = 0;
};

// Assembles the empirical policy-specific MRP over S_pi U {s_top, s_bot}:
// rows for explored states come from estimate_edge; unexplored petal states
// route to s_bot with reward 0. Throws if an explored state has no dataset.
EmpiricalMrp build_empirical_mrp(
    const std::map<StateId, TrajDataset>& datasets, const PolicyClass& core,
    const Policy& pi, const std::vector<StateId>& s_pi,
    const std::vector<StateId>& s_rch);

// Population policy-specific MRP (the exact counterpart of
// build_empirical_mrp), computed by forward DP over the MDP with absorption
// at petal states.
Mrp exact_policy_mrp(const LayeredMdp& mdp, const Policy& pi,
                     const std::vector<StateId>& s_pi,
                     const std::vector<StateId>& s_rch);

struct PoplerOptions {
  double eps = 0.1;
  double delta = 0.1;
  // sample sizes; values <= 0 select the default schedule with constants
  // c1/c2
  long long n1 = 0;
  long long n2 = 0;
  double c1 = 1.0;
  double c2 = 1.0;
  // capacity upper bound used by the iteration cap; <= 0 computes it
  long long capacity_ub = 0;
};

struct PoplerReport {
  int best_index = -1;
  std::vector<double> v_hat;
  // identified (state, reacher member index) tuples; s_top carries index -1
  std::vector<std::pair<StateId, int>> reached;
  long long iterations = 0;
  long long violations = 0;
  std::vector<std::pair<StateId, int>> dataset_sizes;  // (anchor, accepted)
  long long n1 = 0, n2 = 0;
  long long trajectories_collected = 0;  // attempts, accepted or not
};

// The full algorithm: reachable-petal-state identification followed by
// evaluation of every member on its empirical MRP. Ties in the final argmax
// go to the lowest member index.
PoplerReport popler(const LayeredMdp& mdp, const PolicyClass& pc,
                    const SunflowerCert& cert, const PoplerOptions& opts,
                    RngStream& rng);

}  // namespace agrl
