#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "agrl/mdp.hpp"
#include "agrl/policy.hpp"
#include "agrl/rng.hpp"

namespace agrl {

// Generative (local access) simulator around a LayeredMdp: one (s', r) draw
// per query, with a query counter.
class GenerativeOracle {
 public:
  GenerativeOracle(const LayeredMdp& mdp, RngStream& rng)
      : mdp_(&mdp), rng_(&rng) {}

  // Draws s' ~ P(.|s,a) and r ~ R(s,a); the next-state index is -1 at the
  // last layer.
  std::pair<int, double> query(int layer, int state, int action) {
    ++queries_;
    double r = mdp_->reward(layer, state, action).sample(*rng_);
    int next = -1;
    if (layer < mdp_->horizon())
      next = rng_->categorical(mdp_->transition(layer, state, action));
    return {next, r};
  }

  // Root draws are not generative queries.
  int sample_init() { return rng_->categorical(mdp_->init()); }

  const LayeredMdp& mdp() const { return *mdp_; }
  long long query_count() const { return queries_; }

 private:
  const LayeredMdp* mdp_;
  RngStream* rng_;
  long long queries_ = 0;
};

struct IsResult {
  int best_index = -1;
  std::vector<double> v_hat;
};

// Classical importance sampling: n episodes under uniformly random action
// sequences, reweighted by A^H on consistency. Rejects H*log2(A) > 40.
IsResult importance_sampling(const LayeredMdp& mdp, const PolicyClass& pc,
                             int n, RngStream& rng);

struct TrajTreeResult {
  int best_index = -1;
  std::vector<double> v_hat;
  long long query_count = 0;      // total generative queries
  long long max_tree_queries = 0;  // largest single-tree query count
  // one sorted edge list (layer, state, action, next) per tree; rewards are
  // excluded so deterministic-transition instances compare equal
  std::vector<std::vector<std::array<int, 4>>> topologies;
};

// Trajectory-tree evaluation: builds n trees by sampling, breadth-first over
// layers and lowest member index first, every (s,a) pair reachable by some
// member within the current tree; every member is then scored on all trees.
TrajTreeResult trajectory_tree(GenerativeOracle& oracle, const PolicyClass& pc,
                               int n);

}  // namespace agrl
