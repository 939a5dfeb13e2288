#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "agrl/types.hpp"

namespace agrl {

// Markov reward process over a subset of layered states plus the virtual
// start state s_top (layer 0) and end state s_bot (layer H+1). Transitions
// and rewards are attached to edges; edges only connect a node to a node in a
// strictly greater layer, except for the mandatory s_bot self-loop
// (probability 1, reward 0).
//
// Exact (population) MRPs have every non-s_bot row summing to 1 within 1e-9.
// Empirical MRPs carry importance-weighted estimates: entries lie in
// [0, weight_bound] and rows need not sum to anything in particular.
class Mrp {
 public:
  enum class Flavor { kExact, kEmpirical };

  // nodes must contain s_top and s_bot; p[i][j] / r[i][j] are the edge values
  // from nodes[i] to nodes[j]. weight_bound is only used for empirical
  // validation (the core size K).
  Mrp(int horizon, std::vector<StateId> nodes,
      std::vector<std::vector<double>> p, std::vector<std::vector<double>> r,
      Flavor flavor = Flavor::kExact, double weight_bound = 1.0);

  int horizon() const { return horizon_; }
  Flavor flavor() const { return flavor_; }
  const std::vector<StateId>& nodes() const { return nodes_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int node_index(StateId s) const;  // -1 if absent
  int top_index() const { return top_; }
  int bot_index() const { return bot_; }
  double p(int from, int to) const { return p_[from][to]; }
  double r(int from, int to) const { return r_[from][to]; }
  double weight_bound() const { return weight_bound_; }

 private:
  int horizon_;
  std::vector<StateId> nodes_;
  std::vector<std::vector<double>> p_, r_;
  Flavor flavor_;
  double weight_bound_ = 1.0;
  int top_ = -1, bot_ = -1;
};

// Value of s_top after exactly H+1 synchronous sweeps of
//   V(s) <- sum_{s'} P_{s->s'} (r_{s->s'} + V(s')).
// The sweep count is exact for monotone-layer MRPs.
double mrp_value(const Mrp& mrp);

// Probability that a trajectory of the MRP visits `target`: first-passage DP
// with V(target) pinned to 1 through H+1 sweeps.
double mrp_reach_prob(const Mrp& mrp, StateId target);

// Expected number of visits to each node within H+1 hops from s_top
// (equals the reach probability for every node except s_bot).
std::vector<double> mrp_occupancy(const Mrp& mrp);

struct SimulationGap {
  double gap = 0.0;
  double bound = 0.0;
};

// gap = |V - V_hat|; bound = sum_s d(s) * sum_{s'} (|P-P_hat| + |r-r_hat|)
// with d computed on `exact`. Throws if the node sets differ.
SimulationGap simulation_gap_bound(const Mrp& exact, const Mrp& estimated);

// --- text format -------------------------------------------------------------

void write_mrp(std::ostream& os, const Mrp& mrp);
Mrp read_mrp(std::istream& is);
void save_mrp(const std::string& path, const Mrp& mrp);
Mrp load_mrp(const std::string& path);

}  // namespace agrl
