#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "agrl/policy.hpp"
#include "agrl/rng.hpp"
#include "agrl/types.hpp"

namespace agrl {

// Reward distribution attached to a (state, action) pair. Restricted to point
// masses and Bernoulli so that expected values stay closed-form.
struct RewardDist {
  enum class Kind { kPoint, kBernoulli };
  Kind kind = Kind::kPoint;
  double value = 0.0;  // point mass value, or Bernoulli success probability

  static RewardDist point(double v) { return {Kind::kPoint, v}; }
  static RewardDist bernoulli(double p) { return {Kind::kBernoulli, p}; }

  double mean() const { return value; }
  // largest value in the support, used by the cumulative-reward audit
  double max_support() const {
    return kind == Kind::kPoint ? value : (value > 0.0 ? 1.0 : 0.0);
  }
  double sample(RngStream& rng) const {
    return kind == Kind::kPoint ? value : (rng.bernoulli(value) ? 1.0 : 0.0);
  }

  friend bool operator==(const RewardDist&, const RewardDist&) = default;
};

// Layered tabular MDP. Trajectories live in layers 1..H; transitions are
// defined for layers 1..H-1 and rewards for layers 1..H. Immutable after
// construction; construction validates that
//   - every transition row and the initial distribution sums to 1 within 1e-9
//     (rows inside tolerance are renormalized, outside are rejected),
//   - rewards have support in [0,1],
//   - no dynamics-consistent path can accumulate more than 1 total reward.
class LayeredMdp {
 public:
  // transitions[h-1][s][a] is the probability vector over layer h+1 states,
  // for h in 1..H-1. rewards[h-1][s][a] for h in 1..H.
  LayeredMdp(std::vector<int> states_per_layer, int action_count,
             std::vector<std::vector<std::vector<std::vector<double>>>> transitions,
             std::vector<std::vector<std::vector<RewardDist>>> rewards,
             std::vector<double> init);

  int horizon() const { return static_cast<int>(states_per_layer_.size()); }
  int action_count() const { return action_count_; }
  const std::vector<int>& states_per_layer() const { return states_per_layer_; }
  int layer_size(int layer) const { return states_per_layer_[layer - 1]; }

  std::span<const double> transition(int layer, int state, int action) const {
    return transitions_[layer - 1][state][action];
  }
  const RewardDist& reward(int layer, int state, int action) const {
    return rewards_[layer - 1][state][action];
  }
  std::span<const double> init() const { return init_; }

  // True iff the initial distribution and every transition row are point
  // masses.
  bool deterministic_transitions() const;

  // matches the policy-universe shape used by PolicyClass
  PolicyUniverse universe() const {
    return PolicyUniverse{states_per_layer_, action_count_};
  }

 private:
  std::vector<int> states_per_layer_;
  int action_count_;
  std::vector<std::vector<std::vector<std::vector<double>>>> transitions_;
  std::vector<std::vector<std::vector<RewardDist>>> rewards_;
  std::vector<double> init_;
};

struct TrajectoryStep {
  int state = 0;  // index within its layer; the layer is the position + 1
  int action = 0;
  double reward = 0.0;
};

// One episode: steps[h-1] happened at layer h.
using Trajectory = std::vector<TrajectoryStep>;

// Exact occupancy measures d^pi_h(s) and d^pi_h(s,a).
struct OccupancyTable {
  // state_[h-1][s] = d^pi_h(s); state_action_[h-1][s][a] = d^pi_h(s,a)
  std::vector<std::vector<double>> state;
  std::vector<std::vector<std::vector<double>>> state_action;

  double at(int layer, int s) const { return state[layer - 1][s]; }
  double at(int layer, int s, int a) const {
    return state_action[layer - 1][s][a];
  }
};

// Samples one episode of `mdp` under `policy`. Deterministic given the rng
// stream state.
Trajectory sample_trajectory(const LayeredMdp& mdp, const Policy& policy,
                             RngStream& rng);

// V^pi = E_{s1~mu} V^pi_1(s1), by backward dynamic programming.
double exact_policy_value(const LayeredMdp& mdp, const Policy& policy);

// Forward-DP occupancies of `policy` on `mdp`.
OccupancyTable occupancy(const LayeredMdp& mdp, const Policy& policy);

// --- text format -------------------------------------------------------------

void write_mdp(std::ostream& os, const LayeredMdp& mdp);
LayeredMdp read_mdp(std::istream& is);
void save_mdp(const std::string& path, const LayeredMdp& mdp);
LayeredMdp load_mdp(const std::string& path);

}  // namespace agrl
