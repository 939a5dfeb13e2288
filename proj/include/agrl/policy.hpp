#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agrl/types.hpp"

namespace agrl {

// Shape of the state/action space a policy class lives on: H layers with
// states_per_layer[h-1] states in layer h, and A actions everywhere.
struct PolicyUniverse {
  std::vector<int> states_per_layer;
  int action_count = 2;

  int horizon() const { return static_cast<int>(states_per_layer.size()); }
  int layer_size(int layer) const { return states_per_layer[layer - 1]; }
  bool uniform() const;
  bool contains(StateId s) const {
    return s.layer >= 1 && s.layer <= horizon() && s.index >= 0 &&
           s.index < layer_size(s.layer);
  }
  std::size_t total_states() const;

  friend bool operator==(const PolicyUniverse&, const PolicyUniverse&) = default;
};

// Deterministic Markovian policy: a dense action table per layer.
class Policy {
 public:
  Policy(std::shared_ptr<const PolicyUniverse> universe,
         std::vector<std::vector<std::uint8_t>> actions);

  int operator()(StateId s) const { return actions_[s.layer - 1][s.index]; }
  int action(int layer, int index) const { return actions_[layer - 1][index]; }
  const PolicyUniverse& universe() const { return *universe_; }
  std::shared_ptr<const PolicyUniverse> universe_ptr() const { return universe_; }
  const std::vector<std::vector<std::uint8_t>>& table() const { return actions_; }

  friend bool operator==(const Policy& a, const Policy& b) {
    return a.actions_ == b.actions_;
  }

 private:
  std::shared_ptr<const PolicyUniverse> universe_;
  std::vector<std::vector<std::uint8_t>> actions_;
};

enum class ClassTag {
  kSingleton,
  kLton,
  kOneActive,
  kAllActive,
  kTabular,
  kCbChain,
  kThreshold,
  kPiEll,
  kExplicit,
};

std::string tag_name(ClassTag tag);
std::optional<ClassTag> tag_from_name(const std::string& name);

// A finite, enumerable class of deterministic policies over a shared universe.
// Members are duplicate-free and the class is immutable after construction.
class PolicyClass {
 public:
  PolicyClass(std::shared_ptr<const PolicyUniverse> universe,
              std::vector<Policy> members, ClassTag tag = ClassTag::kExplicit,
              std::vector<long long> tag_params = {});

  const PolicyUniverse& universe() const { return *universe_; }
  std::shared_ptr<const PolicyUniverse> universe_ptr() const { return universe_; }
  const std::vector<Policy>& members() const { return members_; }
  const Policy& member(int i) const { return members_[i]; }
  int size() const { return static_cast<int>(members_.size()); }
  ClassTag tag() const { return tag_; }
  const std::vector<long long>& tag_params() const { return tag_params_; }

 private:
  std::shared_ptr<const PolicyUniverse> universe_;
  std::vector<Policy> members_;
  ClassTag tag_;
  std::vector<long long> tag_params_;
};

// True iff pi agrees with every (state, action) pair of the partial
// trajectory. States must have strictly increasing layers and lie in the
// policy's universe.
bool consistent(const Policy& pi,
                std::span<const std::pair<StateId, int>> partial);

// --- constructive builders -------------------------------------------------

// K*H members; member (i,h) plays 1 on s_(i,h) and 0 everywhere else.
PolicyClass build_singletons(int k, int h);

// Members pi_I(s) = 1{s in I} for every subset I of the universe with
// |I| <= ell (the empty set included).
PolicyClass build_ltons(int k, int h, int ell);

// 2^H members, free only on the states of column j=1.
PolicyClass build_one_active(int k, int h);

// Union of the one-active families over every column, duplicates removed.
PolicyClass build_all_active(int k, int h);

// All A^(K*H) deterministic policies. Refuses classes above 10^6 members.
PolicyClass build_tabular(int k, int h, int a);

// A^H members, constant action per layer (H-layer contextual bandit chains).
// The universe uses A^(H-1) states per layer; constant policies do not
// distinguish states, so the class itself is label-indifferent.
PolicyClass build_cb_chain(int h, int a);

// K stationary members pi_i(s_(j,h)) = 1{j >= i} (indices 1-based).
PolicyClass build_threshold(int k, int h);

// --- text format -------------------------------------------------------------

void write_policy_class(std::ostream& os, const PolicyClass& pc);
PolicyClass read_policy_class(std::istream& is);
void save_policy_class(const std::string& path, const PolicyClass& pc);
PolicyClass load_policy_class(const std::string& path);

}  // namespace agrl
