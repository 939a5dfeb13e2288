#include "agrl/capacity.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace agrl {

namespace {

int point_mass_index(std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i)
    if (row[i] == 1.0) return static_cast<int>(i);
  throw std::invalid_argument("expected a point-mass distribution");
}

// ---- member-set bitsets ------------------------------------------------------

using Bits = std::vector<std::uint64_t>;

Bits full_set(int n) {
  Bits b((n + 63) / 64, ~0ull);
  if (n % 64) b.back() = (1ull << (n % 64)) - 1;
  return b;
}

bool empty_set(const Bits& b) {
  for (std::uint64_t w : b)
    if (w) return false;
  return true;
}

struct MemoKey {
  Bits v;
  int layer;
  int target;
  bool operator==(const MemoKey&) const = default;
};

struct MemoKeyHash {
  std::size_t operator()(const MemoKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t x) {
      h ^= x;
      h *= 0x100000001b3ull;
    };
    for (std::uint64_t w : k.v) mix(w);
    mix(static_cast<std::uint64_t>(k.layer) << 32 |
        static_cast<std::uint32_t>(k.target));
    return static_cast<std::size_t>(h);
  }
};

// Recursion state shared across the per-layer computations.
struct CapacitySearch {
  const PolicyClass& pc;
  std::uint64_t budget;
  std::uint64_t expanded = 0;
  bool exceeded = false;
  std::unordered_map<MemoKey, long long, MemoKeyHash> memo;

  int members() const { return pc.size(); }
  int actions() const { return pc.universe().action_count; }

  // action of member m on state (layer g, index s)
  int act(int m, int g, int s) const { return pc.member(m).action(g, s); }

  // Groups the layer's states by their action column restricted to V.
  // Returns (column, representative state) pairs, keyed by column so the
  // lexicographically smallest representative is kept.
  std::map<std::vector<std::uint8_t>, int> columns(const Bits& v, int g) const {
    std::map<std::vector<std::uint8_t>, int> groups;
    const int n = members();
    for (int s = 0; s < pc.universe().layer_size(g); ++s) {
      std::vector<std::uint8_t> col;
      col.reserve(n);
      for (int m = 0; m < n; ++m)
        if (v[m / 64] >> (m % 64) & 1)
          col.push_back(static_cast<std::uint8_t>(act(m, g, s)));
      groups.try_emplace(std::move(col), s);
    }
    return groups;
  }

  // Splits V by the action each member takes on the representative state.
  std::vector<Bits> split(const Bits& v, int g, int s) const {
    std::vector<Bits> parts(actions(), Bits(v.size(), 0));
    for (int m = 0; m < members(); ++m)
      if (v[m / 64] >> (m % 64) & 1) {
        int a = act(m, g, s);
        parts[a][m / 64] |= 1ull << (m % 64);
      }
    return parts;
  }

  long long solve(const Bits& v, int g, int target) {
    if (exceeded) return greedy(v, g, target);
    MemoKey key{v, g, target};
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    if (++expanded > budget) {
      exceeded = true;
      return greedy(v, g, target);
    }
    long long best = 0;
    for (const auto& [col, s] : columns(v, g)) {
      long long val = 0;
      for (const Bits& part : split(v, g, s)) {
        if (empty_set(part)) continue;
        val += (g == target) ? 1 : solve(part, g + 1, target);
      }
      best = std::max(best, val);
    }
    memo.emplace(std::move(key), best);
    return best;
  }

  // Budget-free fallback: descends a single state choice per node (the one
  // with the most distinct actions), which realizes one particular tree and
  // therefore certifies a lower bound.
  long long greedy(const Bits& v, int g, int target) {
    int best_s = 0;
    int best_branches = -1;
    for (const auto& [col, s] : columns(v, g)) {
      std::set<std::uint8_t> acts(col.begin(), col.end());
      if (static_cast<int>(acts.size()) > best_branches) {
        best_branches = static_cast<int>(acts.size());
        best_s = s;
      }
    }
    long long val = 0;
    for (const Bits& part : split(v, g, best_s)) {
      if (empty_set(part)) continue;
      val += (g == target) ? 1 : greedy(part, g + 1, target);
    }
    return val;
  }

  // Re-walks the solved recursion picking, at every node, the maximizing
  // column; ties go to the lexicographically smallest column (then the
  // smallest representative state index, which the column grouping already
  // guarantees).
  int best_state(const Bits& v, int g, int target, long long want) {
    for (const auto& [col, s] : columns(v, g)) {
      long long val = 0;
      for (const Bits& part : split(v, g, s)) {
        if (empty_set(part)) continue;
        val += (g == target) ? 1 : solve(part, g + 1, target);
      }
      if (val == want) return s;
    }
    throw std::logic_error("capacity witness reconstruction lost the optimum");
  }
};

}  // namespace

int cumulative_reachability(std::span<const Policy> members,
                            const LayeredMdp& det_mdp, int layer) {
  if (!det_mdp.deterministic_transitions())
    throw std::invalid_argument(
        "cumulative_reachability: MDP must be deterministic");
  if (layer < 1 || layer > det_mdp.horizon())
    throw std::invalid_argument("cumulative_reachability: bad layer");
  std::set<std::pair<int, int>> reached;
  for (const Policy& pi : members) {
    int s = point_mass_index(det_mdp.init());
    for (int g = 1; g < layer; ++g)
      s = point_mass_index(det_mdp.transition(g, s, pi.action(g, s)));
    reached.insert({s, pi.action(layer, s)});
  }
  return static_cast<int>(reached.size());
}

int cumulative_reachability(const PolicyClass& pc, const LayeredMdp& det_mdp,
                            int layer) {
  if (!(pc.universe() == det_mdp.universe()))
    throw std::invalid_argument("cumulative_reachability: universe mismatch");
  return cumulative_reachability(std::span(pc.members()), det_mdp, layer);
}

namespace {

// Expands the witness tree for the solved recursion into a deterministic
// LayeredMdp. Tree nodes keep their universe label so policies can be lifted.
CapacityWitness build_witness(CapacitySearch& search, int target) {
  const PolicyUniverse& u = search.pc.universe();
  const int horizon = u.horizon();

  struct Node {
    Bits v;
    int label;
  };
  std::vector<std::vector<Node>> tree(horizon);
  std::vector<std::vector<std::array<int, 2>>> edges;  // filled per layer below

  Bits all = full_set(search.pc.size());
  long long root_val = search.solve(all, 1, target);
  tree[0].push_back({all, search.best_state(all, 1, target, root_val)});

  std::vector<std::vector<std::vector<int>>> child(
      horizon);  // child[g-1][node][action] -> node id in layer g+1, -1 = sink
  for (int g = 1; g <= horizon; ++g) {
    child[g - 1].assign(tree[g - 1].size(),
                        std::vector<int>(u.action_count, -1));
    if (g == horizon) break;
    for (std::size_t i = 0; i < tree[g - 1].size(); ++i) {
      Node& node = tree[g - 1][i];
      if (g >= target) continue;  // below the target layer nothing matters
      auto parts = search.split(node.v, g, node.label);
      for (int a = 0; a < u.action_count; ++a) {
        if (empty_set(parts[a])) continue;
        long long val = search.solve(parts[a], g + 1, target);
        int lbl = search.best_state(parts[a], g + 1, target, val);
        child[g - 1][i][a] = static_cast<int>(tree[g].size());
        tree[g].push_back({parts[a], lbl});
      }
    }
    if (tree[g].empty()) tree[g].push_back({Bits(all.size(), 0), 0});
  }

  // Assemble the MDP: per layer, tree nodes first, then one sink state.
  std::vector<int> sizes(horizon);
  std::vector<std::vector<int>> labels(horizon);
  for (int g = 1; g <= horizon; ++g) {
    const bool needs_sink = g > 1;
    sizes[g - 1] = static_cast<int>(tree[g - 1].size()) + (needs_sink ? 1 : 0);
    for (const Node& n : tree[g - 1]) labels[g - 1].push_back(n.label);
    if (needs_sink) labels[g - 1].push_back(0);
  }

  std::vector<std::vector<std::vector<std::vector<double>>>> trans(horizon - 1);
  for (int g = 1; g < horizon; ++g) {
    trans[g - 1].assign(sizes[g - 1],
                        std::vector<std::vector<double>>(
                            u.action_count,
                            std::vector<double>(sizes[g], 0.0)));
    const int sink_next = sizes[g] - 1;
    for (int s = 0; s < sizes[g - 1]; ++s)
      for (int a = 0; a < u.action_count; ++a) {
        int to = sink_next;
        if (s < static_cast<int>(tree[g - 1].size()) &&
            child[g - 1][s][a] >= 0)
          to = child[g - 1][s][a];
        trans[g - 1][s][a][to] = 1.0;
      }
  }
  std::vector<std::vector<std::vector<RewardDist>>> rewards(horizon);
  for (int g = 1; g <= horizon; ++g)
    rewards[g - 1].assign(sizes[g - 1], std::vector<RewardDist>(
                                            u.action_count, RewardDist::point(0)));
  std::vector<double> init(sizes[0], 0.0);
  init[0] = 1.0;

  return CapacityWitness{LayeredMdp(std::move(sizes), u.action_count,
                                    std::move(trans), std::move(rewards),
                                    std::move(init)),
                         std::move(labels), target};
}

}  // namespace

CapacityResult spanning_capacity(const PolicyClass& pc,
                                 std::uint64_t node_budget) {
  CapacitySearch search{pc, node_budget};
  const int horizon = pc.universe().horizon();
  Bits all = full_set(pc.size());

  std::vector<long long> per_layer(horizon, 0);
  for (int h = 1; h <= horizon; ++h) per_layer[h - 1] = search.solve(all, 1, h);

  long long value = 0;
  int best_layer = 1;
  for (int h = 1; h <= horizon; ++h)
    if (per_layer[h - 1] > value) {
      value = per_layer[h - 1];
      best_layer = h;
    }

  CapacityResult out{value, std::move(per_layer),
                     build_witness(search, best_layer), search.expanded,
                     !search.exceeded};
  return out;
}

double coverability(std::span<const Policy> members, const LayeredMdp& mdp) {
  const int horizon = mdp.horizon();
  std::vector<std::vector<std::vector<double>>> sup(horizon);
  for (int h = 1; h <= horizon; ++h)
    sup[h - 1].assign(mdp.layer_size(h),
                      std::vector<double>(mdp.action_count(), 0.0));
  for (const Policy& pi : members) {
    OccupancyTable occ = occupancy(mdp, pi);
    for (int h = 1; h <= horizon; ++h)
      for (int s = 0; s < mdp.layer_size(h); ++s)
        for (int a = 0; a < mdp.action_count(); ++a)
          sup[h - 1][s][a] = std::max(sup[h - 1][s][a], occ.at(h, s, a));
  }
  double best = 0.0;
  for (int h = 1; h <= horizon; ++h) {
    double sum = 0.0;
    for (const auto& per_state : sup[h - 1])
      for (double v : per_state) sum += v;
    best = std::max(best, sum);
  }
  return best;
}

double coverability(const PolicyClass& pc, const LayeredMdp& mdp) {
  if (!(pc.universe() == mdp.universe()))
    throw std::invalid_argument("coverability: universe mismatch");
  return coverability(std::span(pc.members()), mdp);
}

Policy lift_policy(const Policy& pi, const CapacityWitness& witness) {
  const PolicyUniverse shape = witness.mdp.universe();
  auto u = std::make_shared<PolicyUniverse>(shape);
  std::vector<std::vector<std::uint8_t>> table(shape.horizon());
  for (int g = 1; g <= shape.horizon(); ++g) {
    table[g - 1].resize(shape.layer_size(g));
    for (int s = 0; s < shape.layer_size(g); ++s)
      table[g - 1][s] =
          static_cast<std::uint8_t>(pi.action(g, witness.labels[g - 1][s]));
  }
  return Policy(std::move(u), std::move(table));
}

std::vector<Policy> lift_policies(const PolicyClass& pc,
                                  const CapacityWitness& witness) {
  std::vector<Policy> out;
  out.reserve(pc.size());
  for (const Policy& pi : pc.members()) out.push_back(lift_policy(pi, witness));
  return out;
}

}  // namespace agrl
