#include "agrl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "agrl/io_util.hpp"

namespace agrl {

namespace {

constexpr double kProbTol = 1e-9;

// Renormalizes a row whose sum is within tolerance of 1; rejects otherwise.
void normalize_row(std::vector<double>& row, const char* what) {
  double sum = 0.0;
  for (double p : row) {
    if (p < -kProbTol || !std::isfinite(p))
      throw std::invalid_argument(std::string(what) + ": negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbTol)
    throw std::invalid_argument(std::string(what) +
                                ": row does not sum to 1 within 1e-9");
  for (double& p : row) p = std::max(0.0, p) / sum;
}

}  // namespace

LayeredMdp::LayeredMdp(
    std::vector<int> states_per_layer, int action_count,
    std::vector<std::vector<std::vector<std::vector<double>>>> transitions,
    std::vector<std::vector<std::vector<RewardDist>>> rewards,
    std::vector<double> init)
    : states_per_layer_(std::move(states_per_layer)),
      action_count_(action_count),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      init_(std::move(init)) {
  const int h_max = horizon();
  if (h_max < 1) throw std::invalid_argument("LayeredMdp: horizon must be >= 1");
  if (action_count_ < 1)
    throw std::invalid_argument("LayeredMdp: need at least one action");
  for (int k : states_per_layer_)
    if (k < 1) throw std::invalid_argument("LayeredMdp: empty layer");

  if (static_cast<int>(transitions_.size()) != std::max(0, h_max - 1))
    throw std::invalid_argument("LayeredMdp: wrong transition layer count");
  for (int h = 1; h < h_max; ++h) {
    auto& layer = transitions_[h - 1];
    if (static_cast<int>(layer.size()) != layer_size(h))
      throw std::invalid_argument("LayeredMdp: wrong transition state count");
    for (auto& per_state : layer) {
      if (static_cast<int>(per_state.size()) != action_count_)
        throw std::invalid_argument("LayeredMdp: wrong transition action count");
      for (auto& row : per_state) {
        if (static_cast<int>(row.size()) != layer_size(h + 1))
          throw std::invalid_argument("LayeredMdp: wrong transition row length");
        normalize_row(row, "LayeredMdp transition");
      }
    }
  }

  if (static_cast<int>(rewards_.size()) != h_max)
    throw std::invalid_argument("LayeredMdp: wrong reward layer count");
  for (int h = 1; h <= h_max; ++h) {
    auto& layer = rewards_[h - 1];
    if (static_cast<int>(layer.size()) != layer_size(h))
      throw std::invalid_argument("LayeredMdp: wrong reward state count");
    for (auto& per_state : layer) {
      if (static_cast<int>(per_state.size()) != action_count_)
        throw std::invalid_argument("LayeredMdp: wrong reward action count");
      for (const RewardDist& rd : per_state)
        if (rd.value < 0.0 || rd.value > 1.0 || !std::isfinite(rd.value))
          throw std::invalid_argument(
              "LayeredMdp: reward support must lie in [0,1]");
    }
  }

  if (static_cast<int>(init_.size()) != layer_size(1))
    throw std::invalid_argument("LayeredMdp: wrong init length");
  normalize_row(init_, "LayeredMdp init");

  // Cumulative-reward audit: the largest reward any dynamics-consistent path
  // can collect, taking the per-step max over actions, must not exceed 1.
  std::vector<double> best(layer_size(h_max));
  for (int s = 0; s < layer_size(h_max); ++s) {
    double m = 0.0;
    for (int a = 0; a < action_count_; ++a)
      m = std::max(m, rewards_[h_max - 1][s][a].max_support());
    best[s] = m;
  }
  for (int h = h_max - 1; h >= 1; --h) {
    std::vector<double> cur(layer_size(h), 0.0);
    for (int s = 0; s < layer_size(h); ++s) {
      double m = 0.0;
      for (int a = 0; a < action_count_; ++a) {
        double succ = 0.0;
        const auto& row = transitions_[h - 1][s][a];
        for (int t = 0; t < layer_size(h + 1); ++t)
          if (row[t] > 0.0) succ = std::max(succ, best[t]);
        m = std::max(m, rewards_[h - 1][s][a].max_support() + succ);
      }
      cur[s] = m;
    }
    best = std::move(cur);
  }
  double worst = 0.0;
  for (int s = 0; s < layer_size(1); ++s)
    if (init_[s] > 0.0) worst = std::max(worst, best[s]);
  if (worst > 1.0 + kProbTol)
    throw std::invalid_argument(
        "LayeredMdp: a trajectory can accumulate reward above 1");
}

bool LayeredMdp::deterministic_transitions() const {
  auto point_mass = [](std::span<const double> row) {
    for (double p : row)
      if (p != 0.0 && p != 1.0) return false;
    return true;
  };
  if (!point_mass(init_)) return false;
  for (int h = 1; h < horizon(); ++h)
    for (int s = 0; s < layer_size(h); ++s)
      for (int a = 0; a < action_count_; ++a)
        if (!point_mass(transition(h, s, a))) return false;
  return true;
}

Trajectory sample_trajectory(const LayeredMdp& mdp, const Policy& policy,
                             RngStream& rng) {
  if (!(policy.universe() == mdp.universe()))
    throw std::invalid_argument("sample_trajectory: policy universe mismatch");
  Trajectory out;
  out.reserve(mdp.horizon());
  int s = rng.categorical(mdp.init());
  for (int h = 1; h <= mdp.horizon(); ++h) {
    int a = policy.action(h, s);
    double r = mdp.reward(h, s, a).sample(rng);
    out.push_back({s, a, r});
    if (h < mdp.horizon()) s = rng.categorical(mdp.transition(h, s, a));
  }
  return out;
}

double exact_policy_value(const LayeredMdp& mdp, const Policy& policy) {
  const int h_max = mdp.horizon();
  std::vector<double> v(mdp.layer_size(h_max));
  for (int s = 0; s < mdp.layer_size(h_max); ++s)
    v[s] = mdp.reward(h_max, s, policy.action(h_max, s)).mean();
  for (int h = h_max - 1; h >= 1; --h) {
    std::vector<double> cur(mdp.layer_size(h), 0.0);
    for (int s = 0; s < mdp.layer_size(h); ++s) {
      int a = policy.action(h, s);
      double q = mdp.reward(h, s, a).mean();
      auto row = mdp.transition(h, s, a);
      for (int t = 0; t < mdp.layer_size(h + 1); ++t) q += row[t] * v[t];
      cur[s] = q;
    }
    v = std::move(cur);
  }
  double total = 0.0;
  for (int s = 0; s < mdp.layer_size(1); ++s) total += mdp.init()[s] * v[s];
  return total;
}

OccupancyTable occupancy(const LayeredMdp& mdp, const Policy& policy) {
  OccupancyTable out;
  const int h_max = mdp.horizon();
  out.state.resize(h_max);
  out.state_action.resize(h_max);
  out.state[0].assign(mdp.init().begin(), mdp.init().end());
  for (int h = 1; h <= h_max; ++h) {
    const int n = mdp.layer_size(h);
    out.state_action[h - 1].assign(
        n, std::vector<double>(mdp.action_count(), 0.0));
    for (int s = 0; s < n; ++s) {
      int a = policy.action(h, s);
      out.state_action[h - 1][s][a] = out.state[h - 1][s];
    }
    if (h < h_max) {
      out.state[h].assign(mdp.layer_size(h + 1), 0.0);
      for (int s = 0; s < n; ++s) {
        double d = out.state[h - 1][s];
        if (d == 0.0) continue;
        auto row = mdp.transition(h, s, policy.action(h, s));
        for (int t = 0; t < mdp.layer_size(h + 1); ++t)
          out.state[h][t] += d * row[t];
      }
    }
  }
  return out;
}

// --- text format -------------------------------------------------------------
//
//   mdp H A
//   layer h n                      (one per layer, h = 1..H)
//   t h s a : p1 p2 ...            (transition rows, h = 1..H-1)
//   r h s a : kind value           (kind is "point" or "ber")
//   init : p1 p2 ...

void write_mdp(std::ostream& os, const LayeredMdp& mdp) {
  os << "mdp " << mdp.horizon() << ' ' << mdp.action_count() << '\n';
  for (int h = 1; h <= mdp.horizon(); ++h)
    os << "layer " << h << ' ' << mdp.layer_size(h) << '\n';
  for (int h = 1; h < mdp.horizon(); ++h)
    for (int s = 0; s < mdp.layer_size(h); ++s)
      for (int a = 0; a < mdp.action_count(); ++a) {
        os << "t " << h << ' ' << s << ' ' << a << " :";
        for (double p : mdp.transition(h, s, a)) os << ' ' << fmt_double(p);
        os << '\n';
      }
  for (int h = 1; h <= mdp.horizon(); ++h)
    for (int s = 0; s < mdp.layer_size(h); ++s)
      for (int a = 0; a < mdp.action_count(); ++a) {
        const RewardDist& rd = mdp.reward(h, s, a);
        os << "r " << h << ' ' << s << ' ' << a << " : "
           << (rd.kind == RewardDist::Kind::kPoint ? "point" : "ber") << ' '
           << fmt_double(rd.value) << '\n';
      }
  os << "init :";
  for (double p : mdp.init()) os << ' ' << fmt_double(p);
  os << '\n';
}

LayeredMdp read_mdp(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("mdp: empty input");
  auto head = split_ws(line);
  if (head.size() != 3 || head[0] != "mdp")
    throw std::invalid_argument("mdp: bad header");
  const int h_max = to_int(head[1]), a_max = to_int(head[2]);
  if (h_max < 1 || a_max < 1) throw std::invalid_argument("mdp: bad shape");

  std::vector<int> sizes(h_max, -1);
  std::vector<std::vector<std::vector<std::vector<double>>>> trans;
  std::vector<std::vector<std::vector<RewardDist>>> rewards;
  std::vector<double> init;
  bool sized = false;
  auto ensure_sized = [&]() {
    if (sized) return;
    for (int k : sizes)
      if (k < 0) throw std::invalid_argument("mdp: missing layer line");
    trans.resize(h_max - 1);
    rewards.resize(h_max);
    for (int h = 1; h < h_max; ++h)
      trans[h - 1].assign(sizes[h - 1],
                          std::vector<std::vector<double>>(
                              a_max, std::vector<double>(sizes[h], -1.0)));
    for (int h = 1; h <= h_max; ++h)
      rewards[h - 1].assign(sizes[h - 1],
                            std::vector<RewardDist>(a_max, RewardDist::point(0)));
    sized = true;
  };

  while (std::getline(is, line)) {
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "layer") {
      if (tok.size() != 3) throw std::invalid_argument("mdp: bad layer line");
      int h = to_int(tok[1]);
      if (h < 1 || h > h_max) throw std::invalid_argument("mdp: bad layer id");
      sizes[h - 1] = to_int(tok[2]);
    } else if (tok[0] == "t") {
      ensure_sized();
      if (tok.size() < 5 || tok[4] != ":")
        throw std::invalid_argument("mdp: bad transition row");
      int h = to_int(tok[1]), s = to_int(tok[2]), a = to_int(tok[3]);
      if (h < 1 || h >= h_max) throw std::invalid_argument("mdp: bad t layer");
      std::vector<double> row;
      for (std::size_t i = 5; i < tok.size(); ++i)
        row.push_back(to_double(tok[i]));
      if (static_cast<int>(row.size()) != sizes[h])
        throw std::invalid_argument("mdp: wrong t row length");
      trans[h - 1].at(s).at(a) = std::move(row);
    } else if (tok[0] == "r") {
      ensure_sized();
      if (tok.size() != 7 || tok[4] != ":")
        throw std::invalid_argument("mdp: bad reward row");
      int h = to_int(tok[1]), s = to_int(tok[2]), a = to_int(tok[3]);
      RewardDist rd = tok[5] == "point" ? RewardDist::point(to_double(tok[6]))
                      : tok[5] == "ber" ? RewardDist::bernoulli(to_double(tok[6]))
                                        : throw std::invalid_argument(
                                              "mdp: unknown reward kind");
      rewards.at(h - 1).at(s).at(a) = rd;
    } else if (tok[0] == "init") {
      ensure_sized();
      for (std::size_t i = 2; i < tok.size(); ++i)
        init.push_back(to_double(tok[i]));
    } else {
      throw std::invalid_argument("mdp: unknown row " + tok[0]);
    }
  }
  ensure_sized();
  for (int h = 1; h < h_max; ++h)
    for (auto& per_state : trans[h - 1])
      for (auto& row : per_state)
        for (double p : row)
          if (p < 0.0) throw std::invalid_argument("mdp: missing transition row");
  return LayeredMdp(std::move(sizes), a_max, std::move(trans),
                    std::move(rewards), std::move(init));
}

void save_mdp(const std::string& path, const LayeredMdp& mdp) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  write_mdp(f, mdp);
}

LayeredMdp load_mdp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_mdp(f);
}

}  // namespace agrl
