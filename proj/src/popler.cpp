#include "agrl/popler.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "agrl/errors.hpp"

namespace agrl {

TrajDataset data_collector(const LayeredMdp& mdp, StateId s,
                           const Policy* reacher, const PolicyClass& core,
                           int n, RngStream& rng) {
  if ((s == s_top()) != (reacher == nullptr))
    throw std::invalid_argument(
        "data_collector: reacher must be null exactly for s_top");
  if (s != s_top() && !mdp.universe().contains(s))
    throw std::invalid_argument("data_collector: anchor outside the MDP");
  if (n < 0) throw std::invalid_argument("data_collector: bad sample count");

  TrajDataset out{s, n, {}};
  const int h_max = mdp.horizon();
  for (int attempt = 0; attempt < n; ++attempt) {
    Trajectory traj;
    traj.reserve(h_max);
    int cur = rng.categorical(mdp.init());
    int layer = 1;
    if (s != s_top()) {
      // run the reacher through layer s.layer - 1, then test the hit
      for (; layer < s.layer; ++layer) {
        int a = reacher->action(layer, cur);
        double r = mdp.reward(layer, cur, a).sample(rng);
        traj.push_back({cur, a, r});
        cur = rng.categorical(mdp.transition(layer, cur, a));
      }
      if (cur != s.index) continue;  // missed the anchor, discard
    }
    const Policy& pi_e = core.member(rng.uniform_int(core.size()));
    for (; layer <= h_max; ++layer) {
      int a = pi_e.action(layer, cur);
      double r = mdp.reward(layer, cur, a).sample(rng);
      traj.push_back({cur, a, r});
      if (layer < h_max) cur = rng.categorical(mdp.transition(layer, cur, a));
    }
    out.trajectories.push_back(std::move(traj));
  }
  return out;
}

namespace {

// True iff pi's actions generate the segment of tau between the layers of s
// and s_prime: indices max(h,1) .. min(h'-1, H).
bool segment_consistent(const Policy& pi, const Trajectory& tau, int from_layer,
                        int to_layer) {
  int lo = std::max(from_layer, 1);
  int hi = std::min(to_layer - 1, static_cast<int>(tau.size()));
  for (int g = lo; g <= hi; ++g) {
    const TrajectoryStep& step = tau[g - 1];
    if (pi.action(g, step.state) != step.action) return false;
  }
  return true;
}

double segment_reward(const Trajectory& tau, int from_layer, int to_layer) {
  int lo = std::max(from_layer, 1);
  int hi = std::min(to_layer - 1, static_cast<int>(tau.size()));
  double total = 0.0;
  for (int g = lo; g <= hi; ++g) total += tau[g - 1].reward;
  return total;
}

}  // namespace

EdgeEstimate estimate_edge(const TrajDataset& dataset, const PolicyClass& core,
                           const Policy& pi, const std::vector<StateId>& s_pi,
                           StateId s, StateId s_prime) {
  const int h_max = pi.universe().horizon();
  if (!(s == dataset.anchor))
    throw std::invalid_argument("estimate_edge: s is not the dataset anchor");
  if (s_prime.layer <= s.layer)
    throw std::invalid_argument("estimate_edge: edge must move forward");
  EdgeEstimate out;
  if (dataset.trajectories.empty()) {
    out.empty_dataset = true;
    return out;
  }

  std::set<StateId> petal(s_pi.begin(), s_pi.end());
  const int h = s.layer, hp = s_prime.layer;
  const int k = core.size();
  for (const Trajectory& tau : dataset.trajectories) {
    // direct-transit event: reach s_prime at its layer with no petal state
    // strictly in between
    if (hp <= h_max && tau[hp - 1].state != s_prime.index) continue;
    bool avoid = true;
    for (int g = h + 1; g <= std::min(hp - 1, h_max) && avoid; ++g)
      avoid = petal.count({g, tau[g - 1].state}) == 0;
    if (!avoid) continue;
    if (!segment_consistent(pi, tau, h, hp)) continue;

    int denom = 0;
    for (const Policy& pe : core.members())
      if (segment_consistent(pe, tau, h, hp)) ++denom;
    if (denom == 0) {
      ++out.violations;
      continue;
    }
    double w = static_cast<double>(k) / denom;
    out.p += w;
    out.r += w * segment_reward(tau, h, hp);
  }
  out.p /= dataset.trajectories.size();
  out.r /= dataset.trajectories.size();
  return out;
}

namespace {

// Shared node layout for the policy-specific MRPs: s_top, sorted petal
// states, s_bot.
std::vector<StateId> mrp_nodes(int horizon, const std::vector<StateId>& s_pi) {
  std::vector<StateId> nodes;
  nodes.push_back(s_top());
  std::vector<StateId> petals = s_pi;
  std::sort(petals.begin(), petals.end());
  petals.erase(std::unique(petals.begin(), petals.end()), petals.end());
  for (StateId p : petals) nodes.push_back(p);
  nodes.push_back(s_bot(horizon));
  return nodes;
}

}  // namespace

EmpiricalMrp build_empirical_mrp(
    const std::map<StateId, TrajDataset>& datasets, const PolicyClass& core,
    const Policy& pi, const std::vector<StateId>& s_pi,
    const std::vector<StateId>& s_rch) {
  const int h_max = pi.universe().horizon();
  std::vector<StateId> nodes = mrp_nodes(h_max, s_pi);
  const int n = static_cast<int>(nodes.size());
  const int bot = n - 1;
  std::set<StateId> reached(s_rch.begin(), s_rch.end());
  reached.insert(s_top());

  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
  std::vector<long long> row_samples(n, 0);
  long long violations = 0;

  for (int i = 0; i + 1 < n; ++i) {
    if (!reached.count(nodes[i])) {
      p[i][bot] = 1.0;  // unexplored petal: straight to the end state
      continue;
    }
    auto it = datasets.find(nodes[i]);
    if (it == datasets.end())
      throw std::invalid_argument(
          "build_empirical_mrp: missing dataset for an explored state");
    row_samples[i] = it->second.accepted();
    for (int j = 1; j < n; ++j) {
      if (nodes[j].layer <= nodes[i].layer) continue;
      EdgeEstimate e = estimate_edge(it->second, core, pi, s_pi, nodes[i],
                                     nodes[j]);
      p[i][j] = e.p;
      r[i][j] = e.r;
      violations += e.violations;
    }
  }
  p[bot][bot] = 1.0;

  Mrp mrp(h_max, std::move(nodes), std::move(p), std::move(r),
          Mrp::Flavor::kEmpirical, core.size());
  return {std::move(mrp), std::move(row_samples), violations, core.size()};
}

Mrp exact_policy_mrp(const LayeredMdp& mdp, const Policy& pi,
                     const std::vector<StateId>& s_pi,
                     const std::vector<StateId>& s_rch) {
  const int h_max = mdp.horizon();
  std::vector<StateId> nodes = mrp_nodes(h_max, s_pi);
  const int n = static_cast<int>(nodes.size());
  const int bot = n - 1;
  std::set<StateId> petal(s_pi.begin(), s_pi.end());
  std::set<StateId> reached(s_rch.begin(), s_rch.end());
  reached.insert(s_top());

  auto node_of = [&](StateId s) {
    for (int i = 0; i < n; ++i)
      if (nodes[i] == s) return i;
    return -1;
  };

  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));

  for (int i = 0; i + 1 < n; ++i) {
    const StateId src = nodes[i];
    if (!reached.count(src)) {
      p[i][bot] = 1.0;
      continue;
    }
    // forward DP from src under pi; a petal state hit absorbs into its edge
    const int start_layer = std::max(src.layer, 1);
    std::vector<double> prob(mdp.layer_size(start_layer), 0.0);
    std::vector<double> rew(mdp.layer_size(start_layer), 0.0);
    if (src == s_top()) {
      for (int x = 0; x < mdp.layer_size(1); ++x) {
        prob[x] = mdp.init()[x];
        if (prob[x] > 0.0 && petal.count({1, x})) {
          int j = node_of({1, x});
          p[i][j] += prob[x];
          prob[x] = 0.0;
        }
      }
    } else {
      prob[src.index] = 1.0;
    }
    for (int g = start_layer; g <= h_max; ++g) {
      std::vector<double> nprob, nrew;
      if (g < h_max) {
        nprob.assign(mdp.layer_size(g + 1), 0.0);
        nrew.assign(mdp.layer_size(g + 1), 0.0);
      }
      for (int x = 0; x < mdp.layer_size(g); ++x) {
        if (prob[x] == 0.0 && rew[x] == 0.0) continue;
        int a = pi.action(g, x);
        double rho = mdp.reward(g, x, a).mean();
        double w = rew[x] + prob[x] * rho;  // reward mass through layer g
        if (g == h_max) {
          p[i][bot] += prob[x];
          r[i][bot] += w;
          continue;
        }
        auto row = mdp.transition(g, x, a);
        for (int y = 0; y < mdp.layer_size(g + 1); ++y) {
          if (row[y] == 0.0) continue;
          if (petal.count({g + 1, y})) {
            int j = node_of({g + 1, y});
            p[i][j] += prob[x] * row[y];
            r[i][j] += w * row[y];
          } else {
            nprob[y] += prob[x] * row[y];
            nrew[y] += w * row[y];
          }
        }
      }
      prob = std::move(nprob);
      rew = std::move(nrew);
      if (g == h_max) break;
    }
  }
  p[bot][bot] = 1.0;
  return Mrp(h_max, std::move(nodes), std::move(p), std::move(r),
             Mrp::Flavor::kExact);
}

namespace {

long long default_n1(const PoplerOptions& o, int k, int d, int class_size) {
  double dd = d;
  double v = o.c1 * std::pow(dd + 1, 4) * k * k *
             std::log(class_size * (dd + 1) / o.delta) / (o.eps * o.eps);
  return static_cast<long long>(std::ceil(v));
}

long long default_n2(const PoplerOptions& o, int k, int d, int class_size) {
  double dd = d;
  double v = o.c2 * std::pow(dd, 3) * std::pow(dd + 1, 2) * k * k *
             std::log(class_size * (dd + 1) * (dd + 1) / o.delta) /
             (o.eps * o.eps * o.eps);
  return static_cast<long long>(std::ceil(v));
}

}  // namespace

PoplerReport popler(const LayeredMdp& mdp, const PolicyClass& pc,
                    const SunflowerCert& cert, const PoplerOptions& opts,
                    RngStream& rng) {
  if (static_cast<int>(cert.petals.size()) != pc.size())
    throw std::invalid_argument("popler: cert does not cover the class");
  if (!(pc.universe() == mdp.universe()))
    throw std::invalid_argument("popler: class/MDP universe mismatch");
  if (opts.eps <= 0 || opts.delta <= 0)
    throw std::invalid_argument("popler: eps and delta must be positive");

  const PolicyClass& core = cert.core;
  const int d = cert.d;
  PoplerReport rep;
  rep.n1 = opts.n1 > 0 ? opts.n1 : default_n1(opts, core.size(), d, pc.size());
  rep.n2 = opts.n2 > 0 ? opts.n2 : default_n2(opts, core.size(), d, pc.size());
  if (d > 0 && rep.n2 <= 0)
    throw std::invalid_argument("popler: n2 must be positive when D > 0");

  std::map<StateId, TrajDataset> datasets;
  std::vector<StateId> s_rch{s_top()};
  rep.reached.emplace_back(s_top(), -1);
  datasets.emplace(s_top(),
                   data_collector(mdp, s_top(), nullptr, core,
                                  static_cast<int>(rep.n1), rng));
  rep.trajectories_collected += rep.n1;

  if (d > 0) {
    long long capacity_ub = opts.capacity_ub;
    if (capacity_ub <= 0) {
      // the cap only needs an upper bound; the trivial class-size bound
      // avoids pulling the capacity search into every run
      capacity_ub = pc.size();
    }
    const double cap_raw =
        12.0 * mdp.horizon() * d * static_cast<double>(capacity_ub) / opts.eps;
    const long long cap = static_cast<long long>(std::ceil(cap_raw)) + 1;
    const double threshold = opts.eps / (6.0 * d);

    bool inserted = true;
    while (inserted) {
      ++rep.iterations;
      if (rep.iterations > cap) {
        std::ostringstream msg;
        msg << "popler: identification loop exceeded its cap of " << cap
            << " iterations (|T| = " << rep.reached.size() << ")";
        throw GuardExceeded(msg.str());
      }
      inserted = false;
      for (int i = 0; i < pc.size() && !inserted; ++i) {
        EmpiricalMrp emp = build_empirical_mrp(datasets, core, pc.member(i),
                                               cert.petals[i], s_rch);
        rep.violations += emp.violations;
        std::vector<StateId> rem;
        for (StateId s : emp.mrp.nodes())
          if (s != s_top() && s != s_bot(mdp.horizon()) &&
              std::find(s_rch.begin(), s_rch.end(), s) == s_rch.end())
            rem.push_back(s);
        for (StateId bar_s : rem) {
          if (mrp_reach_prob(emp.mrp, bar_s) < threshold) continue;
          datasets.emplace(bar_s, data_collector(mdp, bar_s, &pc.member(i),
                                                 core,
                                                 static_cast<int>(rep.n2),
                                                 rng));
          rep.trajectories_collected += rep.n2;
          s_rch.push_back(bar_s);
          rep.reached.emplace_back(bar_s, i);
          inserted = true;  // restart the scan from the first member
          break;
        }
      }
    }
  }

  rep.v_hat.resize(pc.size());
  for (int i = 0; i < pc.size(); ++i) {
    EmpiricalMrp emp = build_empirical_mrp(datasets, core, pc.member(i),
                                           cert.petals[i], s_rch);
    rep.violations += emp.violations;
    rep.v_hat[i] = mrp_value(emp.mrp);
  }
  rep.best_index = 0;
  for (int i = 1; i < pc.size(); ++i)
    if (rep.v_hat[i] > rep.v_hat[rep.best_index]) rep.best_index = i;

  for (const auto& [anchor, ds] : datasets)
    rep.dataset_sizes.emplace_back(anchor, ds.accepted());
  return rep;
}

}  // namespace agrl
