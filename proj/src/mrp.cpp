#include "agrl/mrp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "agrl/io_util.hpp"

namespace agrl {

namespace {
constexpr double kProbTol = 1e-9;
}

Mrp::Mrp(int horizon, std::vector<StateId> nodes,
         std::vector<std::vector<double>> p, std::vector<std::vector<double>> r,
         Flavor flavor, double weight_bound)
    : horizon_(horizon),
      nodes_(std::move(nodes)),
      p_(std::move(p)),
      r_(std::move(r)),
      flavor_(flavor),
      weight_bound_(weight_bound) {
  const int n = node_count();
  if (horizon_ < 0) throw std::invalid_argument("Mrp: bad horizon");
  for (int i = 0; i < n; ++i) {
    if (nodes_[i] == s_top()) top_ = i;
    if (nodes_[i] == s_bot(horizon_)) bot_ = i;
    if (nodes_[i].layer < 0 || nodes_[i].layer > horizon_ + 1)
      throw std::invalid_argument("Mrp: node layer out of range");
  }
  if (top_ < 0 || bot_ < 0)
    throw std::invalid_argument("Mrp: node set must contain s_top and s_bot");
  if (static_cast<int>(p_.size()) != n || static_cast<int>(r_.size()) != n)
    throw std::invalid_argument("Mrp: edge matrix shape mismatch");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(p_[i].size()) != n ||
        static_cast<int>(r_[i].size()) != n)
      throw std::invalid_argument("Mrp: edge matrix shape mismatch");
    for (int j = 0; j < n; ++j) {
      const bool self_loop = (i == bot_ && j == bot_);
      if (p_[i][j] != 0.0 && !self_loop &&
          nodes_[j].layer <= nodes_[i].layer)
        throw std::invalid_argument("Mrp: edge does not move to a later layer");
      double cap = flavor_ == Flavor::kExact ? 1.0 + kProbTol
                                             : weight_bound + kProbTol;
      if (p_[i][j] < 0.0 || p_[i][j] > cap || !std::isfinite(p_[i][j]) ||
          r_[i][j] < 0.0 || r_[i][j] > cap || !std::isfinite(r_[i][j]))
        throw std::invalid_argument("Mrp: edge value out of range");
    }
  }
  if (std::abs(p_[bot_][bot_] - 1.0) > kProbTol || r_[bot_][bot_] != 0.0)
    throw std::invalid_argument("Mrp: s_bot must self-loop with p=1, r=0");
  p_[bot_][bot_] = 1.0;
  if (flavor_ == Flavor::kExact) {
    for (int i = 0; i < n; ++i) {
      if (i == bot_) continue;
      double sum = 0.0;
      for (int j = 0; j < n; ++j) sum += p_[i][j];
      if (std::abs(sum - 1.0) > kProbTol)
        throw std::invalid_argument("Mrp: exact row does not sum to 1");
      for (int j = 0; j < n; ++j) p_[i][j] /= sum;
    }
  }
}

int Mrp::node_index(StateId s) const {
  for (int i = 0; i < node_count(); ++i)
    if (nodes_[i] == s) return i;
  return -1;
}

double mrp_value(const Mrp& mrp) {
  const int n = mrp.node_count();
  std::vector<double> v(n, 0.0), next(n, 0.0);
  for (int sweep = 0; sweep < mrp.horizon() + 1; ++sweep) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        double p = mrp.p(i, j);
        if (p != 0.0 || mrp.r(i, j) != 0.0) acc += p * (mrp.r(i, j) + v[j]);
      }
      next[i] = acc;
    }
    std::swap(v, next);
  }
  return v[mrp.top_index()];
}

double mrp_reach_prob(const Mrp& mrp, StateId target) {
  const int t = mrp.node_index(target);
  if (t < 0) throw std::invalid_argument("mrp_reach_prob: target not a node");
  const int n = mrp.node_count();
  std::vector<double> v(n, 0.0), next(n, 0.0);
  v[t] = 1.0;
  for (int sweep = 0; sweep < mrp.horizon() + 1; ++sweep) {
    for (int i = 0; i < n; ++i) {
      if (i == t) {
        next[i] = 1.0;  // first-passage: the target absorbs value 1
        continue;
      }
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += mrp.p(i, j) * v[j];
      next[i] = acc;
    }
    std::swap(v, next);
  }
  return v[mrp.top_index()];
}

std::vector<double> mrp_occupancy(const Mrp& mrp) {
  const int n = mrp.node_count();
  std::vector<double> d(n, 0.0), total(n, 0.0), next(n, 0.0);
  d[mrp.top_index()] = 1.0;
  for (int hop = 0; hop <= mrp.horizon(); ++hop) {
    for (int i = 0; i < n; ++i) total[i] += d[i];
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      if (d[i] == 0.0) continue;
      for (int j = 0; j < n; ++j) next[j] += d[i] * mrp.p(i, j);
    }
    std::swap(d, next);
  }
  return total;
}

SimulationGap simulation_gap_bound(const Mrp& exact, const Mrp& estimated) {
  if (exact.nodes() != estimated.nodes() ||
      exact.horizon() != estimated.horizon())
    throw std::invalid_argument("simulation_gap_bound: node sets differ");
  SimulationGap out;
  out.gap = std::abs(mrp_value(exact) - mrp_value(estimated));
  std::vector<double> d = mrp_occupancy(exact);
  const int n = exact.node_count();
  for (int i = 0; i < n; ++i) {
    if (d[i] == 0.0) continue;
    double row = 0.0;
    for (int j = 0; j < n; ++j)
      row += std::abs(exact.p(i, j) - estimated.p(i, j)) +
             std::abs(exact.r(i, j) - estimated.r(i, j));
    out.bound += d[i] * row;
  }
  return out;
}

// --- text format -------------------------------------------------------------
//
//   mrp H [empirical K]
//   n h i                          (one line per node; s_top/s_bot included)
//   e h s h' s' : p r              (edges, by node StateId)

void write_mrp(std::ostream& os, const Mrp& mrp) {
  os << "mrp " << mrp.horizon();
  if (mrp.flavor() == Mrp::Flavor::kEmpirical)
    os << " empirical " << fmt_double(mrp.weight_bound());
  os << '\n';
  for (const StateId& s : mrp.nodes())
    os << "n " << s.layer << ' ' << s.index << '\n';
  const int n = mrp.node_count();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (mrp.p(i, j) != 0.0 || mrp.r(i, j) != 0.0) {
        const StateId a = mrp.nodes()[i], b = mrp.nodes()[j];
        os << "e " << a.layer << ' ' << a.index << ' ' << b.layer << ' '
           << b.index << " : " << fmt_double(mrp.p(i, j)) << ' '
           << fmt_double(mrp.r(i, j)) << '\n';
      }
}

Mrp read_mrp(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("mrp: empty input");
  auto head = split_ws(line);
  if ((head.size() != 2 && head.size() != 4) || head[0] != "mrp")
    throw std::invalid_argument("mrp: bad header");
  const int horizon = to_int(head[1]);
  Mrp::Flavor flavor = Mrp::Flavor::kExact;
  double bound = 1.0;
  if (head.size() == 4) {
    if (head[2] != "empirical") throw std::invalid_argument("mrp: bad header");
    flavor = Mrp::Flavor::kEmpirical;
    bound = to_double(head[3]);
  }
  std::vector<StateId> nodes;
  std::vector<std::array<int, 5>> edges_i;
  std::vector<std::pair<double, double>> edges_v;
  while (std::getline(is, line)) {
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "n" && tok.size() == 3) {
      nodes.push_back({to_int(tok[1]), to_int(tok[2])});
    } else if (tok[0] == "e" && tok.size() == 8 && tok[5] == ":") {
      edges_i.push_back({to_int(tok[1]), to_int(tok[2]), to_int(tok[3]),
                         to_int(tok[4]), 0});
      edges_v.emplace_back(to_double(tok[6]), to_double(tok[7]));
    } else {
      throw std::invalid_argument("mrp: bad row");
    }
  }
  const int n = static_cast<int>(nodes.size());
  auto find = [&](StateId s) {
    for (int i = 0; i < n; ++i)
      if (nodes[i] == s) return i;
    throw std::invalid_argument("mrp: edge references unknown node");
  };
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < edges_i.size(); ++k) {
    int i = find({edges_i[k][0], edges_i[k][1]});
    int j = find({edges_i[k][2], edges_i[k][3]});
    p[i][j] = edges_v[k].first;
    r[i][j] = edges_v[k].second;
  }
  return Mrp(horizon, std::move(nodes), std::move(p), std::move(r), flavor,
             bound);
}

void save_mrp(const std::string& path, const Mrp& mrp) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  write_mrp(f, mrp);
}

Mrp load_mrp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_mrp(f);
}

}  // namespace agrl
