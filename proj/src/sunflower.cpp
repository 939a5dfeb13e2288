#include "agrl/sunflower.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "agrl/io_util.hpp"

namespace agrl {

namespace {

constexpr double kSearchGuard = 1e7;

double sequence_count(const PolicyUniverse& u, int max_span) {
  double total = 0.0;
  for (int h = 1; h <= u.horizon(); ++h) {
    double prod = 1.0;
    for (int span = 0; span <= max_span && h + span <= u.horizon(); ++span) {
      prod *= u.layer_size(h + span);
      total += prod;
      if (total > kSearchGuard) return total;
    }
  }
  return total;
}

}  // namespace

PetalVerdict verify_petal(const Policy& policy, const PolicyClass& core,
                          const std::vector<StateId>& s_pi, int max_span) {
  const PolicyUniverse& u = policy.universe();
  if (!(core.universe() == u))
    throw std::invalid_argument("verify_petal: core universe mismatch");
  for (StateId s : s_pi)
    if (!u.contains(s))
      throw std::invalid_argument("verify_petal: petal state outside universe");
  if (max_span < 0) throw std::invalid_argument("verify_petal: bad max_span");
  if (sequence_count(u, max_span) > kSearchGuard)
    throw std::invalid_argument(
        "verify_petal: universe too large for exhaustive check");

  std::set<StateId> petal(s_pi.begin(), s_pi.end());

  std::vector<int> states;  // states[i] = index at layer start + i
  for (int start = 1; start <= u.horizon(); ++start) {
    const int max_end = std::min(u.horizon(), start + max_span);
    for (int end = start; end <= max_end; ++end) {
      const int len = end - start + 1;
      states.assign(len, 0);
      while (true) {
        // second disjunct: a petal state strictly after the first index
        bool hits_petal = false;
        for (int i = 1; i < len && !hits_petal; ++i)
          hits_petal = petal.count({start + i, states[i]}) > 0;
        if (!hits_petal) {
          bool covered = false;
          for (const Policy& pe : core.members()) {
            bool match = true;
            for (int i = 0; i < len && match; ++i) {
              StateId s{start + i, states[i]};
              match = pe(s) == policy(s);
            }
            if (match) {
              covered = true;
              break;
            }
          }
          if (!covered) {
            PetalViolation v;
            for (int i = 0; i < len; ++i) {
              StateId s{start + i, states[i]};
              v.partial.emplace_back(s, policy(s));
            }
            return {false, std::move(v)};
          }
        }
        int i = len - 1;
        while (i >= 0 && states[i] == u.layer_size(start + i) - 1)
          states[i--] = 0;
        if (i < 0) break;
        ++states[i];
      }
    }
  }
  return {};
}

CertVerdict verify_cert(const PolicyClass& pc, const SunflowerCert& cert,
                        int max_span) {
  if (static_cast<int>(cert.petals.size()) != pc.size())
    throw std::invalid_argument("verify_cert: petal count mismatch");
  for (int i = 0; i < pc.size(); ++i) {
    if (static_cast<int>(cert.petals[i].size()) > cert.d)
      return {false, i, PetalViolation{}};
    PetalVerdict v =
        verify_petal(pc.member(i), cert.core, cert.petals[i], max_span);
    if (!v.ok) return {false, i, std::move(v.violation)};
  }
  if (cert.core.size() > cert.k) return {false, -1, PetalViolation{}};
  return {};
}

namespace {

// {pi_0} u {pi_h : 1 <= h <= H}: all-zeros plus the plays-1-on-layer-h
// policies.
PolicyClass zero_and_layer_core(std::shared_ptr<const PolicyUniverse> u) {
  const int horizon = u->horizon();
  std::vector<Policy> members;
  auto zero = [&] {
    std::vector<std::vector<std::uint8_t>> t(horizon);
    for (int h = 1; h <= horizon; ++h) t[h - 1].assign(u->layer_size(h), 0);
    return t;
  };
  members.emplace_back(u, zero());
  for (int h = 1; h <= horizon; ++h) {
    auto t = zero();
    t[h - 1].assign(u->layer_size(h), 1);
    members.emplace_back(u, std::move(t));
  }
  return PolicyClass(u, std::move(members));
}

// the A constant policies
PolicyClass constant_core(std::shared_ptr<const PolicyUniverse> u) {
  const int horizon = u->horizon();
  std::vector<Policy> members;
  for (int a = 0; a < u->action_count; ++a) {
    std::vector<std::vector<std::uint8_t>> t(horizon);
    for (int h = 1; h <= horizon; ++h)
      t[h - 1].assign(u->layer_size(h), static_cast<std::uint8_t>(a));
    members.emplace_back(u, std::move(t));
  }
  return PolicyClass(u, std::move(members));
}

std::vector<StateId> support_of(const Policy& pi) {
  std::vector<StateId> out;
  const PolicyUniverse& u = pi.universe();
  for (int h = 1; h <= u.horizon(); ++h)
    for (int s = 0; s < u.layer_size(h); ++s)
      if (pi.action(h, s) != 0) out.push_back({h, s});
  return out;
}

}  // namespace

SunflowerCert build_cert(const PolicyClass& pc) {
  auto u = pc.universe_ptr();
  const int horizon = u->horizon();
  switch (pc.tag()) {
    case ClassTag::kSingleton:
    case ClassTag::kLton: {
      std::vector<std::vector<StateId>> petals;
      int d = 0;
      for (const Policy& m : pc.members()) {
        petals.push_back(support_of(m));
        d = std::max(d, static_cast<int>(petals.back().size()));
      }
      return {zero_and_layer_core(u), std::move(petals), horizon + 1, d};
    }
    case ClassTag::kOneActive:
    case ClassTag::kAllActive: {
      // petal = the member's active column (the all-zeros member keeps
      // column 0)
      std::vector<std::vector<StateId>> petals;
      for (const Policy& m : pc.members()) {
        int column = 0;
        for (StateId s : support_of(m)) column = s.index;
        std::vector<StateId> petal;
        for (int h = 1; h <= horizon; ++h) petal.push_back({h, column});
        petals.push_back(std::move(petal));
      }
      return {zero_and_layer_core(u), std::move(petals), horizon + 1, horizon};
    }
    case ClassTag::kTabular: {
      std::vector<StateId> all;
      for (int h = 1; h <= horizon; ++h)
        for (int s = 0; s < u->layer_size(h); ++s) all.push_back({h, s});
      std::vector<std::vector<StateId>> petals(pc.size(), all);
      return {constant_core(u), std::move(petals), u->action_count,
              static_cast<int>(all.size())};
    }
    case ClassTag::kCbChain: {
      // the class is its own core and petals are empty
      PolicyClass core(u, pc.members());
      return {std::move(core),
              std::vector<std::vector<StateId>>(pc.size()), pc.size(), 0};
    }
    default:
      throw std::invalid_argument(
          "build_cert: no constructive recipe for tag " + tag_name(pc.tag()));
  }
}

// --- text format -------------------------------------------------------------
//
//   cert K D
//   <pclass block for the core>
//   petal m : h:i h:i ...

void write_cert(std::ostream& os, const SunflowerCert& cert) {
  os << "cert " << cert.k << ' ' << cert.d << '\n';
  write_policy_class(os, cert.core);
  for (std::size_t m = 0; m < cert.petals.size(); ++m) {
    os << "petal " << m << " :";
    for (StateId s : cert.petals[m]) os << ' ' << s.layer << ':' << s.index;
    os << '\n';
  }
}

SunflowerCert read_cert(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("cert: empty input");
  auto head = split_ws(line);
  if (head.size() != 3 || head[0] != "cert")
    throw std::invalid_argument("cert: bad header");
  int k = to_int(head[1]), d = to_int(head[2]);

  // the core pclass block runs until the first "petal" line
  std::stringstream core_text;
  std::vector<std::string> petal_lines;
  while (std::getline(is, line)) {
    if (line.rfind("petal", 0) == 0)
      petal_lines.push_back(line);
    else if (petal_lines.empty())
      core_text << line << '\n';
    else if (!split_ws(line).empty())
      throw std::invalid_argument("cert: core text after petal rows");
  }
  PolicyClass core = read_policy_class(core_text);

  std::vector<std::vector<StateId>> petals;
  for (const std::string& pl : petal_lines) {
    auto tok = split_ws(pl);
    if (tok.size() < 3 || tok[2] != ":")
      throw std::invalid_argument("cert: bad petal row");
    if (to_int(tok[1]) != static_cast<int>(petals.size()))
      throw std::invalid_argument("cert: petal rows out of order");
    std::vector<StateId> petal;
    for (std::size_t i = 3; i < tok.size(); ++i) {
      auto colon = tok[i].find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("cert: bad petal state " + tok[i]);
      petal.push_back({to_int(tok[i].substr(0, colon)),
                       to_int(tok[i].substr(colon + 1))});
    }
    petals.push_back(std::move(petal));
  }
  return {std::move(core), std::move(petals), k, d};
}

void save_cert(const std::string& path, const SunflowerCert& cert) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  write_cert(f, cert);
}

SunflowerCert load_cert(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_cert(f);
}

}  // namespace agrl
