#include "agrl/policy.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "agrl/io_util.hpp"

namespace agrl {

bool PolicyUniverse::uniform() const {
  for (int k : states_per_layer)
    if (k != states_per_layer.front()) return false;
  return !states_per_layer.empty();
}

std::size_t PolicyUniverse::total_states() const {
  std::size_t n = 0;
  for (int k : states_per_layer) n += static_cast<std::size_t>(k);
  return n;
}

Policy::Policy(std::shared_ptr<const PolicyUniverse> universe,
               std::vector<std::vector<std::uint8_t>> actions)
    : universe_(std::move(universe)), actions_(std::move(actions)) {
  if (!universe_) throw std::invalid_argument("Policy: null universe");
  if (static_cast<int>(actions_.size()) != universe_->horizon())
    throw std::invalid_argument("Policy: wrong number of layers");
  for (int h = 1; h <= universe_->horizon(); ++h) {
    if (static_cast<int>(actions_[h - 1].size()) != universe_->layer_size(h))
      throw std::invalid_argument("Policy: wrong layer size");
    for (std::uint8_t a : actions_[h - 1])
      if (a >= universe_->action_count)
        throw std::invalid_argument("Policy: action out of range");
  }
}

std::string tag_name(ClassTag tag) {
  switch (tag) {
    case ClassTag::kSingleton: return "singleton";
    case ClassTag::kLton: return "lton";
    case ClassTag::kOneActive: return "one_active";
    case ClassTag::kAllActive: return "all_active";
    case ClassTag::kTabular: return "tabular";
    case ClassTag::kCbChain: return "cb_chain";
    case ClassTag::kThreshold: return "threshold";
    case ClassTag::kPiEll: return "pi_ell";
    case ClassTag::kExplicit: return "explicit";
  }
  return "explicit";
}

std::optional<ClassTag> tag_from_name(const std::string& name) {
  for (ClassTag t : {ClassTag::kSingleton, ClassTag::kLton, ClassTag::kOneActive,
                     ClassTag::kAllActive, ClassTag::kTabular, ClassTag::kCbChain,
                     ClassTag::kThreshold, ClassTag::kPiEll, ClassTag::kExplicit})
    if (tag_name(t) == name) return t;
  return std::nullopt;
}

PolicyClass::PolicyClass(std::shared_ptr<const PolicyUniverse> universe,
                         std::vector<Policy> members, ClassTag tag,
                         std::vector<long long> tag_params)
    : universe_(std::move(universe)),
      members_(std::move(members)),
      tag_(tag),
      tag_params_(std::move(tag_params)) {
  if (members_.empty()) throw std::invalid_argument("PolicyClass: empty class");
  std::set<std::vector<std::vector<std::uint8_t>>> seen;
  for (const Policy& m : members_) {
    if (!(m.universe() == *universe_))
      throw std::invalid_argument("PolicyClass: member universe mismatch");
    if (!seen.insert(m.table()).second)
      throw std::invalid_argument("PolicyClass: duplicate member");
  }
}

bool consistent(const Policy& pi,
                std::span<const std::pair<StateId, int>> partial) {
  int prev_layer = 0;
  for (const auto& [s, a] : partial) {
    if (!pi.universe().contains(s))
      throw std::invalid_argument("consistent: state outside universe");
    if (s.layer <= prev_layer)
      throw std::invalid_argument("consistent: layers must strictly increase");
    prev_layer = s.layer;
    if (pi(s) != a) return false;
  }
  return true;
}

namespace {

std::shared_ptr<const PolicyUniverse> make_universe(int k, int h, int a) {
  if (k < 1 || h < 1 || a < 2)
    throw std::invalid_argument("builder: K, H must be >= 1 and A >= 2");
  return std::make_shared<PolicyUniverse>(
      PolicyUniverse{std::vector<int>(h, k), a});
}

std::vector<std::vector<std::uint8_t>> zero_table(int k, int h) {
  return std::vector<std::vector<std::uint8_t>>(h,
                                                std::vector<std::uint8_t>(k, 0));
}

}  // namespace

PolicyClass build_singletons(int k, int h) {
  auto u = make_universe(k, h, 2);
  std::vector<Policy> members;
  for (int layer = 1; layer <= h; ++layer)
    for (int i = 0; i < k; ++i) {
      auto t = zero_table(k, h);
      t[layer - 1][i] = 1;
      members.emplace_back(u, std::move(t));
    }
  return PolicyClass(u, std::move(members), ClassTag::kSingleton, {k, h});
}

PolicyClass build_ltons(int k, int h, int ell) {
  if (ell < 0) throw std::invalid_argument("build_ltons: ell must be >= 0");
  auto u = make_universe(k, h, 2);
  const int n = k * h;  // flattened states, layer-major
  std::vector<Policy> members;
  std::vector<int> combo;
  // subsets of size 0..ell in lexicographic order per size
  auto emit = [&]() {
    auto t = zero_table(k, h);
    for (int flat : combo) t[flat / k][flat % k] = 1;
    members.emplace_back(u, std::move(t));
  };
  for (int size = 0; size <= std::min(ell, n); ++size) {
    combo.assign(size, 0);
    for (int i = 0; i < size; ++i) combo[i] = i;
    while (true) {
      emit();
      if (size == 0) break;
      int i = size - 1;
      while (i >= 0 && combo[i] == n - size + i) --i;
      if (i < 0) break;
      ++combo[i];
      for (int j = i + 1; j < size; ++j) combo[j] = combo[j - 1] + 1;
    }
  }
  return PolicyClass(u, std::move(members), ClassTag::kLton, {k, h, ell});
}

namespace {

std::vector<Policy> active_column(std::shared_ptr<const PolicyUniverse> u,
                                  int k, int h, int column) {
  std::vector<Policy> out;
  for (long long b = 0; b < (1LL << h); ++b) {
    auto t = zero_table(k, h);
    for (int layer = 1; layer <= h; ++layer)
      t[layer - 1][column] = static_cast<std::uint8_t>((b >> (layer - 1)) & 1);
    out.emplace_back(u, std::move(t));
  }
  return out;
}

}  // namespace

PolicyClass build_one_active(int k, int h) {
  if (h > 24) throw std::invalid_argument("build_one_active: 2^H too large");
  auto u = make_universe(k, h, 2);
  return PolicyClass(u, active_column(u, k, h, 0), ClassTag::kOneActive, {k, h});
}

PolicyClass build_all_active(int k, int h) {
  if (h > 24) throw std::invalid_argument("build_all_active: 2^H too large");
  auto u = make_universe(k, h, 2);
  std::vector<Policy> members;
  std::set<std::vector<std::vector<std::uint8_t>>> seen;
  for (int j = 0; j < k; ++j)
    for (Policy& p : active_column(u, k, h, j))
      if (seen.insert(p.table()).second) members.push_back(std::move(p));
  return PolicyClass(u, std::move(members), ClassTag::kAllActive, {k, h});
}

PolicyClass build_tabular(int k, int h, int a) {
  auto u = make_universe(k, h, a);
  const int n = k * h;
  double count = 1.0;
  for (int i = 0; i < n; ++i) {
    count *= a;
    if (count > 1e6)
      throw std::invalid_argument("build_tabular: class above 10^6 members");
  }
  std::vector<Policy> members;
  std::vector<std::uint8_t> digits(n, 0);
  while (true) {
    auto t = zero_table(k, h);
    for (int flat = 0; flat < n; ++flat) t[flat / k][flat % k] = digits[flat];
    members.emplace_back(u, std::move(t));
    int i = n - 1;
    while (i >= 0 && digits[i] == a - 1) digits[i--] = 0;
    if (i < 0) break;
    ++digits[i];
  }
  return PolicyClass(u, std::move(members), ClassTag::kTabular, {k, h, a});
}

PolicyClass build_cb_chain(int h, int a) {
  if (h < 1 || a < 2) throw std::invalid_argument("build_cb_chain: bad shape");
  double count = 1.0;
  for (int i = 0; i < h; ++i) {
    count *= a;
    if (count > 1e6)
      throw std::invalid_argument("build_cb_chain: class above 10^6 members");
  }
  int k = 1;
  for (int i = 0; i + 1 < h; ++i) k *= a;  // A^(H-1) states per layer
  auto u = make_universe(k, h, a);
  std::vector<Policy> members;
  std::vector<std::uint8_t> seq(h, 0);
  while (true) {
    std::vector<std::vector<std::uint8_t>> t(h);
    for (int layer = 1; layer <= h; ++layer)
      t[layer - 1].assign(k, seq[layer - 1]);
    members.emplace_back(u, std::move(t));
    int i = h - 1;
    while (i >= 0 && seq[i] == a - 1) seq[i--] = 0;
    if (i < 0) break;
    ++seq[i];
  }
  return PolicyClass(u, std::move(members), ClassTag::kCbChain, {h, a});
}

PolicyClass build_threshold(int k, int h) {
  auto u = make_universe(k, h, 2);
  std::vector<Policy> members;
  for (int i = 1; i <= k; ++i) {
    auto t = zero_table(k, h);
    for (int layer = 1; layer <= h; ++layer)
      for (int j = 1; j <= k; ++j)
        t[layer - 1][j - 1] = (j >= i) ? 1 : 0;
    members.emplace_back(u, std::move(t));
  }
  return PolicyClass(u, std::move(members), ClassTag::kThreshold, {k, h});
}

// --- text format -------------------------------------------------------------
//
//   pclass K H A
//   tag <name> [params...]
//   m : a(1,1) a(2,1) ... a(K,1) a(1,2) ... a(K,H)     (layer-major, explicit)
//
// Structured classes persist only the tag line; members are rebuilt on load.

void write_policy_class(std::ostream& os, const PolicyClass& pc) {
  const PolicyUniverse& u = pc.universe();
  if (!u.uniform())
    throw std::invalid_argument("write_policy_class: ragged universe");
  os << "pclass " << u.states_per_layer[0] << ' ' << u.horizon() << ' '
     << u.action_count << '\n';
  os << "tag " << tag_name(pc.tag());
  for (long long p : pc.tag_params()) os << ' ' << p;
  os << '\n';
  // pi_ell classes come from a sampled matrix, so they persist their members
  if (pc.tag() != ClassTag::kExplicit && pc.tag() != ClassTag::kPiEll) return;
  for (const Policy& m : pc.members()) {
    os << "m :";
    for (int h = 1; h <= u.horizon(); ++h)
      for (int i = 0; i < u.layer_size(h); ++i) os << ' ' << m.action(h, i);
    os << '\n';
  }
}

PolicyClass read_policy_class(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::invalid_argument("pclass: empty input");
  auto head = split_ws(line);
  if (head.size() != 4 || head[0] != "pclass")
    throw std::invalid_argument("pclass: bad header");
  const int k = to_int(head[1]), h = to_int(head[2]), a = to_int(head[3]);
  if (!std::getline(is, line)) throw std::invalid_argument("pclass: no tag line");
  auto tagtok = split_ws(line);
  if (tagtok.size() < 2 || tagtok[0] != "tag")
    throw std::invalid_argument("pclass: bad tag line");
  auto tag = tag_from_name(tagtok[1]);
  if (!tag) throw std::invalid_argument("pclass: unknown tag " + tagtok[1]);
  std::vector<long long> params;
  for (std::size_t i = 2; i < tagtok.size(); ++i)
    params.push_back(std::stoll(tagtok[i]));

  switch (*tag) {
    case ClassTag::kSingleton: return build_singletons(k, h);
    case ClassTag::kLton: return build_ltons(k, h, static_cast<int>(params.at(2)));
    case ClassTag::kOneActive: return build_one_active(k, h);
    case ClassTag::kAllActive: return build_all_active(k, h);
    case ClassTag::kTabular: return build_tabular(k, h, a);
    case ClassTag::kCbChain: return build_cb_chain(h, a);
    case ClassTag::kThreshold: return build_threshold(k, h);
    case ClassTag::kPiEll:
    case ClassTag::kExplicit: break;
  }

  auto u = std::make_shared<PolicyUniverse>(
      PolicyUniverse{std::vector<int>(h, k), a});
  std::vector<Policy> members;
  while (std::getline(is, line)) {
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] != "m" || tok.size() < 2 || tok[1] != ":")
      throw std::invalid_argument("pclass: bad member row");
    if (static_cast<int>(tok.size()) - 2 != k * h)
      throw std::invalid_argument("pclass: wrong member row length");
    std::vector<std::vector<std::uint8_t>> t(h, std::vector<std::uint8_t>(k));
    for (int flat = 0; flat < k * h; ++flat)
      t[flat / k][flat % k] = static_cast<std::uint8_t>(to_int(tok[flat + 2]));
    members.emplace_back(u, std::move(t));
  }
  return PolicyClass(u, std::move(members), *tag, params);
}

void save_policy_class(const std::string& path, const PolicyClass& pc) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  write_policy_class(f, pc);
}

PolicyClass load_policy_class(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return read_policy_class(f);
}

}  // namespace agrl
