#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace agrl {

// Deterministic random stream. All sampling in the library goes through this
// class so that results are bit-identical across platforms and runs: the
// standard <random> distributions are implementation-defined, so we roll the
// few samplers we need on top of splitmix64/xoshiro-style state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {
    // warm up so that small seeds do not produce correlated first draws
    for (int i = 0; i < 4; ++i) next_u64();
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in {0, 1, ..., n-1}
  int uniform_int(int n) {
    if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n)) >>
                            64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // index sampled proportionally to the (nonnegative) weights
  int categorical(std::span<const double> w) {
    double total = 0.0;
    for (double x : w) total += x;
    if (total <= 0.0) throw std::invalid_argument("categorical: empty support");
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      acc += w[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
  }

 private:
  std::uint64_t state_;
};

// Derives a child seed from a master seed and a fan-out path
// (recipe step, replication, worker, ...). Serial and parallel execution see
// the same streams because the derivation depends only on the path.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = master ^ 0xd1b54a32d192ed03ull;
  for (std::uint64_t id : path) {
    h ^= id + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
  }
  return h;
}

inline RngStream derive_stream(std::uint64_t master,
                               std::initializer_list<std::uint64_t> path) {
  return RngStream(derive_seed(master, path));
}

}  // namespace agrl
