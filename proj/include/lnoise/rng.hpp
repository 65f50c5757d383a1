#pragma once

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cstdint>
#include <random>

namespace lnoise {

// Boost distributions are used instead of the std ones because their output is
// specified by the algorithm, so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double normal() { return normal_(eng_); }
  double uniform(double lo, double hi) {
    return boost::random::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  std::uint64_t uniform_index(std::uint64_t count) {
    return boost::random::uniform_int_distribution<std::uint64_t>(0, count - 1)(eng_);
  }
  template <class V>
  void fill_normal(V& v) {
    for (auto i = decltype(v.size()){0}; i < v.size(); ++i) v[i] = normal_(eng_);
  }

 private:
  std::mt19937_64 eng_;
  boost::random::normal_distribution<double> normal_;
};

/// Derives independent stream seeds from a base seed (splitmix64 finaliser).
inline std::uint64_t stream_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace lnoise
