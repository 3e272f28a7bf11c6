#pragma once

#include <cstdint>

#include "pcurve/normal.hpp"

namespace pcurve {

// Counter-based generator: output(i) = mix64(key + (i+1)*gamma).  Jumping to
// any counter position is O(1), so replications can be assigned disjoint
// streams without sequencing constraints.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix64(seed ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 1))), ctr_(0) {}

  std::uint64_t next_u64() {
    ctr_ += 1;
    return mix64(key_ + ctr_ * 0x9e3779b97f4a7c15ULL);
  }

  // uniform on the open interval (0,1); never returns an endpoint
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal(double mean = 0.0, double sd = 1.0) {
    return mean + sd * normal_quantile(uniform01());
  }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
};

} // namespace pcurve
