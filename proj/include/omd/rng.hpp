#pragma once

#include <cmath>
#include <cstdint>

namespace omd {

/// Counter-based splittable pseudo-random generator (splitmix64 core).
///
/// All randomness in the library flows through this type so that runs are
/// reproducible bit-for-bit across platforms. `split` derives an independent
/// stream for a substructure (block index, instance index, ...) without
/// perturbing the parent stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Independent child stream keyed by `stream`.
  Rng split(std::uint64_t stream) const {
    return Rng(mix(state_ + kGamma * (stream + 0x632BE59BD9B4E019ull)));
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in {0, ..., n-1}; n must be positive.
  int next_index(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n)) >>
                            64);
  }

  /// Uniform double in [lo, hi).
  double next_range(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Standard exponential variate; used for Dirichlet(1) rows.
  double next_exp() { return -std::log1p(-next_double()); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  std::uint64_t state_;
};

}  // namespace omd
