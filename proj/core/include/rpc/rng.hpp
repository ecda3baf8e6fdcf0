#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace rpc {

/// Deterministic counter-based random stream.
///
/// Every random quantity in the library derives from a single root seed
/// through (seed, stream, counter) triples, so results are reproducible
/// across platforms and independent of evaluation order. The mixing
/// function is the splitmix64 finalizer.
class RandomStream {
 public:
  /// @param seed  root seed from the run configuration
  /// @param stream  fixed identifier of the consumer (one per purpose)
  RandomStream(std::uint64_t seed, std::uint64_t stream)
      : state_(mix(seed ^ 0x9e3779b97f4a7c15ULL) ^ mix(stream)), counter_(0) {}

  /// Next raw 64-bit word.
  std::uint64_t next_u64() { return mix(state_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform double in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller on two uniforms.
  double gaussian();

  /// Uniform direction on the unit sphere in R^dim.
  Eigen::VectorXd unit_vector(int dim);

  /// Independent substream for sample index i; insensitive to call order.
  RandomStream substream(std::uint64_t i) const {
    RandomStream s(0, 0);
    s.state_ = mix(state_ ^ mix(i + 0x632be59bd9b4e019ULL));
    s.counter_ = 0;
    return s;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  std::uint64_t counter_;
};

}  // namespace rpc
