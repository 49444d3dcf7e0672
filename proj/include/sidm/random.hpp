#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace sidm {

/// Counter-based random stream. Output n is a keyed bijective mix of n, so a
/// stream is fully determined by (seed, stream id) and streams never share state.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal() { return normal_(*this); }
  double exponential() { return exponential_(*this); }
  double chi_squared(double df);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_;
  std::exponential_distribution<double> exponential_;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace sidm
