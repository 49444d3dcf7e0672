#include "sidm/random.hpp"

namespace sidm {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(mix64(mix64(seed) ^ mix64(stream_id + 0x632BE59BD9B4E019ULL))) {}

Stream::result_type Stream::operator()() {
  ++counter_;
  return mix64(key_ ^ mix64(counter_));
}

double Stream::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::chi_squared(double df) {
  std::chi_squared_distribution<double> dist(df);
  return dist(*this);
}

}  // namespace sidm
