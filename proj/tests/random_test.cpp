#include <doctest.h>

#include <cmath>

#include "sidm/random.hpp"

using sidm::Stream;

TEST_CASE("stream is a pure function of seed and stream id") {
  Stream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool differs_c = false, differs_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    differs_c |= x != c();
    differs_d |= x != d();
  }
  CHECK(differs_c);
  CHECK(differs_d);
}

TEST_CASE("uniform lies in the open unit interval with the right moments") {
  Stream s(1, 0);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sq += u * u;
  }
  const double mean = sum / n;
  CHECK(mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sq / n - mean * mean == doctest::Approx(1.0 / 12.0).epsilon(0.01));
}

TEST_CASE("normal and exponential helpers have unit scale") {
  Stream s(9, 1);
  const int n = 200000;
  double zs = 0.0, zq = 0.0, es = 0.0, cs = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    zs += z;
    zq += z * z;
    es += s.exponential();
    cs += s.chi_squared(4.0);
  }
  CHECK(std::abs(zs / n) < 0.01);
  CHECK(zq / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(es / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(cs / n == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("mix64 is a bijection on a sample") {
  CHECK(sidm::mix64(0) != sidm::mix64(1));
  CHECK(sidm::mix64(12345) == sidm::mix64(12345));
}
