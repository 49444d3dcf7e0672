#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sidm/error.hpp"
#include "sidm/simulate.hpp"
#include "support.hpp"

using namespace sidm;
using sidm::testing::weibull;

namespace {

SimConfig plain_config(double fr, double fd, double rd, int n, std::uint64_t seed) {
  SimConfig c;
  c.params = {weibull(1, fr), weibull(1, fd), weibull(1, rd)};
  c.covariates.clear();
  c.effects = RandomEffects::Zero(1, 3);
  c.horizon = std::numeric_limits<double>::infinity();
  c.n_subjects = n;
  c.seed = seed;
  return c;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size()), m = (n - 1) / 2;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - m) * (rb[i] - m);
    saa += (ra[i] - m) * (ra[i] - m);
    sbb += (rb[i] - m) * (rb[i] - m);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("competing exponential exits") {
  const SimResult r = simulate_cohort(plain_config(1, 1, 1, 100000, 1));
  REQUIRE(r.subjects.size() == 100000);
  double t = 0.0, refr = 0.0;
  for (const auto& s : r.subjects) {
    CHECK_NOTHROW(s.validate(0));
    t += s.t1;
    refr += s.e1 == FirstExit::refracture;
    if (s.e1 == FirstExit::refracture) {
      REQUIRE(s.t2.has_value());
      CHECK(*s.e2 == SecondExit::death);
    } else {
      CHECK(s.e1 == FirstExit::death);
      CHECK_FALSE(s.t2.has_value());
    }
  }
  CHECK(std::abs(t / 1e5 - 0.5) < 0.01);
  CHECK(std::abs(refr / 1e5 - 0.5) < 0.005);
}

TEST_CASE("a tiny horizon censors nearly everyone in F") {
  SimConfig c = plain_config(1, 1, 1, 10000, 2);
  c.horizon = 1e-4;
  const SimResult r = simulate_cohort(c);
  int censored = 0;
  for (const auto& s : r.subjects) {
    censored += s.e1 == FirstExit::censored;
    CHECK(s.t1 <= 1e-4);
  }
  CHECK(censored >= 9990);
}

TEST_CASE("censoring after refracture uses the remaining follow-up") {
  SimConfig c = plain_config(2, 0.1, 0.2, 5000, 3);
  c.horizon = 1.0;
  for (const auto& s : simulate_cohort(c).subjects) {
    if (s.e1 != FirstExit::refracture) continue;
    CHECK(s.t1 + *s.t2 <= 1.0 + 1e-12);
    if (*s.e2 == SecondExit::censored) CHECK(s.t1 + *s.t2 == doctest::Approx(1.0));
  }
  c.horizon = std::numeric_limits<double>::infinity();
  c.dropout_rate = 1.0;
  int censored = 0;
  for (const auto& s : simulate_cohort(c).subjects) censored += s.e1 == FirstExit::censored;
  // Dropout competes with rates 2 and 0.1 in F.
  CHECK(std::abs(censored / 5000.0 - 1.0 / 3.1) < 0.03);
}

TEST_CASE("empirical outcomes") {
  const SimResult r = simulate_cohort(plain_config(0.5, 0.5, 1, 100000, 4));
  const auto rows = empirical_outcomes(r.subjects, {0.0, 1.0, 2.0});
  auto get = [&](double t, Measure m) {
    for (const auto& row : rows)
      if (row.time == t && row.measure == m) return row;
    FAIL("missing row");
    return EmpiricalRow{};
  };
  CHECK(get(0.0, Measure::S1).value == 1.0);
  CHECK(get(0.0, Measure::p11).value == 1.0);
  for (Measure m : {Measure::p12, Measure::p13, Measure::F12, Measure::F13}) CHECK(get(0.0, m).value == 0.0);
  for (double t : {1.0, 2.0}) {
    CHECK(get(t, Measure::p11).value + get(t, Measure::p12).value + get(t, Measure::p13).value ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(get(t, Measure::S1).value + get(t, Measure::F12).value + get(t, Measure::F13).value ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  const EmpiricalRow p12 = get(1.0, Measure::p12);
  CHECK(p12.se == doctest::Approx(std::sqrt(p12.value * (1 - p12.value) / 1e5)));
  CHECK(std::abs(p12.value - 0.5 * std::exp(-1.0)) < 3.0 * p12.se);

  SimConfig c = plain_config(1, 1, 1, 100, 5);
  c.horizon = 1.0;
  const SimResult censored = simulate_cohort(c);
  CHECK_THROWS_AS(empirical_outcomes(censored.subjects, {2.0}), DataError);
}

TEST_CASE("state-F exit times pass a Kolmogorov-Smirnov test") {
  SimConfig c = plain_config(0, 0, 1, 10000, 6);
  c.params = {weibull(0.7, 0.4), weibull(1.4, 0.3), weibull(1, 1)};
  const SimResult r = simulate_cohort(c);
  std::vector<double> t;
  for (const auto& s : r.subjects) t.push_back(s.t1);
  std::sort(t.begin(), t.end());
  const double n = static_cast<double>(t.size());
  double d = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double f = 1.0 - std::exp(-0.4 * std::pow(t[i], 0.7) - 0.3 * std::pow(t[i], 1.4));
    d = std::max({d, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  // Asymptotic 1% critical value.
  CHECK(d < 1.628 / std::sqrt(n));
}

TEST_CASE("region hazard ratios track the simulated effects") {
  SimConfig c;
  c.graph = SpatialGraph::grid(5, 5);
  c.params = {weibull(1, 0.3), weibull(1, 0.3), weibull(1, 0.5)};
  c.covariates.clear();
  c.mix.gamma = 0.8;
  c.between.precisions = {4.0, 4.0, 4.0};
  c.n_subjects = 100000;
  c.seed = 7;
  const SimResult r = simulate_cohort(c);
  for (int j = 0; j < 2; ++j) {
    std::vector<double> events(25, 0.0), exposure(25, 0.0);
    for (const auto& s : r.subjects) {
      exposure[s.region] += s.t1;
      events[s.region] += s.e1 == (j == 0 ? FirstExit::refracture : FirstExit::death);
    }
    std::vector<double> log_rate, truth;
    for (int k = 0; k < 25; ++k) {
      log_rate.push_back(std::log(events[k] / exposure[k]));
      truth.push_back(r.truth.state.effects(k, j));
    }
    CHECK(spearman(log_rate, truth) > 0.5);
  }
}

TEST_CASE("covariates follow their generators") {
  SimConfig c = plain_config(1, 1, 1, 50000, 8);
  c.covariates = default_covariates();
  c.params[0].coefficients = Eigen::VectorXd::Zero(2);
  c.params[1].coefficients = Eigen::VectorXd::Zero(2);
  c.params[2].coefficients = Eigen::VectorXd::Zero(2);
  const SimResult r = simulate_cohort(c);
  double sex = 0.0, age_min = 1e9;
  for (const auto& s : r.subjects) {
    sex += s.covariates(0);
    CHECK((s.covariates(0) == 0.0 || s.covariates(0) == 1.0));
    age_min = std::min(age_min, s.covariates(1));
  }
  CHECK(std::abs(sex / 50000 - 0.748) < 0.01);
  CHECK(age_min >= 65.0);
  REQUIRE(r.truth.centers.size() == 2);
  CHECK(r.truth.centers[1] == 83.4);
}

TEST_CASE("simulation is deterministic and thread independent") {
  SimConfig c;
  c.graph = SpatialGraph::grid(3, 3);
  c.params = {weibull(0.9, 0.03, {0.02, 0.02}), weibull(0.8, 0.3, {-0.5, 0.07}), weibull(0.6, 0.6, {-0.6, 0.05})};
  c.n_subjects = 2000;
  c.seed = 9;
  const SimResult a = simulate_cohort(c);
  c.threads = 3;
  const SimResult b = simulate_cohort(c);
  CHECK(a.subjects == b.subjects);
  CHECK(a.truth.state.effects == b.truth.state.effects);
  c.seed = 10;
  CHECK_FALSE(simulate_cohort(c).subjects == a.subjects);
  for (const auto& s : a.subjects) {
    CHECK(s.region >= 0);
    CHECK(s.region < 9);
  }
}

TEST_CASE("configuration validation") {
  SimConfig c = plain_config(1, 1, 1, 10, 1);
  c.horizon = 0.0;
  CHECK_THROWS_AS(simulate_cohort(c), ConfigError);
  c = plain_config(1, 1, 1, 0, 1);
  CHECK_THROWS_AS(simulate_cohort(c), ConfigError);
  c = plain_config(1, 1, 1, 10, 1);
  c.effects = RandomEffects::Zero(2, 3);
  CHECK_THROWS_AS(simulate_cohort(c), ConfigError);
  c = plain_config(1, 1, 1, 10, 1);
  c.region_weights = {1.0, 2.0};
  CHECK_THROWS_AS(simulate_cohort(c), ConfigError);
}
