#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sidm/error.hpp"
#include "sidm/likelihood.hpp"
#include "sidm/outcomes.hpp"
#include "sidm/random.hpp"
#include "support.hpp"

using namespace sidm;
using sidm::testing::state;
using sidm::testing::subject;
using sidm::testing::weibull;

namespace {

ModelState unit_exponential() { return state(weibull(1, 1), weibull(1, 1), weibull(1, 1)); }

// Straight-line oracle: each case written out from the Weibull closed forms.
double naive_loglik(const Subject& s, const ModelState& m) {
  auto eta = [&](int j) {
    return m.params[j].coefficients.dot(s.covariates) + m.effects(s.region, j);
  };
  auto lam = [&](int j, double t) {
    return std::exp(m.params[j].intercept + eta(j)) * std::pow(t, m.params[j].shape);
  };
  auto logh = [&](int j, double t) {
    return std::log(m.params[j].shape) + m.params[j].intercept + (m.params[j].shape - 1.0) * std::log(t) + eta(j);
  };
  double ll = -lam(0, s.t1) - lam(1, s.t1);
  if (s.e1 == FirstExit::death) ll += logh(1, s.t1);
  if (s.e1 == FirstExit::refracture) {
    ll += logh(0, s.t1) - lam(2, *s.t2);
    if (*s.e2 == SecondExit::death) ll += logh(2, *s.t2);
  }
  return ll;
}

ModelState random_state(Stream& rng, int k, int l) {
  ModelState m = ModelState::initial(k, l);
  for (auto& p : m.params) {
    p.shape = 0.5 + 1.5 * rng.uniform();
    p.intercept = -2.0 + 2.0 * rng.uniform();
    for (int c = 0; c < l; ++c) p.coefficients(c) = 0.5 * rng.normal();
  }
  for (Eigen::Index i = 0; i < m.effects.size(); ++i) m.effects.data()[i] = 0.3 * rng.normal();
  return m;
}

std::vector<Subject> random_cohort(Stream& rng, int n, int k, int l) {
  std::vector<Subject> out;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(l);
    for (int c = 0; c < l; ++c) x(c) = rng.normal();
    const int region = static_cast<int>(rng.uniform() * k);
    const double u = rng.uniform();
    const double t1 = 0.05 + 5.0 * rng.uniform();
    if (u < 0.3) out.push_back(subject(t1, FirstExit::censored, {}, {}, x, region));
    else if (u < 0.6) out.push_back(subject(t1, FirstExit::death, {}, {}, x, region));
    else
      out.push_back(subject(t1, FirstExit::refracture, 0.05 + 3.0 * rng.uniform(),
                            u < 0.8 ? SecondExit::censored : SecondExit::death, x, region));
  }
  return out;
}

}  // namespace

TEST_CASE("subject log-likelihood closed-form cases") {
  const ModelState m = unit_exponential();
  CHECK(subject_loglik(subject(1.0, FirstExit::censored), m) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(subject_loglik(subject(1.0, FirstExit::death), m) == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(subject_loglik(subject(1.0, FirstExit::refracture, 1.0, SecondExit::death), m) ==
        doctest::Approx(-3.0).epsilon(1e-15));
  CHECK(subject_loglik(subject(1.0, FirstExit::refracture, 1.0, SecondExit::censored), m) ==
        doctest::Approx(-3.0).epsilon(1e-15));
}

TEST_CASE("the R to D clock restarts at refracture") {
  ModelState m = state(weibull(1, 1), weibull(1, 1), weibull(2.0, 1.0));
  const double a = subject_loglik(subject(0.5, FirstExit::refracture, 1.0, SecondExit::death), m);
  const double b = subject_loglik(subject(3.0, FirstExit::refracture, 1.0, SecondExit::death), m);
  // Only the F-exit part differs: the R->D contribution depends on t2 alone.
  CHECK(a - b == doctest::Approx(-2.0 * 0.5 + 2.0 * 3.0).epsilon(1e-14));
}

TEST_CASE("invalid subjects are data errors") {
  const ModelState m = unit_exponential();
  CHECK_THROWS_AS(subject_loglik(subject(0.0, FirstExit::death), m), DataError);
  CHECK_THROWS_AS(subject_loglik(subject(-1.0, FirstExit::death), m), DataError);
  CHECK_THROWS_AS(subject_loglik(subject(1.0, FirstExit::refracture), m), DataError);
  CHECK_THROWS_AS(subject_loglik(subject(1.0, FirstExit::death, 1.0, SecondExit::death), m), DataError);
  CHECK_THROWS_AS(subject_loglik(subject(1.0, FirstExit::refracture, 0.0, SecondExit::death), m), DataError);
  CHECK_THROWS_AS(subject_loglik(subject(1.0, FirstExit::death, {}, {}, Eigen::VectorXd::Ones(2)), m), DataError);
}

TEST_CASE("cohort log-likelihood sums, reorders and threads consistently") {
  const ModelState m = unit_exponential();
  CHECK(cohort_loglik({}, m) == 0.0);
  const Subject s = subject(0.7, FirstExit::refracture, 0.3, SecondExit::death);
  const std::vector<Subject> two{s, s};
  CHECK(cohort_loglik(two, m) == doctest::Approx(2.0 * subject_loglik(s, m)).epsilon(1e-15));

  Stream rng(3, 0);
  const ModelState r = random_state(rng, 4, 2);
  std::vector<Subject> data = random_cohort(rng, 1000, 4, 2);
  double naive = 0.0;
  for (const auto& x : data) naive += naive_loglik(x, r);
  const double serial = cohort_loglik(data, r, 1);
  CHECK(std::abs(serial - naive) <= 1e-10 * std::abs(naive));
  CHECK(cohort_loglik(data, r, 4) == serial);
  std::reverse(data.begin(), data.end());
  CHECK(std::abs(cohort_loglik(data, r) - serial) <= 1e-10 * std::abs(serial));
  const std::span<const Subject> all(data);
  const double split = cohort_loglik(all.subspan(0, 333), r) + cohort_loglik(all.subspan(333), r);
  CHECK(std::abs(split - serial) <= 1e-10 * std::abs(serial));
}

TEST_CASE("column-wise transition likelihood agrees with the subject form") {
  Stream rng(8, 0);
  const ModelState r = random_state(rng, 3, 2);
  const auto data = random_cohort(rng, 300, 3, 2);
  const CohortData cd = CohortData::from_subjects(data, 2);
  double total = 0.0;
  for (Transition j : kAllTransitions) total += transition_loglik(cd.transitions[index(j)], r[j], r.effects.col(index(j)));
  CHECK(total == doctest::Approx(cohort_loglik(data, r)).epsilon(1e-12));
  CHECK(cd.n_subjects == 300);
}

TEST_CASE("exp of the censored-in-F contribution is the sojourn survival") {
  Stream rng(4, 0);
  for (int i = 0; i < 20; ++i) {
    const ModelState r = random_state(rng, 2, 1);
    Eigen::VectorXd x(1);
    x << rng.normal();
    const double t = 0.1 + 4.0 * rng.uniform();
    const Subject s = subject(t, FirstExit::censored, {}, {}, x, 1);
    const Profile p{"p", x, 1};
    CHECK(std::abs(std::exp(subject_loglik(s, r)) - sojourn_survival(r, p, t)) < 1e-10);
  }
}

TEST_CASE("analytic log-likelihood gradient matches central differences") {
  Stream rng(10, 0);
  const int k = 3, l = 2;
  const ModelState m = random_state(rng, k, l);
  const auto data = random_cohort(rng, 200, k, l);
  const CohortData cd = CohortData::from_subjects(data, l);
  const StateGradient g = cohort_loglik_gradient(cd, m);
  auto f = [&](const ModelState& s) { return cohort_loglik(data, s); };
  auto check = [&](double analytic, auto&& perturb) {
    const double h = 1e-5;
    ModelState up = m, dn = m;
    perturb(up, h);
    perturb(dn, -h);
    const double fd = (f(up) - f(dn)) / (2.0 * h);
    CHECK(std::abs(fd - analytic) <= 1e-4 * std::max(1.0, std::abs(analytic)));
  };
  for (int j = 0; j < 3; ++j) {
    check(g.params[j].intercept, [&](ModelState& s, double h) { s.params[j].intercept += h; });
    check(g.params[j].log_shape, [&](ModelState& s, double h) { s.params[j].shape *= std::exp(h); });
    for (int c = 0; c < l; ++c)
      check(g.params[j].coefficients(c), [&](ModelState& s, double h) { s.params[j].coefficients(c) += h; });
    for (int r = 0; r < k; ++r) check(g.effects(r, j), [&](ModelState& s, double h) { s.effects(r, j) += h; });
  }
}

TEST_CASE("centering subtracts cohort means of flagged columns and can reuse constants") {
  std::vector<Subject> data;
  for (double age : {70.0, 80.0, 90.0}) {
    Eigen::Vector2d x(1.0, age);
    data.push_back(subject(1.0, FirstExit::censored, {}, {}, x));
  }
  auto copy = data;
  const auto c = center_covariates(data, {false, true});
  CHECK(c[0] == 0.0);
  CHECK(c[1] == doctest::Approx(80.0));
  CHECK(data[0].covariates(1) == doctest::Approx(-10.0));
  CHECK(data[0].covariates(0) == 1.0);
  const std::vector<double> given{0.0, 75.0};
  center_covariates(copy, {false, true}, &given);
  CHECK(copy[0].covariates(1) == doctest::Approx(-5.0));
}

TEST_CASE("model state validation and initial state") {
  const ModelState m = ModelState::initial(4, 2);
  CHECK(m.n_regions() == 4);
  CHECK(m.n_covariates() == 2);
  CHECK(m.mix.gamma == 0.5);
  CHECK(m[Transition::RD].shape == 1.0);
  CHECK_NOTHROW(m.validate());
  ModelState bad = m;
  bad[Transition::FD].shape = -1.0;
  CHECK_THROWS(bad.validate());
  CHECK_THROWS_AS(linear_predictor(m, Transition::FR, Eigen::VectorXd::Zero(2), 4), DataError);
}
