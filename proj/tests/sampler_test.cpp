#include <doctest.h>

#include <cmath>

#include "sidm/diagnostics.hpp"
#include "sidm/sampler.hpp"

using namespace sidm;

namespace {

// Conjugate toy: y_i ~ N(theta, S) with theta ~ N(0, S0); the posterior is Gaussian.
struct Toy {
  Eigen::Matrix2d s_inv, s0_inv;
  Eigen::Vector2d ybar;
  int n;

  Eigen::Matrix2d post_prec() const { return s0_inv + n * s_inv; }
  Eigen::Vector2d post_mean() const { return post_prec().ldlt().solve(n * s_inv * ybar); }
  double log_density(const Eigen::VectorXd& t) const {
    const Eigen::Vector2d d = t - post_mean();
    return -0.5 * d.dot(post_prec() * d);
  }
};

Toy toy() {
  Toy t;
  Eigen::Matrix2d s;
  s << 1.0, 0.6, 0.6, 2.0;
  t.s_inv = s.inverse();
  t.s0_inv = Eigen::Matrix2d::Identity() / 100.0;
  t.ybar << 1.5, -0.7;
  t.n = 20;
  return t;
}

}  // namespace

TEST_CASE("random-walk block recovers a conjugate Gaussian posterior") {
  const Toy t = toy();
  RandomWalkBlock block(2, 0.35);
  Stream rng(4, 0);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  auto f = [&](const Eigen::VectorXd& v) { return t.log_density(v); };
  double lp = f(x);
  for (int i = 0; i < 5000; ++i) {
    block.step(x, lp, f, rng);
    block.observe(x);
  }
  block.set_covariance(block.empirical_covariance());
  for (int i = 0; i < 5000; ++i) block.step(x, lp, f, rng);
  block.set_adapting(false);
  block.reset_counts();
  std::vector<std::vector<double>> c0(1), c1(1);
  for (int i = 0; i < 100000; ++i) {
    block.step(x, lp, f, rng);
    c0[0].push_back(x(0));
    c1[0].push_back(x(1));
  }
  CHECK(std::abs(block.acceptance_rate() - 0.35) < 0.05);
  const Eigen::Vector2d mu = t.post_mean();
  const Eigen::Matrix2d cov = t.post_prec().inverse();
  const std::vector<std::vector<double>>* chains[2] = {&c0, &c1};
  for (int a = 0; a < 2; ++a) {
    const auto& v = (*chains[a])[0];
    double mean = 0.0;
    for (double d : v) mean += d;
    mean /= v.size();
    const double mcse = std::sqrt(cov(a, a) / bulk_ess(*chains[a]));
    CHECK(std::abs(mean - mu(a)) < 3.0 * mcse);
  }
}

TEST_CASE("proposals outside the support are always rejected") {
  RandomWalkBlock block(1, 0.35);
  Stream rng(1, 0);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.1);
  auto f = [](const Eigen::VectorXd& v) { return v(0) > 0 ? -v(0) : -std::numeric_limits<double>::infinity(); };
  double lp = f(x);
  for (int i = 0; i < 10000; ++i) {
    block.step(x, lp, f, rng);
    REQUIRE(x(0) > 0.0);
  }
}

TEST_CASE("quasi-Newton ascent finds the conjugate posterior mode") {
  const Toy t = toy();
  auto f = [&](const Eigen::VectorXd& v) { return t.log_density(v); };
  auto g = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return -t.post_prec() * (v - t.post_mean()); };
  const OptimizeResult r = maximize(f, g, Eigen::VectorXd::Constant(2, 10.0));
  CHECK(r.converged);
  CHECK((r.x - t.post_mean()).cwiseAbs().maxCoeff() < 1e-6);
  const OptimizeResult again = maximize(f, g, r.x);
  CHECK((again.x - r.x).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("quasi-Newton ascent on a curved valley") {
  auto f = [](const Eigen::VectorXd& v) {
    return -(100.0 * std::pow(v(1) - v(0) * v(0), 2) + std::pow(1.0 - v(0), 2));
  };
  auto g = [](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::Vector2d d;
    d(0) = -(-400.0 * v(0) * (v(1) - v(0) * v(0)) - 2.0 * (1.0 - v(0)));
    d(1) = -(200.0 * (v(1) - v(0) * v(0)));
    return d;
  };
  const OptimizeResult r = maximize(f, g, Eigen::Vector2d(-1.2, 1.0));
  CHECK(r.converged);
  CHECK(std::abs(r.x(0) - 1.0) < 1e-5);
  CHECK(std::abs(r.x(1) - 1.0) < 1e-5);
}

TEST_CASE("Bartlett Wishart draws have mean df * scale") {
  Eigen::Matrix3d scale;
  scale << 1.0, 0.5, 0.2, 0.5, 2.0, -0.4, 0.2, -0.4, 0.7;
  const double df = 9.0;
  Stream rng(6, 0);
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  const int n = 100000;
  for (int i = 0; i < n; ++i) acc += sample_wishart(df, scale, rng);
  acc /= n;
  const Eigen::Matrix3d expected = df * scale;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) CHECK(std::abs(acc(a, b) - expected(a, b)) < 0.02 * std::abs(expected(a, b)));
}

TEST_CASE("nearest positive definite floors eigenvalues") {
  Eigen::Matrix2d a;
  a << 1.0, 2.0, 2.0, 1.0;
  const Eigen::MatrixXd p = nearest_positive_definite(a, 1e-3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p);
  CHECK(es.eigenvalues().minCoeff() >= 1e-3 - 1e-12);
  CHECK(nearest_positive_definite(Eigen::Matrix2d::Identity(), 1e-3).isApprox(Eigen::MatrixXd::Identity(2, 2)));
}
