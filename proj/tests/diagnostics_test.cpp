#include <doctest.h>

#include <cmath>

#include "sidm/diagnostics.hpp"
#include "sidm/random.hpp"
#include "support.hpp"

using namespace sidm;

namespace {

std::vector<std::vector<double>> normal_chains(int chains, int n, std::uint64_t seed) {
  std::vector<std::vector<double>> out(chains);
  for (int c = 0; c < chains; ++c) {
    Stream rng(seed, c);
    for (int i = 0; i < n; ++i) out[c].push_back(rng.normal());
  }
  return out;
}

}  // namespace

TEST_CASE("split R-hat of independent normal chains is close to 1") {
  const auto ch = normal_chains(2, 5000, 1);
  const double r = split_rhat(ch);
  CHECK(r >= 0.99);
  CHECK(r <= 1.01);
  const double ess = bulk_ess(ch);
  CHECK(ess > 7000.0);
  CHECK(ess < 13000.0);
}

TEST_CASE("split R-hat flags chains stuck in different places") {
  auto ch = normal_chains(2, 1000, 2);
  for (double& v : ch[1]) v += 3.0;
  CHECK(split_rhat(ch) > 1.5);
  auto drift = normal_chains(2, 1000, 3);
  for (auto& c : drift)
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += 5.0 * static_cast<double>(i) / c.size();
  CHECK(split_rhat(drift) > 1.1);
}

TEST_CASE("autocorrelated chains have small ESS") {
  std::vector<std::vector<double>> ch(2);
  for (int c = 0; c < 2; ++c) {
    Stream rng(4, c);
    double x = 0.0;
    for (int i = 0; i < 5000; ++i) {
      x = 0.95 * x + std::sqrt(1 - 0.95 * 0.95) * rng.normal();
      ch[c].push_back(x);
    }
  }
  // AR(1) with phi 0.95: ESS ~ n (1 - phi) / (1 + phi).
  const double ess = bulk_ess(ch);
  CHECK(ess > 150.0);
  CHECK(ess < 400.0);
}

TEST_CASE("constant draws give a degenerate ESS") {
  const std::vector<std::vector<double>> ch(2, std::vector<double>(100, 3.0));
  CHECK(std::isnan(bulk_ess(ch)));
  PosteriorDraws d;
  for (int c = 0; c < 2; ++c) {
    d.chains.emplace_back();
    for (int i = 0; i < 20; ++i) d.chains.back().draws.push_back({c, i, 0.0, ModelState::initial(2, 0)});
  }
  const DiagnosticsReport r = diagnostics(d);
  CHECK(r.at("gamma").ess_degenerate);
  CHECK(r.at("gamma").sd == 0.0);
  CHECK(r.at("gamma").q025 == r.at("gamma").q975);
}

TEST_CASE("type 7 quantiles") {
  CHECK(quantile({1, 2, 3, 4, 5}, 0.5) == 3.0);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(quantile({0, 10}, 0.25) == doctest::Approx(2.5));
  Stream rng(5, 0);
  std::vector<double> u(100000);
  for (double& v : u) v = rng.uniform();
  CHECK(std::abs(quantile(u, 0.025) - 0.025) < 0.01);
  CHECK(std::abs(quantile(u, 0.975) - 0.975) < 0.01);
}

TEST_CASE("single chain omits R-hat with a notice") {
  PosteriorDraws d;
  d.chains.emplace_back();
  Stream rng(6, 0);
  for (int i = 0; i < 50; ++i) {
    ModelState m = ModelState::initial(2, 0);
    m.mix.gamma = rng.uniform();
    d.chains[0].draws.push_back({0, i, 0.0, m});
  }
  const DiagnosticsReport r = diagnostics(d);
  CHECK_FALSE(r.at("gamma").rhat.has_value());
  CHECK_FALSE(r.notices.empty());
  CHECK(std::isnan(r.max_rhat()));
}

TEST_CASE("report names and values line up and invert") {
  ModelState m = testing::state(testing::weibull(0.9, 0.3, {0.2, -0.1}), testing::weibull(0.8, 0.4, {0.5, 0.07}),
                                testing::weibull(1.2, 2.0, {-0.6, 0.05}), 3);
  Stream rng(7, 0);
  for (Eigen::Index i = 0; i < m.effects.size(); ++i) m.effects.data()[i] = rng.normal();
  m.mix.gamma = 0.3;
  m.between.precisions = {2.0, 3.0, 4.0};
  m.between.correlations = {0.1, -0.2, 0.3};
  const auto names = report_names(3, {"sex", "age"});
  const auto values = report_values(m);
  REQUIRE(names.size() == values.size());
  CHECK(names.size() == 3 * 5 + 7 + 9);
  CHECK(names[0] == "alpha[FR]");
  CHECK(values[0] == 0.9);
  CHECK(names[1] == "lambda[FR]");
  CHECK(values[1] == doctest::Approx(0.3));
  CHECK(names[3] == "beta[FR,sex]");
  CHECK(names[15] == "gamma");
  CHECK(values[15] == 0.3);
  CHECK(names[16] == "tau[FR]");
  CHECK(names[21] == "rho[FD,RD]");
  CHECK(values[21] == 0.3);
  CHECK(names[22] == "b[FR,1]");
  CHECK(names.back() == "b[RD,3]");
  CHECK(values.back() == m.effects(2, 2));
  CHECK(report_names(3, {"sex"}, false).size() == 3 * 4 + 7);

  const ModelState back = state_from_report(values, 3, 2);
  CHECK(report_values(back) == values);
}

TEST_CASE("diagnostics summarize draws and acceptance") {
  PosteriorDraws d;
  for (int c = 0; c < 2; ++c) {
    d.chains.emplace_back();
    Stream rng(8, c);
    for (int i = 0; i < 4000; ++i) {
      ModelState m = ModelState::initial(1, 0);
      m.mix.gamma = 0.5 + 0.1 * rng.normal();
      d.chains.back().draws.push_back({c, i, 0.0, m});
    }
    d.chains.back().acceptance = {{"gamma", 0.4 + 0.01 * c}};
  }
  const DiagnosticsReport r = diagnostics(d);
  const auto& g = r.at("gamma");
  CHECK(g.mean == doctest::Approx(0.5).epsilon(0.01));
  CHECK(g.sd == doctest::Approx(0.1).epsilon(0.05));
  CHECK(g.q025 == doctest::Approx(0.5 - 0.196).epsilon(0.02));
  CHECK(g.rhat.has_value());
  CHECK(r.acceptance.size() == 2);
  CHECK(std::get<2>(r.acceptance[1]) == doctest::Approx(0.41));
  CHECK_THROWS(r.at("nope"));
}
