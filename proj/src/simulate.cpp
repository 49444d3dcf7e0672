#include "sidm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "sidm/error.hpp"
#include "sidm/gmrf.hpp"
#include "sidm/random.hpp"

namespace sidm {
namespace {

constexpr std::uint64_t kEffectsStream = 0x5eed0000ULL;
constexpr std::uint64_t kSubjectStreamBase = 1ULL << 32;

double draw_covariate(const CovariateSpec& s, Stream& rng) {
  if (s.kind == CovariateSpec::Kind::bernoulli) return rng.uniform() < s.probability ? 1.0 : 0.0;
  for (;;) {
    const double v = s.mean + s.sd * rng.normal();
    if (!s.lower || v >= *s.lower) return v;
  }
}

int draw_region(const std::vector<double>& cumulative, int n, Stream& rng) {
  if (cumulative.empty()) return std::min(static_cast<int>(rng.uniform() * n), n - 1);
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<int>(it - cumulative.begin()), n - 1);
}

Subject simulate_subject(const SimConfig& c, const ModelState& m, const std::vector<double>& cumulative,
                         std::uint64_t i) {
  Stream rng(c.seed, kSubjectStreamBase + i);
  Subject s;
  s.region = draw_region(cumulative, c.graph.n_regions(), rng);
  const int l = static_cast<int>(c.covariates.size());
  s.covariates.resize(l);
  Eigen::VectorXd x(l);
  for (int k = 0; k < l; ++k) {
    s.covariates[k] = draw_covariate(c.covariates[k], rng);
    x[k] = s.covariates[k] - c.covariates[k].center;
  }
  const auto eta_fr = linear_predictor(m, Transition::FR, x, s.region);
  const auto eta_fd = linear_predictor(m, Transition::FD, x, s.region);
  const double t_fr = inv_cum_hazard(m[Transition::FR], eta_fr, rng.exponential());
  const double t_fd = inv_cum_hazard(m[Transition::FD], eta_fd, rng.exponential());
  double censor = c.horizon;
  if (c.dropout_rate > 0.0) censor = std::min(censor, rng.exponential() / c.dropout_rate);
  const double t_rd_u = rng.exponential();

  const double exit = std::min(t_fr, t_fd);
  if (exit >= censor) {
    s.t1 = censor;
    s.e1 = FirstExit::censored;
    return s;
  }
  s.t1 = exit;
  if (t_fd <= t_fr) {
    s.e1 = FirstExit::death;
    return s;
  }
  s.e1 = FirstExit::refracture;
  const auto eta_rd = linear_predictor(m, Transition::RD, x, s.region);
  const double t_rd = inv_cum_hazard(m[Transition::RD], eta_rd, t_rd_u);
  const double remaining = censor - exit;
  if (t_rd >= remaining) {
    s.t2 = remaining;
    s.e2 = SecondExit::censored;
  } else {
    s.t2 = t_rd;
    s.e2 = SecondExit::death;
  }
  return s;
}

}  // namespace

void CovariateSpec::validate() const {
  if (name.empty()) throw ConfigError("covariate name must be nonempty");
  if (kind == Kind::bernoulli && !(probability >= 0.0 && probability <= 1.0))
    throw ConfigError("covariate '" + name + "': probability must lie in [0, 1]");
  if (kind == Kind::normal && !(sd > 0.0 && std::isfinite(mean)))
    throw ConfigError("covariate '" + name + "': need finite mean and sd > 0");
  if (!std::isfinite(center)) throw ConfigError("covariate '" + name + "': center not finite");
}

std::vector<CovariateSpec> default_covariates() {
  CovariateSpec sex{"sex", CovariateSpec::Kind::bernoulli, 0.748, 0.0, 1.0, std::nullopt, 0.0};
  CovariateSpec age{"age", CovariateSpec::Kind::normal, 0.5, 83.4, 6.0, 65.0, 83.4};
  return {sex, age};
}

void SimConfig::validate() const {
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (!(dropout_rate >= 0.0) || !std::isfinite(dropout_rate))
    throw ConfigError("dropout_rate must be finite and >= 0");
  if (n_subjects < 1) throw ConfigError("n_subjects must be >= 1");
  if (graph.n_regions() < 1) throw ConfigError("graph has no regions");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  for (const auto& cv : covariates) cv.validate();
  for (std::size_t a = 0; a < covariates.size(); ++a)
    for (std::size_t b = a + 1; b < covariates.size(); ++b)
      if (covariates[a].name == covariates[b].name)
        throw ConfigError("duplicate covariate name '" + covariates[a].name + "'");
  const int l = static_cast<int>(covariates.size());
  try {
    for (const auto& p : params) p.validate(l);
    mix.validate();
    between.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (effects && (effects->rows() != graph.n_regions() || effects->cols() != kTransitions))
    throw ConfigError("fixed effects must be regions x 3");
  if (!region_weights.empty()) {
    if (static_cast<int>(region_weights.size()) != graph.n_regions())
      throw ConfigError("region_weights must have one entry per region");
    double total = 0.0;
    for (double w : region_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("region weights must be finite and >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw ConfigError("region weights sum to zero");
  }
}

SimResult simulate_cohort(const SimConfig& c) {
  c.validate();
  SimResult out;
  ModelState& m = out.truth.state;
  m.params = c.params;
  m.mix = c.mix;
  m.between = c.between;
  if (c.effects) {
    m.effects = *c.effects;
  } else {
    Stream rng(c.seed, kEffectsStream);
    m.effects = sample(joint_precision(within_precision(c.graph, c.mix), c.between), rng);
  }
  for (const auto& cv : c.covariates) out.truth.centers.push_back(cv.center);

  std::vector<double> cumulative;
  if (!c.region_weights.empty()) {
    cumulative.resize(c.region_weights.size());
    std::partial_sum(c.region_weights.begin(), c.region_weights.end(), cumulative.begin());
  }

  const std::size_t n = static_cast<std::size_t>(c.n_subjects);
  out.subjects.resize(n);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(c.threads), n);
  auto work = [&](std::size_t w) {
    for (std::size_t i = w; i < n; i += workers) out.subjects[i] = simulate_subject(c, m, cumulative, i);
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  return out;
}

std::vector<EmpiricalRow> empirical_outcomes(const std::vector<Subject>& data,
                                             const std::vector<double>& times) {
  if (data.empty()) throw DataError("empirical_outcomes: no subjects");
  if (times.empty()) return {};
  const double t_max = *std::max_element(times.begin(), times.end());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Subject& s = data[i];
    const bool censored = s.e1 == FirstExit::censored ||
                          (s.e1 == FirstExit::refracture && s.e2 == SecondExit::censored);
    const double end = s.t1 + s.t2.value_or(0.0);
    if (censored && end < t_max)
      throw DataError("empirical_outcomes: subject " + std::to_string(i + 1) +
                      " is censored before the last grid time");
  }
  const double n = static_cast<double>(data.size());
  std::vector<EmpiricalRow> rows;
  for (double t : times) {
    double in_f = 0, in_r = 0, f12 = 0, f13 = 0;
    for (const Subject& s : data) {
      if (s.t1 > t) {
        ++in_f;
        continue;
      }
      if (s.e1 == FirstExit::refracture) {
        ++f12;
        if (s.e2 == SecondExit::censored || s.t1 + *s.t2 > t) ++in_r;
      } else {
        ++f13;
      }
    }
    auto add = [&](Measure m, double count) {
      const double p = count / n;
      rows.push_back({t, m, p, std::sqrt(p * (1.0 - p) / n)});
    };
    add(Measure::S1, in_f);
    add(Measure::p11, in_f);
    add(Measure::p12, in_r);
    add(Measure::p13, n - in_f - in_r);
    add(Measure::F12, f12);
    add(Measure::F13, f13);
  }
  return rows;
}

}  // namespace sidm
