#include "sidm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace sidm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::vector<double>> split(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + half);
    out.emplace_back(c.end() - half, c.end());
  }
  return out;
}

std::vector<std::vector<double>> rank_normalize(const std::vector<std::vector<double>>& chains) {
  std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> all;
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (std::size_t i = 0; i < chains[c].size(); ++i) all.push_back({chains[c][i], {c, i}});
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  const double s = static_cast<double>(all.size());
  boost::math::normal_distribution<double> normal;
  auto out = chains;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    const double z = boost::math::quantile(normal, (rank - 0.375) / (s + 0.25));
    for (std::size_t t = i; t < j; ++t) out[all[t].second.first][all[t].second.second] = z;
    i = j;
  }
  return out;
}

double rhat_basic(const std::vector<std::vector<double>>& chains) {
  const double m = static_cast<double>(chains.size());
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    const double mu = std::accumulate(c.begin(), c.end(), 0.0) / n;
    double v = 0.0;
    for (double x : c) v += (x - mu) * (x - mu);
    means.push_back(mu);
    vars.push_back(v / (n - 1.0));
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= n / (m - 1.0);
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
  if (w == 0.0) return kNaN;
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double ess_basic(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  const std::size_t n = chains.front().size();
  std::vector<double> means(m), vars(m);
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = std::accumulate(chains[c].begin(), chains[c].end(), 0.0) / n;
    double v = 0.0;
    for (double x : chains[c]) v += (x - means[c]) * (x - means[c]);
    vars[c] = v / (n - 1.0);
  }
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
  if (!(w > 0.0)) return kNaN;
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double b_over_n = 0.0;
  for (double mu : means) b_over_n += (mu - grand) * (mu - grand);
  b_over_n /= (m > 1 ? m - 1.0 : 1.0);
  const double var_plus = (n - 1.0) / n * w + (m > 1 ? b_over_n : 0.0);

  auto autocov = [&](std::size_t lag) {
    double mean_acov = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i)
        s += (chains[c][i] - means[c]) * (chains[c][i + lag] - means[c]);
      mean_acov += s / n;
    }
    return mean_acov / m;
  };
  auto rho = [&](std::size_t lag) {
    // acov(0) is biased (divides by n); rescale to the unbiased W.
    return 1.0 - (w - autocov(lag) * (lag == 0 ? n / (n - 1.0) : 1.0)) / var_plus;
  };

  // Geyer's initial monotone positive sequence.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < n; t += 2) {
    double pair = rho(t) + rho(t + 1);
    if (pair < 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(m * n)));
  return static_cast<double>(m * n) / tau;
}

bool constant(const std::vector<std::vector<double>>& chains) {
  const double first = chains.front().front();
  for (const auto& c : chains)
    for (double x : c)
      if (x != first) return false;
  return true;
}

}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("split_rhat needs at least two chains");
  for (const auto& c : chains)
    if (c.size() < 4) throw std::invalid_argument("split_rhat needs at least four draws per chain");
  if (constant(chains)) return kNaN;
  const auto s = split(chains);
  const double bulk = rhat_basic(rank_normalize(s));
  double med = 0.0;
  {
    std::vector<double> all;
    for (const auto& c : chains) all.insert(all.end(), c.begin(), c.end());
    med = quantile(all, 0.5);
  }
  auto folded = s;
  for (auto& c : folded)
    for (double& x : c) x = std::abs(x - med);
  const double tail = constant(folded) ? bulk : rhat_basic(rank_normalize(folded));
  return std::max(bulk, tail);
}

double bulk_ess(const std::vector<std::vector<double>>& chains) {
  if (chains.empty() || chains.front().size() < 4) return kNaN;
  if (constant(chains)) return kNaN;
  return ess_basic(rank_normalize(split(chains)));
}

const ParameterSummary& DiagnosticsReport::at(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw std::out_of_range("no parameter named " + name);
}

double DiagnosticsReport::max_rhat(std::span<const std::string> names) const {
  double out = kNaN;
  for (const auto& p : parameters) {
    if (!names.empty() && std::find(names.begin(), names.end(), p.name) == names.end()) continue;
    if (p.rhat && std::isfinite(*p.rhat)) out = std::isnan(out) ? *p.rhat : std::max(out, *p.rhat);
  }
  return out;
}

std::vector<std::string> report_names(int n_regions, const std::vector<std::string>& covariates,
                                      bool include_effects) {
  std::vector<std::string> out;
  for (Transition j : kAllTransitions) {
    const std::string t(transition_name(j));
    out.push_back("alpha[" + t + "]");
    out.push_back("lambda[" + t + "]");
    out.push_back("beta0[" + t + "]");
    for (const auto& c : covariates) out.push_back("beta[" + t + "," + c + "]");
  }
  out.push_back("gamma");
  for (Transition j : kAllTransitions) out.push_back("tau[" + std::string(transition_name(j)) + "]");
  out.push_back("rho[FR,FD]");
  out.push_back("rho[FR,RD]");
  out.push_back("rho[FD,RD]");
  if (include_effects)
    for (Transition j : kAllTransitions)
      for (int k = 0; k < n_regions; ++k)
        out.push_back("b[" + std::string(transition_name(j)) + "," + std::to_string(k + 1) + "]");
  return out;
}

std::vector<double> report_values(const ModelState& m, bool include_effects) {
  std::vector<double> out;
  for (const auto& p : m.params) {
    out.push_back(p.shape);
    out.push_back(p.scale());
    out.push_back(p.intercept);
    for (Eigen::Index l = 0; l < p.coefficients.size(); ++l) out.push_back(p.coefficients(l));
  }
  out.push_back(m.mix.gamma);
  for (double t : m.between.precisions) out.push_back(t);
  for (double r : m.between.correlations) out.push_back(r);
  if (include_effects)
    for (int j = 0; j < kTransitions; ++j)
      for (int k = 0; k < m.n_regions(); ++k) out.push_back(m.effects(k, j));
  return out;
}

ModelState state_from_report(std::span<const double> v, int n_regions, int n_covariates) {
  const std::size_t expected =
      static_cast<std::size_t>(kTransitions * (3 + n_covariates) + 7 + kTransitions * n_regions);
  if (v.size() != expected)
    throw std::invalid_argument("report vector has " + std::to_string(v.size()) + " values, expected " +
                                std::to_string(expected));
  ModelState m;
  std::size_t i = 0;
  for (auto& p : m.params) {
    p.shape = v[i++];
    ++i;  // lambda
    p.intercept = v[i++];
    p.coefficients.resize(n_covariates);
    for (int l = 0; l < n_covariates; ++l) p.coefficients(l) = v[i++];
  }
  m.mix.gamma = v[i++];
  for (double& t : m.between.precisions) t = v[i++];
  for (double& r : m.between.correlations) r = v[i++];
  m.effects.resize(n_regions, kTransitions);
  for (int j = 0; j < kTransitions; ++j)
    for (int k = 0; k < n_regions; ++k) m.effects(k, j) = v[i++];
  return m;
}

DiagnosticsReport diagnostics(const PosteriorDraws& d, bool include_effects) {
  DiagnosticsReport rep;
  if (d.total_draws() == 0) throw std::invalid_argument("diagnostics: no draws");
  const auto names = report_names(d.n_regions(), d.covariate_names, include_effects);
  std::vector<std::vector<std::vector<double>>> per_param(names.size());
  std::size_t n_chains_used = 0;
  for (const auto& c : d.chains) {
    if (c.draws.empty()) continue;
    ++n_chains_used;
    for (auto& pp : per_param) pp.emplace_back();
    for (const auto& draw : c.draws) {
      const auto v = report_values(draw.state, include_effects);
      for (std::size_t p = 0; p < names.size(); ++p) per_param[p].back().push_back(v[p]);
    }
  }
  const bool can_rhat = n_chains_used >= 2;
  if (!can_rhat) rep.notices.push_back("single chain: split-R-hat omitted");
  for (std::size_t p = 0; p < names.size(); ++p) {
    ParameterSummary s;
    s.name = names[p];
    std::vector<double> all;
    for (const auto& c : per_param[p]) all.insert(all.end(), c.begin(), c.end());
    const double n = static_cast<double>(all.size());
    s.mean = std::accumulate(all.begin(), all.end(), 0.0) / n;
    double v = 0.0;
    for (double x : all) v += (x - s.mean) * (x - s.mean);
    s.sd = all.size() > 1 ? std::sqrt(v / (n - 1.0)) : 0.0;
    s.q025 = quantile(all, 0.025);
    s.q975 = quantile(all, 0.975);
    bool long_enough = true;
    for (const auto& c : per_param[p]) long_enough = long_enough && c.size() >= 4;
    if (can_rhat && long_enough) s.rhat = split_rhat(per_param[p]);
    s.ess_bulk = long_enough ? bulk_ess(per_param[p]) : kNaN;
    s.ess_degenerate = !std::isfinite(s.ess_bulk);
    if (s.ess_degenerate) rep.notices.push_back(s.name + ": constant draws, ESS degenerate");
    rep.parameters.push_back(std::move(s));
  }
  for (std::size_t c = 0; c < d.chains.size(); ++c)
    for (const auto& [block, rate] : d.chains[c].acceptance)
      rep.acceptance.emplace_back(static_cast<int>(c), block, rate);
  return rep;
}

}  // namespace sidm
