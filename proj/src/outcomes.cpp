#include "sidm/outcomes.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "sidm/diagnostics.hpp"
#include "sidm/error.hpp"

namespace sidm {
namespace {

constexpr double kClampTol = 1e-8;

double checked_probability(double v, std::string_view what) {
  if (std::isnan(v)) throw NumericalError(std::string(what) + " is NaN");
  if (v < -kClampTol || v > 1.0 + kClampTol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << " = " << v << " lies outside [0, 1] beyond tolerance";
    throw NumericalError(msg.str());
  }
  return std::clamp(v, 0.0, 1.0);
}

struct Rates {
  TransitionParams fr, fd, rd;
  LinearPredictor eta_fr, eta_fd, eta_rd;

  Rates(const ModelState& m, const Profile& p)
      : fr(m[Transition::FR]),
        fd(m[Transition::FD]),
        rd(m[Transition::RD]),
        eta_fr(linear_predictor(m, Transition::FR, p.covariates, p.region)),
        eta_fd(linear_predictor(m, Transition::FD, p.covariates, p.region)),
        eta_rd(linear_predictor(m, Transition::RD, p.covariates, p.region)) {}

  double cum_f(double u) const { return cum_hazard(fr, eta_fr, u) + cum_hazard(fd, eta_fd, u); }
  double p11(double s, double u) const { return std::exp(-(cum_f(u) - cum_f(s))); }
  double p22(double s, double t, double t12) const {
    return std::exp(-(cum_hazard(rd, eta_rd, t - t12) - cum_hazard(rd, eta_rd, s - t12)));
  }
  const TransitionParams& params(Transition j) const { return j == Transition::FR ? fr : fd; }
  LinearPredictor eta(Transition j) const { return j == Transition::FR ? eta_fr : eta_fd; }
};

// Integral over [s, t] of g(u) h_j(u) du. From s = 0 with shape < 1 the hazard
// diverges at 0; substituting v = u^shape makes h_j(u) du = lambda e^eta dv.
double integrate_against_hazard(const Rates& r, Transition j, double s, double t,
                                const std::function<double(double)>& g, const QuadratureOptions& q) {
  const TransitionParams& p = r.params(j);
  const LinearPredictor eta = r.eta(j);
  if (s == 0.0 && p.shape < 1.0) {
    const double rate = std::exp(p.intercept + eta.value);
    const double inv = 1.0 / p.shape;
    return rate * integrate([&](double v) { return g(std::pow(v, inv)); }, 0.0, std::pow(t, p.shape), q);
  }
  return integrate([&](double u) { return u <= 0.0 ? 0.0 : g(u) * hazard(p, eta, u); }, s, t, q);
}

double p12(const Rates& r, double s, double t, const QuadratureOptions& q) {
  return integrate_against_hazard(
      r, Transition::FR, s, t, [&](double u) { return r.p11(s, u) * r.p22(u, t, u); }, q);
}

}  // namespace

std::string_view measure_name(Measure m) {
  switch (m) {
    case Measure::S1: return "S1";
    case Measure::p11: return "p11";
    case Measure::p12: return "p12";
    case Measure::p13: return "p13";
    case Measure::p22: return "p22";
    case Measure::p23: return "p23";
    case Measure::F12: return "F12";
    case Measure::F13: return "F13";
  }
  return "?";
}

Measure parse_measure(std::string_view name) {
  for (Measure m : {Measure::S1, Measure::p11, Measure::p12, Measure::p13, Measure::p22, Measure::p23,
                    Measure::F12, Measure::F13})
    if (measure_name(m) == name) return m;
  throw std::invalid_argument("unknown measure '" + std::string(name) + "'");
}

bool needs_t12(Measure m) { return m == Measure::p22 || m == Measure::p23; }

void Profile::validate(const ModelState& m) const {
  if (covariates.size() != m.n_covariates())
    throw std::invalid_argument("profile '" + label + "' has " + std::to_string(covariates.size()) +
                                " covariates, model has " + std::to_string(m.n_covariates()));
  if (region < 0 || region >= m.n_regions())
    throw std::invalid_argument("profile '" + label + "' region " + std::to_string(region + 1) +
                                " outside the model");
}

void OutcomeGrid::validate() const {
  if (!(s >= 0.0)) throw std::invalid_argument("outcome grid: s must be >= 0");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < s) throw std::invalid_argument("outcome grid: times must be >= s");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw std::invalid_argument("outcome grid: times must be increasing");
  }
  if (needs_t12(measure)) {
    if (!t12)
      throw std::invalid_argument("measure " + std::string(measure_name(measure)) + " requires t12");
    if (!(*t12 >= 0.0 && *t12 <= s)) throw std::invalid_argument("outcome grid: need 0 <= t12 <= s");
  } else if (t12) {
    throw std::invalid_argument("measure " + std::string(measure_name(measure)) +
                                " does not take t12");
  }
}

double sojourn_survival(const ModelState& m, const Profile& p, double t) {
  p.validate(m);
  if (!(t >= 0.0)) throw std::invalid_argument("sojourn_survival requires t >= 0");
  return checked_probability(Rates(m, p).p11(0.0, t), "S1");
}

double cumulative_incidence(const ModelState& m, const Profile& p, Transition j, double t,
                            const QuadratureOptions& q) {
  p.validate(m);
  if (j == Transition::RD) throw std::invalid_argument("cumulative incidence is defined for FR and FD");
  if (!(t >= 0.0)) throw std::invalid_argument("cumulative_incidence requires t >= 0");
  if (t == 0.0) return 0.0;
  const Rates r(m, p);
  const double v = integrate_against_hazard(r, j, 0.0, t, [&](double u) { return r.p11(0.0, u); }, q);
  return checked_probability(v, j == Transition::FR ? "F12" : "F13");
}

double transition_probability(const ModelState& m, const Profile& p, Measure measure, double s,
                              double t, std::optional<double> t12, const QuadratureOptions& q) {
  p.validate(m);
  if (!(s >= 0.0) || !(t >= s)) throw std::invalid_argument("transition probability needs 0 <= s <= t");
  const Rates r(m, p);
  switch (measure) {
    case Measure::S1:
      return checked_probability(r.p11(0.0, t), "S1");
    case Measure::F12:
      return cumulative_incidence(m, p, Transition::FR, t, q);
    case Measure::F13:
      return cumulative_incidence(m, p, Transition::FD, t, q);
    case Measure::p11:
      return checked_probability(r.p11(s, t), "p11");
    case Measure::p12:
      return checked_probability(p12(r, s, t, q), "p12");
    case Measure::p13:
      return checked_probability(1.0 - r.p11(s, t) - p12(r, s, t, q), "p13");
    case Measure::p22:
    case Measure::p23: {
      if (!t12 || !(*t12 >= 0.0 && *t12 <= s))
        throw std::invalid_argument("p22/p23 need a refracture time 0 <= t12 <= s");
      const double v = r.p22(s, t, *t12);
      return measure == Measure::p22 ? checked_probability(v, "p22")
                                     : checked_probability(1.0 - v, "p23");
    }
  }
  throw std::invalid_argument("unknown measure");
}

double evaluate(const ModelState& m, const Profile& p, const OutcomeGrid& grid, double t,
                const QuadratureOptions& q) {
  return transition_probability(m, p, grid.measure, grid.s, t, grid.t12, q);
}

std::vector<SummaryRow> posterior_summary(const PosteriorDraws& draws, const Profile& profile,
                                          const OutcomeGrid& grid, std::span<const int> regions) {
  grid.validate();
  if (draws.total_draws() == 0) throw std::invalid_argument("posterior_summary: no draws");
  std::vector<int> which(regions.begin(), regions.end());
  if (which.empty()) {
    which.resize(draws.n_regions());
    std::iota(which.begin(), which.end(), 0);
  }
  std::vector<SummaryRow> rows;
  std::vector<double> values;
  values.reserve(draws.total_draws());
  for (int k : which) {
    Profile p = profile;
    p.region = k;
    for (double t : grid.times) {
      values.clear();
      for (const auto& c : draws.chains)
        for (const auto& d : c.draws) values.push_back(evaluate(d.state, p, grid, t));
      SummaryRow row;
      row.region = k;
      row.label = profile.label;
      row.time = t;
      row.measure = grid.measure;
      const double n = static_cast<double>(values.size());
      double shift = 0.0;
      for (double v : values) shift += v - values.front();
      row.mean = values.front() + shift / n;
      double ss = 0.0;
      for (double v : values) ss += (v - row.mean) * (v - row.mean);
      row.sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      row.q025 = quantile(values, 0.025);
      row.q975 = quantile(values, 0.975);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace sidm
