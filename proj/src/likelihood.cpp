#include "sidm/likelihood.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

#include "sidm/error.hpp"

namespace sidm {

void Subject::validate(int n_covariates) const {
  if (covariates.size() != n_covariates)
    throw DataError("subject covariate arity " + std::to_string(covariates.size()) +
                    " does not match model arity " + std::to_string(n_covariates));
  if (!covariates.allFinite()) throw DataError("subject covariates not finite");
  if (!(t1 > 0.0) || !std::isfinite(t1))
    throw DataError("subject t1 must be positive (got " + std::to_string(t1) + ")");
  const bool refractured = e1 == FirstExit::refracture;
  if (refractured != t2.has_value() || refractured != e2.has_value())
    throw DataError("subject (t2, e2) must be present exactly when e1 = refracture");
  if (t2 && (!(*t2 > 0.0) || !std::isfinite(*t2)))
    throw DataError("subject t2 must be positive (got " + std::to_string(*t2) + ")");
  if (region < 0) throw DataError("subject region index negative");
}

void ModelState::validate() const {
  const int l = n_covariates();
  for (const auto& p : params) p.validate(l);
  if (effects.cols() != kTransitions) throw std::invalid_argument("effects must have 3 columns");
  if (!effects.allFinite()) throw std::invalid_argument("effects not finite");
  mix.validate();
  between.validate();
}

ModelState ModelState::initial(int n_regions, int n_covariates) {
  ModelState m;
  for (auto& p : m.params) {
    p.shape = 1.0;
    p.intercept = 0.0;
    p.coefficients = Eigen::VectorXd::Zero(n_covariates);
  }
  m.effects = RandomEffects::Zero(n_regions, kTransitions);
  m.mix.gamma = 0.5;
  m.between = BetweenCov{};
  return m;
}

LinearPredictor linear_predictor(const ModelState& m, Transition j,
                                 const Eigen::Ref<const Eigen::VectorXd>& x, int region) {
  if (region < 0 || region >= m.n_regions())
    throw DataError("region " + std::to_string(region + 1) + " outside the model's regions");
  return linear_predictor(m[j], x, m.effects(region, index(j)));
}

double subject_loglik(const Subject& s, const ModelState& m) {
  s.validate(m.n_covariates());
  const auto eta_fr = linear_predictor(m, Transition::FR, s.covariates, s.region);
  const auto eta_fd = linear_predictor(m, Transition::FD, s.covariates, s.region);
  double ll = -cum_hazard(m[Transition::FR], eta_fr, s.t1) -
              cum_hazard(m[Transition::FD], eta_fd, s.t1);
  switch (s.e1) {
    case FirstExit::censored:
      break;
    case FirstExit::death:
      ll += log_hazard(m[Transition::FD], eta_fd, s.t1);
      break;
    case FirstExit::refracture: {
      ll += log_hazard(m[Transition::FR], eta_fr, s.t1);
      // R -> D runs on the clock reset at refracture.
      const auto eta_rd = linear_predictor(m, Transition::RD, s.covariates, s.region);
      ll -= cum_hazard(m[Transition::RD], eta_rd, *s.t2);
      if (*s.e2 == SecondExit::death) ll += log_hazard(m[Transition::RD], eta_rd, *s.t2);
      break;
    }
  }
  return ll;
}

double cohort_loglik(std::span<const Subject> data, const ModelState& m, int threads) {
  constexpr std::size_t kChunk = 512;
  const std::size_t n_chunks = (data.size() + kChunk - 1) / kChunk;
  std::vector<double> partial(n_chunks, 0.0);
  std::vector<std::exception_ptr> errors(n_chunks);
  auto work = [&](std::size_t c) {
    try {
      double s = 0.0;
      const std::size_t end = std::min(data.size(), (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) s += subject_loglik(data[i], m);
      partial[c] = s;
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(n_chunks)));
  if (n_threads <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) work(c);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t c = t; c < n_chunks; c += n_threads) work(c);
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

CohortData CohortData::from_subjects(std::span<const Subject> data, int n_covariates) {
  CohortData out;
  out.n_covariates = n_covariates;
  out.n_subjects = static_cast<int>(data.size());
  std::size_t n_rd = 0;
  for (const auto& s : data) {
    s.validate(n_covariates);
    if (s.e1 == FirstExit::refracture) ++n_rd;
  }
  auto reserve = [&](TransitionData& d, std::size_t n) {
    d.time.reserve(n);
    d.log_time.reserve(n);
    d.event.reserve(n);
    d.region.reserve(n);
    d.covariates.resize(static_cast<Eigen::Index>(n), n_covariates);
  };
  auto& fr = out.transitions[index(Transition::FR)];
  auto& fd = out.transitions[index(Transition::FD)];
  auto& rd = out.transitions[index(Transition::RD)];
  reserve(fr, data.size());
  reserve(fd, data.size());
  reserve(rd, n_rd);
  auto push = [](TransitionData& d, const Subject& s, double t, bool event) {
    d.covariates.row(static_cast<Eigen::Index>(d.time.size())) = s.covariates.transpose();
    d.time.push_back(t);
    d.log_time.push_back(std::log(t));
    d.event.push_back(event ? 1 : 0);
    d.region.push_back(s.region);
  };
  for (const auto& s : data) {
    push(fr, s, s.t1, s.e1 == FirstExit::refracture);
    push(fd, s, s.t1, s.e1 == FirstExit::death);
    if (s.e1 == FirstExit::refracture) push(rd, s, *s.t2, *s.e2 == SecondExit::death);
  }
  return out;
}

double transition_loglik(const TransitionData& d, const TransitionParams& p,
                         const Eigen::Ref<const Eigen::VectorXd>& effects) {
  const double log_shape = std::log(p.shape);
  const Eigen::VectorXd xb = d.covariates * p.coefficients;
  double ll = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double eta = p.intercept + xb(static_cast<Eigen::Index>(i)) + effects(d.region[i]);
    const double log_cum = eta + p.shape * d.log_time[i];
    ll -= std::exp(log_cum);
    if (d.event[i]) ll += log_shape + log_cum - d.log_time[i];
  }
  return ll;
}

void accumulate_transition_gradient(const TransitionData& d, const TransitionParams& p,
                                    const Eigen::Ref<const Eigen::VectorXd>& effects, Transition j,
                                    StateGradient& grad) {
  auto& g = grad.params[index(j)];
  const Eigen::VectorXd xb = d.covariates * p.coefficients;
  Eigen::VectorXd resid(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double cum = std::exp(p.intercept + xb(ii) + effects(d.region[i]) + p.shape * d.log_time[i]);
    const double r = d.event[i] - cum;
    resid(ii) = r;
    // d/d(log alpha) of [event*(log alpha + (alpha-1) log t) - Lambda]
    g.log_shape += d.event[i] * (1.0 + p.shape * d.log_time[i]) - cum * p.shape * d.log_time[i];
    grad.effects(d.region[i], index(j)) += r;
  }
  g.intercept += resid.sum();
  g.coefficients += d.covariates.transpose() * resid;
}

StateGradient cohort_loglik_gradient(const CohortData& data, const ModelState& m) {
  StateGradient grad;
  for (auto& g : grad.params) g.coefficients = Eigen::VectorXd::Zero(data.n_covariates);
  grad.effects = Eigen::MatrixXd::Zero(m.n_regions(), kTransitions);
  for (Transition j : kAllTransitions)
    accumulate_transition_gradient(data.transitions[index(j)], m[j], m.effects.col(index(j)), j,
                                   grad);
  return grad;
}

std::vector<double> center_covariates(std::vector<Subject>& data, const std::vector<bool>& center,
                                      const std::vector<double>* given) {
  const std::size_t l = center.size();
  std::vector<double> constants(l, 0.0);
  if (given) {
    if (given->size() != l) throw DataError("centering constants arity mismatch");
    constants = *given;
  } else if (!data.empty()) {
    for (const auto& s : data)
      for (std::size_t c = 0; c < l; ++c)
        if (center[c]) constants[c] += s.covariates(static_cast<Eigen::Index>(c));
    for (std::size_t c = 0; c < l; ++c)
      if (center[c]) constants[c] /= static_cast<double>(data.size());
  }
  for (auto& s : data) {
    if (s.covariates.size() != static_cast<Eigen::Index>(l))
      throw DataError("covariate arity mismatch while centering");
    for (std::size_t c = 0; c < l; ++c)
      if (center[c]) s.covariates(static_cast<Eigen::Index>(c)) -= constants[c];
  }
  return constants;
}

}  // namespace sidm
