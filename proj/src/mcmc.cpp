#include "sidm/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <Eigen/SparseCholesky>

#include "sidm/error.hpp"

namespace sidm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

TransitionParams params_from_block(const Eigen::VectorXd& u) {
  TransitionParams p;
  p.shape = std::exp(u(0));
  p.intercept = u(1);
  p.coefficients = u.tail(u.size() - 2);
  return p;
}

Eigen::VectorXd block_from_params(const TransitionParams& p) {
  Eigen::VectorXd u(p.coefficients.size() + 2);
  u(0) = std::log(p.shape);
  u(1) = p.intercept;
  u.tail(p.coefficients.size()) = p.coefficients;
  return u;
}

// Gaussian and shape priors of one transition, as a density over (alpha, beta0, beta).
double transition_log_prior(const TransitionParams& p, const PriorConfig& c) {
  double lp = -0.5 * c.beta_precision * (p.intercept * p.intercept + p.coefficients.squaredNorm());
  return lp + log_shape_prior(p.shape, c);
}

void check_regions(const CohortData& data, const SpatialGraph& g) {
  for (const auto& t : data.transitions)
    for (int k : t.region)
      if (k < 0 || k >= g.n_regions())
        throw DataError("subject region " + std::to_string(k + 1) + " is not in the graph (K = " +
                        std::to_string(g.n_regions()) + ")");
}

class Chain {
 public:
  Chain(const CohortData& data, const SpatialGraph& g, const PriorConfig& pc,
        const SamplerConfig& sc, int chain, const ModelState& init)
      : data_(data),
        g_(g),
        pc_(pc),
        sc_(sc),
        chain_(chain),
        rng_(sc.seed, static_cast<std::uint64_t>(chain)),
        k_(g.n_regions()),
        l_(data.n_covariates),
        lap_(g.laplacian()) {
    for (int j = 0; j < kTransitions; ++j) params_[j] = init.params[j];
    b_ = init.effects;
    gamma_ = init.mix.gamma;
    p_ = init.between.precision();
    logdet_qw_ = log_det(within_precision(g_, {gamma_}));

    d_ = Eigen::MatrixXd::Zero(k_, kTransitions);
    s_ = Eigen::MatrixXd::Zero(k_, kTransitions);
    for (int j = 0; j < kTransitions; ++j) {
      const auto& t = data_.transitions[j];
      for (std::size_t i = 0; i < t.size(); ++i) d_(t.region[i], j) += t.event[i];
      refresh_sufficient(j);
      blocks_[j] = RandomWalkBlock(l_ + 2, sc_.target_acceptance);
    }
  }

  ChainDraws run() {
    ChainDraws out;
    const double lp0 = current_log_posterior();
    if (!std::isfinite(lp0))
      throw NumericalError("chain " + std::to_string(chain_) +
                           ": log-posterior not finite at initialization");
    const int total = sc_.n_warmup + sc_.n_samples * sc_.thin;
    out.draws.reserve(sc_.n_samples);
    for (int it = 0; it < total; ++it) {
      const bool warm = it < sc_.n_warmup;
      if (it == sc_.n_warmup) end_warmup();
      if (sc_.update_transition_params) {
        for (int j = 0; j < kTransitions; ++j) {
          if (warm && it % sc_.hessian_interval == 0) refresh_proposal(j);
          update_transition(j);
        }
      }
      for (int s = 0; s < sc_.inner_sweeps; ++s) {
        for (int k = 0; k < k_; ++k) update_region(k, warm);
        if (sc_.update_transition_params)
          for (int j = 0; j < kTransitions; ++j) shift_level(j);
        p_ = sample_between_precision(b_, within_precision(g_, {gamma_}), pc_, rng_);
        update_gamma(warm);
      }
      if (!warm && (it - sc_.n_warmup + 1) % sc_.thin == 0) {
        Draw d;
        d.chain = chain_;
        d.iteration = it - sc_.n_warmup;
        d.state = snapshot();
        d.log_posterior = current_log_posterior();
        out.draws.push_back(std::move(d));
      }
    }
    if (sc_.n_warmup >= total) end_warmup();
    for (int j = 0; j < kTransitions; ++j)
      if (sc_.update_transition_params)
        out.acceptance.emplace_back(std::string("transition[") +
                                        std::string(transition_name(kAllTransitions[j])) + "]",
                                    blocks_[j].acceptance_rate());
    out.acceptance.emplace_back("effects", region_props_ ? double(region_accepts_) / region_props_ : 0.0);
    out.acceptance.emplace_back("gamma", gamma_props_ ? double(gamma_accepts_) / gamma_props_ : 0.0);
    return out;
  }

 private:
  void end_warmup() {
    if (warmup_done_) return;
    warmup_done_ = true;
    if (sc_.update_transition_params && sc_.n_warmup > 0) {
      for (int j = 0; j < kTransitions; ++j)
        if (blocks_[j].proposals() > 0 && blocks_[j].accepts() == 0) {
          std::ostringstream msg;
          msg << "chain " << chain_ << ": zero acceptance during warmup for transition "
              << transition_name(kAllTransitions[j]) << " (last step scale " << blocks_[j].scale()
              << ")";
          throw NumericalError(msg.str());
        }
      if (gamma_props_ > 0 && gamma_accepts_ == 0) {
        std::ostringstream msg;
        msg << "chain " << chain_ << ": zero acceptance during warmup for gamma (last step "
            << std::exp(gamma_log_step_) << ")";
        throw NumericalError(msg.str());
      }
    }
    for (auto& b : blocks_) {
      b.set_adapting(false);
      b.reset_counts();
    }
    region_accepts_ = region_props_ = gamma_accepts_ = gamma_props_ = 0;
  }

  void refresh_sufficient(int j) {
    const auto& t = data_.transitions[j];
    const auto& p = params_[j];
    s_.col(j).setZero();
    const Eigen::VectorXd xb = t.covariates * p.coefficients;
    const double log_shape = std::log(p.shape);
    double ev = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      s_(t.region[i], j) += std::exp(xb(ii) + p.shape * t.log_time[i]);
      if (t.event[i]) ev += log_shape + (p.shape - 1.0) * t.log_time[i] + xb(ii);
    }
    event_part_[j] = ev;
  }

  double loglik_from_sufficient() const {
    double ll = 0.0;
    for (int j = 0; j < kTransitions; ++j) {
      ll += event_part_[j];
      const double b0 = params_[j].intercept;
      for (int k = 0; k < k_; ++k)
        ll += d_(k, j) * (b0 + b_(k, j)) - std::exp(b0 + b_(k, j)) * s_(k, j);
    }
    return ll;
  }

  ModelState snapshot() const {
    ModelState m;
    m.params = params_;
    m.effects = b_;
    m.mix.gamma = gamma_;
    m.between = BetweenCov::from_precision(p_);
    return m;
  }

  double current_log_posterior() const {
    const ModelState m = snapshot();
    const double lp = log_prior(m, pc_);
    if (!std::isfinite(lp)) return lp;
    return loglik_from_sufficient() +
           structured_log_density(b_, within_precision(g_, {gamma_}), logdet_qw_, p_) + lp;
  }

  double block_log_target(int j, const Eigen::VectorXd& u) const {
    const TransitionParams p = params_from_block(u);
    if (!std::isfinite(p.shape) || !(p.shape > 0.0)) return kNegInf;
    const double ll = transition_loglik(data_.transitions[j], p, b_.col(j));
    if (std::isnan(ll)) return kNegInf;
    return ll + transition_log_prior(p, pc_) + u(0);
  }

  Eigen::VectorXd block_gradient(int j, const Eigen::VectorXd& u) const {
    const TransitionParams p = params_from_block(u);
    StateGradient g;
    for (auto& t : g.params) t.coefficients = Eigen::VectorXd::Zero(l_);
    g.effects = Eigen::MatrixXd::Zero(k_, kTransitions);
    accumulate_transition_gradient(data_.transitions[j], p, b_.col(j), kAllTransitions[j], g);
    const auto& t = g.params[j];
    Eigen::VectorXd out(l_ + 2);
    out(0) = t.log_shape + log_shape_prior_slope(p.shape, pc_) + 1.0;
    out(1) = t.intercept - pc_.beta_precision * p.intercept;
    out.tail(l_) = t.coefficients - pc_.beta_precision * p.coefficients;
    return out;
  }

  void refresh_proposal(int j) {
    const Eigen::VectorXd u = block_from_params(params_[j]);
    const int n = static_cast<int>(u.size());
    Eigen::MatrixXd h(n, n);
    for (int a = 0; a < n; ++a) {
      const double step = 1e-5 * std::max(1.0, std::abs(u(a)));
      Eigen::VectorXd up = u, dn = u;
      up(a) += step;
      dn(a) -= step;
      h.col(a) = -(block_gradient(j, up) - block_gradient(j, dn)) / (2.0 * step);
    }
    if (!h.allFinite()) return;
    Eigen::MatrixXd info = nearest_positive_definite(0.5 * (h + h.transpose()), 1e-8);
    Eigen::MatrixXd cov = info.inverse();
    cov = nearest_positive_definite(0.5 * (cov + cov.transpose()), 1e-12);
    blocks_[j].set_covariance(cov);
  }

  void update_transition(int j) {
    Eigen::VectorXd u = block_from_params(params_[j]);
    double lp = block_log_target(j, u);
    if (blocks_[j].step(u, lp, [&](const Eigen::VectorXd& x) { return block_log_target(j, x); },
                        rng_)) {
      params_[j] = params_from_block(u);
      refresh_sufficient(j);
    }
  }

  // Conditional log-density of region k's effects row (up to a constant).
  double region_log_target(const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                           const Eigen::Vector3d& d, const Eigen::Vector3d& mean, double q_kk) const {
    const Eigen::Vector3d r = b - mean;
    return d.dot(b) - c.dot(b.array().exp().matrix()) - 0.5 * q_kk * r.dot(p_ * r);
  }

  void update_region(int k, bool warm) {
    (void)warm;
    const double q_kk = 1.0 - gamma_ + gamma_ * g_.degrees()[k];
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int l : g_.neighbours(k)) mean += b_.row(l).transpose();
    mean *= gamma_ / q_kk;
    Eigen::Vector3d c, d;
    for (int j = 0; j < kTransitions; ++j) {
      c(j) = std::exp(params_[j].intercept) * s_(k, j);
      d(j) = d_(k, j);
    }
    const Eigen::Matrix3d prior_prec = q_kk * p_;

    // Newton ascent to the conditional mode; the target is strictly concave.
    Eigen::Vector3d mode = b_.row(k).transpose();
    double f_mode = region_log_target(mode, c, d, mean, q_kk);
    Eigen::Matrix3d hess;
    for (int iter = 0; iter < 100; ++iter) {
      const Eigen::Vector3d ce = c.cwiseProduct(mode.array().exp().matrix());
      const Eigen::Vector3d grad = d - ce - prior_prec * (mode - mean);
      hess = prior_prec;
      hess.diagonal() += ce;
      Eigen::Vector3d step = hess.llt().solve(grad);
      double t = 1.0;
      Eigen::Vector3d next;
      double f_next = kNegInf;
      for (int ls = 0; ls < 50; ++ls) {
        next = mode + t * step;
        f_next = region_log_target(next, c, d, mean, q_kk);
        if (f_next >= f_mode - 1e-12) break;
        t *= 0.5;
      }
      mode = next;
      f_mode = f_next;
      if ((t * step).cwiseAbs().maxCoeff() < 1e-9) break;
    }
    const Eigen::Vector3d ce = c.cwiseProduct(mode.array().exp().matrix());
    hess = prior_prec;
    hess.diagonal() += ce;
    Eigen::LLT<Eigen::Matrix3d> llt(hess);

    // Independence proposal: multivariate t centred at the mode with the
    // Laplace scale, heavier-tailed than the target in every direction.
    constexpr double nu = 5.0;
    Eigen::Vector3d z(rng_.normal(), rng_.normal(), rng_.normal());
    const double w = std::sqrt(nu / rng_.chi_squared(nu));
    const Eigen::Vector3d prop = mode + w * llt.matrixU().solve(z);
    auto log_q = [&](const Eigen::Vector3d& x) {
      const Eigen::Vector3d r = x - mode;
      return -0.5 * (nu + 3.0) * std::log1p(r.dot(hess * r) / nu);
    };
    const Eigen::Vector3d cur = b_.row(k).transpose();
    const double log_ratio = region_log_target(prop, c, d, mean, q_kk) -
                             region_log_target(cur, c, d, mean, q_kk) + log_q(cur) - log_q(prop);
    ++region_props_;
    if (std::log(rng_.uniform()) < log_ratio) {
      ++region_accepts_;
      b_.row(k) = prop.transpose();
    }
  }

  // Exact draw along the direction that raises beta0_j and lowers column j of B
  // by the same amount; the likelihood is constant on that line.
  void shift_level(int j) {
    const double one_minus = 1.0 - gamma_;
    const Eigen::RowVector3d col_sums = b_.colwise().sum();
    const double a = p_(j, j) * one_minus * k_ + pc_.beta_precision;
    const double lin = one_minus * p_.row(j).dot(col_sums) - pc_.beta_precision * params_[j].intercept;
    const double delta = lin / a + rng_.normal() / std::sqrt(a);
    params_[j].intercept += delta;
    b_.col(j).array() -= delta;
  }

  void update_gamma(bool warm) {
    const Eigen::Matrix3d btb = b_.transpose() * b_;
    const Eigen::Matrix3d btlb = b_.transpose() * (lap_ * b_);
    const double tr_i = p_.cwiseProduct(btb).sum();
    const double tr_l = p_.cwiseProduct(btlb).sum();
    auto log_jac = [](double z) { return -std::abs(z) - 2.0 * std::log1p(std::exp(-std::abs(z))); };
    auto target = [&](double gamma, double logdet) {
      return 1.5 * logdet - 0.5 * ((1.0 - gamma) * tr_i + gamma * tr_l);
    };
    const double g = gamma_ / kGammaMax;
    const double z = std::log(g) - std::log1p(-g);
    const double zp = z + std::exp(gamma_log_step_) * rng_.normal();
    const double gp = kGammaMax / (1.0 + std::exp(-zp));
    if (!(gp >= 0.0 && gp <= kGammaMax) || gp == 0.0) return;
    const double logdet_p = log_det(within_precision(g_, {gp}));
    const double log_ratio = target(gp, logdet_p) + log_jac(zp) - target(gamma_, logdet_qw_) - log_jac(z);
    const bool accept = std::log(rng_.uniform()) < log_ratio;
    ++gamma_props_;
    if (accept) {
      ++gamma_accepts_;
      gamma_ = gp;
      logdet_qw_ = logdet_p;
    }
    if (warm) {
      ++gamma_adapt_;
      gamma_log_step_ += std::pow(gamma_adapt_ + 10.0, -0.6) * ((accept ? 1.0 : 0.0) - 0.44);
    }
  }

  const CohortData& data_;
  const SpatialGraph& g_;
  const PriorConfig& pc_;
  const SamplerConfig& sc_;
  int chain_;
  Stream rng_;
  int k_, l_;
  SparseMatrix lap_;

  std::array<TransitionParams, kTransitions> params_;
  RandomEffects b_;
  double gamma_ = 0.5;
  Eigen::Matrix3d p_;
  double logdet_qw_ = 0.0;

  Eigen::MatrixXd d_, s_;
  std::array<double, kTransitions> event_part_{};
  std::array<RandomWalkBlock, kTransitions> blocks_;

  double gamma_log_step_ = 0.0;
  long gamma_adapt_ = 0;
  long gamma_accepts_ = 0, gamma_props_ = 0;
  long region_accepts_ = 0, region_props_ = 0;
  bool warmup_done_ = false;
};

}  // namespace

void SamplerConfig::validate() const {
  if (n_chains < 1 || n_samples < 1 || n_warmup < 0 || thin < 1 || inner_sweeps < 1 ||
      hessian_interval < 1 || threads < 1)
    throw std::invalid_argument("sampler: counts must be positive");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw std::invalid_argument("sampler: target_acceptance must lie in (0, 1)");
}

int PosteriorDraws::n_regions() const {
  for (const auto& c : chains)
    if (!c.draws.empty()) return c.draws.front().state.n_regions();
  return 0;
}

int PosteriorDraws::n_covariates() const {
  for (const auto& c : chains)
    if (!c.draws.empty()) return c.draws.front().state.n_covariates();
  return 0;
}

std::size_t PosteriorDraws::total_draws() const {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.draws.size();
  return n;
}

double log_posterior(const ModelState& m, const CohortData& data, const SpatialGraph& g,
                     const PriorConfig& c) {
  const double lp = log_prior(m, c);
  if (!std::isfinite(lp)) return lp;
  check_regions(data, g);
  double ll = 0.0;
  for (Transition j : kAllTransitions)
    ll += transition_loglik(data.transitions[index(j)], m[j], m.effects.col(index(j)));
  const SparseMatrix q = joint_precision(within_precision(g, m.mix), m.between);
  return ll + log_density(m.effects, q) + lp;
}

double log_posterior(const ModelState& m, std::span<const Subject> data, const SpatialGraph& g,
                     const PriorConfig& c) {
  const double lp = log_prior(m, c);
  if (!std::isfinite(lp)) return lp;
  for (const auto& s : data)
    if (s.region < 0 || s.region >= g.n_regions())
      throw DataError("subject region " + std::to_string(s.region + 1) + " is not in the graph");
  const SparseMatrix q = joint_precision(within_precision(g, m.mix), m.between);
  return cohort_loglik(data, m) + log_density(m.effects, q) + lp;
}

StateGradient log_posterior_gradient(const ModelState& m, const CohortData& data,
                                     const SpatialGraph& g, const PriorConfig& c) {
  StateGradient grad = cohort_loglik_gradient(data, m);
  for (int j = 0; j < kTransitions; ++j) {
    const auto& p = m.params[j];
    grad.params[j].log_shape += log_shape_prior_slope(p.shape, c);
    grad.params[j].intercept -= c.beta_precision * p.intercept;
    grad.params[j].coefficients -= c.beta_precision * p.coefficients;
  }
  const SparseMatrix q_w = within_precision(g, m.mix);
  grad.effects -= (q_w * m.effects) * m.between.precision();
  return grad;
}

Eigen::Matrix3d sample_between_precision(const RandomEffects& b, const SparseMatrix& q_w,
                                         const PriorConfig& pc, Stream& rng) {
  const Eigen::Matrix3d s = pc.wishart_scale.inverse() + b.transpose() * (q_w * b);
  const Eigen::Matrix3d scale = s.llt().solve(Eigen::Matrix3d::Identity());
  return sample_wishart(pc.wishart_df + static_cast<double>(b.rows()), 0.5 * (scale + scale.transpose()), rng);
}

PosteriorDraws run(std::span<const Subject> data, const SpatialGraph& g, const PriorConfig& pc,
                   const SamplerConfig& sc, const std::optional<ModelState>& init) {
  pc.validate();
  sc.validate();
  const int l = data.empty() ? (init ? init->n_covariates() : 0)
                             : static_cast<int>(data.front().covariates.size());
  const CohortData cohort = CohortData::from_subjects(data, l);
  check_regions(cohort, g);
  const ModelState start = init ? *init : ModelState::initial(g.n_regions(), l);
  start.validate();
  if (start.n_regions() != g.n_regions() || start.n_covariates() != l)
    throw std::invalid_argument("initial state does not match data and graph dimensions");

  PosteriorDraws out;
  out.chains.resize(sc.n_chains);
  for (int i = 0; i < l; ++i) out.covariate_names.push_back("x" + std::to_string(i + 1));
  std::vector<std::exception_ptr> errors(sc.n_chains);
  auto work = [&](int c) {
    try {
      Chain chain(cohort, g, pc, sc, c, start);
      out.chains[c] = chain.run();
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  const int n_threads = std::min(sc.threads, sc.n_chains);
  if (n_threads <= 1) {
    for (int c = 0; c < sc.n_chains; ++c) work(c);
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t)
      pool.emplace_back([&, t] {
        for (int c = t; c < sc.n_chains; c += n_threads) work(c);
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

MapResult map_estimate(std::span<const Subject> data, const SpatialGraph& g, const PriorConfig& pc,
                       const MapOptions& opts, const std::optional<ModelState>& start) {
  pc.validate();
  const int l = data.empty() ? (start ? start->n_covariates() : 0)
                             : static_cast<int>(data.front().covariates.size());
  const CohortData cohort = CohortData::from_subjects(data, l);
  check_regions(cohort, g);
  ModelState m = start ? *start : ModelState::initial(g.n_regions(), l);
  m.validate();
  const int k = g.n_regions();
  const int block = l + 2;
  const int n_b = kTransitions * k;
  const int n = kTransitions * block + n_b + 1;
  // The between precision is profiled out: for fixed B and gamma its conditional
  // mode is c S^-1 with S = R^-1 + B'Qw B, leaving 1.5 log|Qw| - (c/2) log|S|.
  const double c = pc.wishart_df + k - 4.0;
  const Eigen::Matrix3d r_inv = pc.wishart_scale.inverse();
  SparseMatrix eye(k, k);
  eye.setIdentity();
  const SparseMatrix dq = g.laplacian() - eye;
  const Eigen::MatrixXd dq_dense = Eigen::MatrixXd(dq);

  auto unpack = [&](const Eigen::VectorXd& x, ModelState& s) {
    for (int j = 0; j < kTransitions; ++j) s.params[j] = params_from_block(x.segment(j * block, block));
    s.effects = Eigen::Map<const RandomEffects>(x.data() + kTransitions * block, k, kTransitions);
    s.mix.gamma = kGammaMax / (1.0 + std::exp(-x(n - 1)));
  };
  auto scatter = [&](const ModelState& s, const SparseMatrix& q_w) -> Eigen::Matrix3d {
    return r_inv + s.effects.transpose() * (q_w * s.effects);
  };

  auto objective = [&](const Eigen::VectorXd& x) {
    ModelState s = m;
    unpack(x, s);
    double v = 0.0;
    for (int j = 0; j < kTransitions; ++j) {
      if (!(s.params[j].shape > 0.0) || !std::isfinite(s.params[j].shape)) return kNegInf;
      v += transition_loglik(cohort.transitions[j], s.params[j], s.effects.col(j));
      v += transition_log_prior(s.params[j], pc);
    }
    const SparseMatrix q_w = within_precision(g, s.mix);
    v += 1.5 * log_det(q_w) - 0.5 * c * std::log(scatter(s, q_w).determinant());
    return std::isnan(v) ? kNegInf : v;
  };
  auto gradient = [&](const Eigen::VectorXd& x) {
    ModelState s = m;
    unpack(x, s);
    const SparseMatrix q_w = within_precision(g, s.mix);
    const Eigen::Matrix3d s_inv = scatter(s, q_w).inverse();
    s.between = BetweenCov::from_precision(c * s_inv);
    const StateGradient gr = log_posterior_gradient(s, cohort, g, pc);
    Eigen::VectorXd out(n);
    for (int j = 0; j < kTransitions; ++j) {
      out(j * block) = gr.params[j].log_shape;
      out(j * block + 1) = gr.params[j].intercept;
      out.segment(j * block + 2, l) = gr.params[j].coefficients;
    }
    out.segment(kTransitions * block, n_b) = Eigen::Map<const Eigen::VectorXd>(gr.effects.data(), n_b);
    const Eigen::SimplicialLLT<SparseMatrix> llt(q_w);
    const Eigen::MatrixXd q_inv = llt.solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::Matrix3d bdb = s.effects.transpose() * (dq * s.effects);
    const double d_gamma = 1.5 * dq_dense.cwiseProduct(q_inv).sum() - 0.5 * c * s_inv.cwiseProduct(bdb).sum();
    const double sig = s.mix.gamma / kGammaMax;
    out(n - 1) = d_gamma * kGammaMax * sig * (1.0 - sig);
    return out;
  };

  Eigen::VectorXd x0(n);
  for (int j = 0; j < kTransitions; ++j) x0.segment(j * block, block) = block_from_params(m.params[j]);
  x0.segment(kTransitions * block, n_b) = Eigen::Map<const Eigen::VectorXd>(m.effects.data(), n_b);
  const double g0 = std::clamp(m.mix.gamma / kGammaMax, 1e-12, 1.0 - 1e-12);
  x0(n - 1) = std::log(g0 / (1.0 - g0));

  OptimizeOptions inner = opts.inner;
  inner.gradient_tol = opts.gradient_tol;
  const OptimizeResult r = maximize(objective, gradient, x0, inner);
  MapResult res;
  res.iterations = r.iterations;
  res.gradient_norm = r.gradient_norm;
  if (!r.converged)
    throw ConvergenceError("map_estimate: no convergence within " + std::to_string(inner.max_iterations) +
                           " iterations (gradient max-norm " + std::to_string(r.gradient_norm) + ")");
  unpack(r.x, m);
  m.between = BetweenCov::from_precision(c * scatter(m, within_precision(g, m.mix)).inverse());
  res.state = m;
  res.log_posterior = log_posterior(m, cohort, g, pc);
  return res;
}

}  // namespace sidm
