#include "sidm/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sidm/error.hpp"
#include "sidm/quadrature.hpp"

namespace sidm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

double gaussian_log_density(double x, double precision) {
  return 0.5 * std::log(precision) - 0.5 * kLog2Pi - 0.5 * precision * x * x;
}

// E[g(T)] for T ~ Weibull(alpha, 1), via s = T^alpha ~ Exp(1).
double weibull_expectation(double alpha, double (*g)(double s, double alpha), double scale) {
  const double upper = 60.0 + 40.0 / alpha;
  QuadratureOptions opts;
  opts.abs_tol = 1e-14 * std::max(1.0, scale);
  // Integrate over x = log s so the log singularity at s = 0 becomes an exponential tail.
  return integrate(
      [&](double x) {
        const double s = std::exp(x);
        return s * std::exp(-s) * g(s, alpha);
      },
      -60.0, std::log(upper), opts);
}

// Log-density of the PC shape prior (rate 1 removed) tabulated on log(alpha).
struct PcGrid {
  static constexpr double kLo = -3.0, kHi = 3.0, kStep = 0.01;
  std::vector<double> distance;   // d(alpha)
  std::vector<double> log_slope;  // log |d'(alpha)|

  PcGrid() {
    const int n = static_cast<int>(std::lround((kHi - kLo) / kStep)) + 1;
    distance.resize(n);
    log_slope.resize(n);
    for (int i = 0; i < n; ++i) {
      const double la = kLo + i * kStep;
      if (std::abs(la) < 0.5 * kStep) {
        // |d'| is continuous through alpha = 1 where d itself has a kink.
        const double a = std::exp(1e-4), b = std::exp(-1e-4);
        distance[i] = 0.0;
        log_slope[i] = 0.5 * (std::log(slope(a)) + std::log(slope(b)));
      } else {
        const double a = std::exp(la);
        distance[i] = std::sqrt(2.0 * std::max(0.0, weibull_exponential_kld(a)));
        log_slope[i] = std::log(slope(a));
      }
    }
  }

  // |d'(alpha)| = |KLD'(alpha)| / d(alpha).
  static double slope(double alpha) {
    const double kld = weibull_exponential_kld(alpha);
    const double scale = std::tgamma(1.0 + 1.0 / alpha) * (1.0 + std::abs(std::log(alpha)));
    // d/d alpha E[T] = -(1/alpha^2) E[T log T]
    const double e_tlogt =
        weibull_expectation(alpha, [](double s, double a) { return std::pow(s, 1.0 / a) * std::log(s) / a; },
                            scale);
    const double e_logt = weibull_expectation(alpha, [](double s, double a) { return std::log(s) / a; }, 1.0);
    // KLD = log a + (a - 1) E[log T] - 1 + E[T], with E[log T] = c / a.
    const double c = e_logt * alpha;
    const double dkld = 1.0 / alpha + c / (alpha * alpha) - e_tlogt / alpha;
    return std::abs(dkld) / std::sqrt(2.0 * kld);
  }

  double log_density(double alpha, double rate) const {
    const double la = std::log(alpha);
    const int i = cell(la);
    const double w = (la - kLo) / kStep - i;
    const double d = (1 - w) * distance[i] + w * distance[i + 1];
    const double ls = (1 - w) * log_slope[i] + w * log_slope[i + 1];
    return std::log(0.5 * rate) - rate * d + ls;
  }

  // Linear interpolation in log(alpha); beyond the table the end cells extrapolate.
  int cell(double la) const {
    const int n = static_cast<int>(distance.size());
    return std::clamp(static_cast<int>(std::floor((la - kLo) / kStep)), 0, n - 2);
  }

  double slope_log_density(double alpha, double rate) const {
    const int i = cell(std::log(alpha));
    return (-rate * (distance[i + 1] - distance[i]) + (log_slope[i + 1] - log_slope[i])) / kStep;
  }
};

const PcGrid& pc_grid() {
  static const PcGrid grid;
  return grid;
}

}  // namespace

void PriorConfig::validate() const {
  if (!(beta_precision > 0.0)) throw std::invalid_argument("prior: beta_precision must be > 0");
  if (!(wishart_df > 2.0)) throw std::invalid_argument("prior: wishart_df must be > 2");
  if (!(shape_sd > 0.0)) throw std::invalid_argument("prior: shape_sd must be > 0");
  if (!(pc_rate > 0.0)) throw std::invalid_argument("prior: pc_rate must be > 0");
  if (!wishart_scale.isApprox(wishart_scale.transpose()))
    throw std::invalid_argument("prior: wishart_scale must be symmetric");
  Eigen::LLT<Eigen::Matrix3d> llt(wishart_scale);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("prior: wishart_scale must be positive definite");
}

double weibull_exponential_kld(double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("kld requires alpha > 0");
  const double e_logt = weibull_expectation(alpha, [](double s, double a) { return std::log(s) / a; }, 1.0);
  const double e_t = weibull_expectation(alpha, [](double s, double a) { return std::pow(s, 1.0 / a); },
                                         std::tgamma(1.0 + 1.0 / alpha));
  return std::log(alpha) + (alpha - 1.0) * e_logt - 1.0 + e_t;
}

double log_shape_prior(double alpha, const PriorConfig& c) {
  if (!(alpha > 0.0)) return kNegInf;
  switch (c.shape_prior) {
    case ShapePrior::lognormal: {
      const double la = std::log(alpha);
      return -la - std::log(c.shape_sd) - 0.5 * kLog2Pi - 0.5 * la * la / (c.shape_sd * c.shape_sd);
    }
    case ShapePrior::pc_numeric:
      return pc_grid().log_density(alpha, c.pc_rate);
  }
  return kNegInf;
}

double log_shape_prior_slope(double alpha, const PriorConfig& c) {
  switch (c.shape_prior) {
    case ShapePrior::lognormal:
      return -1.0 - std::log(alpha) / (c.shape_sd * c.shape_sd);
    case ShapePrior::pc_numeric:
      return pc_grid().slope_log_density(alpha, c.pc_rate);
  }
  return 0.0;
}

double log_multivariate_gamma(int p, double a) {
  double s = 0.25 * p * (p - 1) * std::log(std::numbers::pi);
  for (int j = 1; j <= p; ++j) s += std::lgamma(a + 0.5 * (1 - j));
  return s;
}

double wishart_log_density(const Eigen::Matrix3d& x, double df, const Eigen::Matrix3d& scale) {
  constexpr int p = 3;
  Eigen::LLT<Eigen::Matrix3d> lx(x);
  if (lx.info() != Eigen::Success) return kNegInf;
  Eigen::LLT<Eigen::Matrix3d> ls(scale);
  if (ls.info() != Eigen::Success) throw NumericalError("Wishart scale not positive definite");
  const double log_det_x = 2.0 * lx.matrixLLT().diagonal().array().log().sum();
  const double log_det_s = 2.0 * ls.matrixLLT().diagonal().array().log().sum();
  const double trace = ls.solve(x).trace();
  return 0.5 * (df - p - 1) * log_det_x - 0.5 * trace - 0.5 * df * p * std::log(2.0) -
         0.5 * df * log_det_s - log_multivariate_gamma(p, 0.5 * df);
}

double log_prior(const ModelState& m, const PriorConfig& c) {
  double lp = 0.0;
  for (const auto& p : m.params) {
    if (!(p.shape > 0.0)) return kNegInf;
    lp += gaussian_log_density(p.intercept, c.beta_precision);
    for (Eigen::Index l = 0; l < p.coefficients.size(); ++l)
      lp += gaussian_log_density(p.coefficients(l), c.beta_precision);
    lp += log_shape_prior(p.shape, c);
  }
  if (!(m.mix.gamma >= 0.0 && m.mix.gamma <= kGammaMax)) return kNegInf;
  lp -= std::log(kGammaMax);
  if (!m.between.is_positive_definite()) return kNegInf;
  lp += wishart_log_density(m.between.precision(), c.wishart_df, c.wishart_scale);
  if (std::isnan(lp)) throw NumericalError("log prior is NaN");
  return lp;
}

namespace {

// Canonical partial correlations of a 3x3 correlation matrix and back.
std::array<double, 3> to_cpc(const std::array<double, 3>& rho) {
  const double r12 = rho[0], r13 = rho[1], r23 = rho[2];
  const double w23 = (r23 - r12 * r13) / std::sqrt((1 - r12 * r12) * (1 - r13 * r13));
  return {r12, r13, w23};
}

std::array<double, 3> from_cpc(const std::array<double, 3>& w) {
  const double r23 = w[0] * w[1] + w[2] * std::sqrt((1 - w[0] * w[0]) * (1 - w[1] * w[1]));
  return {w[0], w[1], r23};
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

Eigen::VectorXd to_unconstrained(const ModelState& m) {
  const UnconstrainedLayout lay{m.n_regions(), m.n_covariates()};
  Eigen::VectorXd v(lay.size());
  for (int j = 0; j < kTransitions; ++j) {
    const int o = lay.transition_offset(j);
    v(o) = std::log(m.params[j].shape);
    v(o + 1) = m.params[j].intercept;
    v.segment(o + 2, lay.n_covariates) = m.params[j].coefficients;
  }
  v.segment(lay.effects_offset(), kTransitions * lay.n_regions) =
      Eigen::Map<const Eigen::VectorXd>(m.effects.data(), m.effects.size());
  const double g = m.mix.gamma / kGammaMax;
  v(lay.gamma_offset()) = std::log(g) - std::log1p(-g);
  for (int a = 0; a < 3; ++a) v(lay.precision_offset() + a) = std::log(m.between.precisions[a]);
  const auto w = to_cpc(m.between.correlations);
  for (int a = 0; a < 3; ++a) v(lay.correlation_offset() + a) = std::atanh(w[a]);
  return v;
}

ModelState from_unconstrained(const Eigen::VectorXd& v, const UnconstrainedLayout& lay) {
  if (v.size() != lay.size())
    throw std::invalid_argument("unconstrained vector has size " + std::to_string(v.size()) +
                                ", expected " + std::to_string(lay.size()));
  ModelState m;
  for (int j = 0; j < kTransitions; ++j) {
    const int o = lay.transition_offset(j);
    m.params[j].shape = std::exp(v(o));
    m.params[j].intercept = v(o + 1);
    m.params[j].coefficients = v.segment(o + 2, lay.n_covariates);
  }
  m.effects = Eigen::Map<const RandomEffects>(v.data() + lay.effects_offset(), lay.n_regions,
                                              kTransitions);
  m.mix.gamma = kGammaMax * logistic(v(lay.gamma_offset()));
  for (int a = 0; a < 3; ++a) m.between.precisions[a] = std::exp(v(lay.precision_offset() + a));
  std::array<double, 3> w;
  for (int a = 0; a < 3; ++a) w[a] = std::tanh(v(lay.correlation_offset() + a));
  m.between.correlations = from_cpc(w);
  return m;
}

double log_jacobian(const Eigen::VectorXd& v, const UnconstrainedLayout& lay) {
  if (v.size() != lay.size()) throw std::invalid_argument("unconstrained vector size mismatch");
  double lj = 0.0;
  for (int j = 0; j < kTransitions; ++j) lj += v(lay.transition_offset(j));
  const double z = v(lay.gamma_offset());
  // log(kGammaMax * s * (1 - s)) with s = logistic(z), stable for large |z|.
  lj += std::log(kGammaMax) - std::abs(z) - 2.0 * std::log1p(std::exp(-std::abs(z)));

  // (log tau, atanh cpc) -> tau, cpc -> (sigma, rho) -> Sigma -> Sigma^-1.
  const ModelState m = from_unconstrained(v, lay);
  double sum_log_sigma = 0.0;
  for (int a = 0; a < 3; ++a) sum_log_sigma += -0.5 * v(lay.precision_offset() + a);
  std::array<double, 3> w;
  for (int a = 0; a < 3; ++a) w[a] = std::tanh(v(lay.correlation_offset() + a));
  const Eigen::Matrix3d sigma = m.between.covariance();
  const double log_det_sigma = std::log(sigma.determinant());
  lj += -4.0 * log_det_sigma;                            // Sigma -> Sigma^-1
  lj += 3.0 * std::log(2.0) + 3.0 * sum_log_sigma;       // (sigma, rho) -> Sigma
  lj += sum_log_sigma - 3.0 * std::log(2.0);             // log tau -> sigma
  lj += 0.5 * std::log1p(-w[0] * w[0]) + 0.5 * std::log1p(-w[1] * w[1]);  // cpc -> rho
  for (double wa : w) lj += std::log1p(-wa * wa);        // atanh -> cpc
  return lj;
}

}  // namespace sidm
