#pragma once

#include <cmath>
#include <vector>

#include "sidm/likelihood.hpp"

namespace sidm::testing {

inline TransitionParams weibull(double shape, double scale, std::vector<double> beta = {}) {
  TransitionParams p;
  p.shape = shape;
  p.intercept = std::log(scale);
  p.coefficients = Eigen::Map<Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
  return p;
}

inline ModelState state(TransitionParams fr, TransitionParams fd, TransitionParams rd, int regions = 1) {
  ModelState m = ModelState::initial(regions, static_cast<int>(fr.coefficients.size()));
  m[Transition::FR] = fr;
  m[Transition::FD] = fd;
  m[Transition::RD] = rd;
  return m;
}

inline Subject subject(double t1, FirstExit e1, std::optional<double> t2 = {}, std::optional<SecondExit> e2 = {},
                       Eigen::VectorXd x = Eigen::VectorXd(), int region = 0) {
  Subject s;
  s.region = region;
  s.covariates = x;
  s.t1 = t1;
  s.e1 = e1;
  s.t2 = t2;
  s.e2 = e2;
  return s;
}

}  // namespace sidm::testing
