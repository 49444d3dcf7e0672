#pragma once

#include <functional>

namespace sidm {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_depth = 30;
};

/// Adaptive Gauss-Legendre quadrature on 15-point panels. The panel with the
/// largest disagreement between itself and its two halves is bisected until the
/// summed disagreement falls below abs_tol. Throws NumericalError when that panel
/// is already max_depth bisections deep.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {});

}  // namespace sidm
