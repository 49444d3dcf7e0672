#include "sidm/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include "sidm/error.hpp"

namespace sidm {
namespace {

constexpr int kPoints = 15;

struct Rule {
  std::array<double, kPoints> nodes{};
  std::array<double, kPoints> weights{};
};

// Legendre roots by Newton iteration from the Chebyshev initial guess.
Rule make_rule() {
  Rule r;
  for (int i = 0; i < kPoints; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (kPoints + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= kPoints; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = kPoints * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

const Rule& rule() {
  static const Rule r = make_rule();
  return r;
}

double panel(const std::function<double(double)>& f, double a, double b) {
  const Rule& r = rule();
  double half = 0.5 * (b - a), mid = 0.5 * (a + b), s = 0.0;
  for (int i = 0; i < kPoints; ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return s * half;
}

struct Node {
  double a, b;
  double left, right;
  double err;
  int depth;

  double value() const { return left + right; }
  bool operator<(const Node& o) const { return err < o.err; }
};

Node make_node(const std::function<double(double)>& f, double a, double b, double whole, int depth) {
  const double m = 0.5 * (a + b);
  Node n{a, b, panel(f, a, m), panel(f, m, b), 0.0, depth};
  if (!std::isfinite(n.value())) throw NumericalError("quadrature: non-finite integrand value");
  n.err = std::abs(n.value() - whole);
  return n;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, opts);
  const double whole = panel(f, a, b);
  if (!std::isfinite(whole)) throw NumericalError("quadrature: non-finite integrand value");
  std::priority_queue<Node> heap;
  heap.push(make_node(f, a, b, whole, 0));
  double total = heap.top().value(), err = heap.top().err;
  for (;;) {
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(total);
    if (err <= std::max(opts.abs_tol, floor)) break;
    Node worst = heap.top();
    if (worst.depth >= opts.max_depth) {
      std::ostringstream msg;
      msg << "quadrature did not converge on [" << worst.a << ", " << worst.b << "] (error estimate " << err
          << ")";
      throw NumericalError(msg.str());
    }
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    Node l = make_node(f, worst.a, m, worst.left, worst.depth + 1);
    Node r = make_node(f, m, worst.b, worst.right, worst.depth + 1);
    total += l.value() + r.value() - worst.value();
    err += l.err + r.err - worst.err;
    heap.push(l);
    heap.push(r);
    if (heap.size() % 64 == 0) {
      // Refresh the running sums to shed accumulated rounding.
      auto copy = heap;
      total = err = 0.0;
      for (; !copy.empty(); copy.pop()) {
        total += copy.top().value();
        err += copy.top().err;
      }
    }
  }
  double sum = 0.0;
  std::vector<Node> nodes;
  for (; !heap.empty(); heap.pop()) nodes.push_back(heap.top());
  std::sort(nodes.begin(), nodes.end(), [](const Node& x, const Node& y) { return x.a < y.a; });
  for (const auto& n : nodes) sum += n.value();
  return sum;
}

}  // namespace sidm
