#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace dualquant {

/// Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
class GaussLegendre {
 public:
  explicit GaussLegendre(int order);

  int order() const { return static_cast<int>(nodes_.size()); }
  const Eigen::VectorXd& nodes() const { return nodes_; }
  const Eigen::VectorXd& weights() const { return weights_; }

  template <typename F>
  double integrate(F&& f, double a, double b) const {
    if (!(b > a)) return 0.0;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < nodes_.size(); ++i) sum += weights_(i) * f(mid + half * nodes_(i));
    return half * sum;
  }

  /// Integral over [a, inf) via x = a + t / (1 - t), t in [0, 1).
  template <typename F>
  double integrate_right_tail(F&& f, double a) const {
    return integrate(
        [&](double t) {
          const double s = 1.0 - t;
          return f(a + t / s) / (s * s);
        },
        0.0, 1.0);
  }

 private:
  Eigen::VectorXd nodes_;
  Eigen::VectorXd weights_;
};

/// Golden-section minimiser of a unimodal function on [lo, hi].
template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double tolerance) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > tolerance) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace dualquant
