#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Core>

#include "dualquant/error.hpp"

namespace dualquant {

/// A norm from the l^r family on R^d, r in [1, inf].
class NormSpec {
 public:
  enum class Kind { Lr, LInfinity };

  static NormSpec lr(double r) {
    require(std::isfinite(r) && r >= 1.0, ErrorKind::InvalidArgument,
            "l_r norm requires r >= 1, got " + std::to_string(r));
    return NormSpec(Kind::Lr, r);
  }
  static NormSpec l1() { return lr(1.0); }
  static NormSpec l2() { return lr(2.0); }
  static NormSpec linf() { return NormSpec(Kind::LInfinity, std::numeric_limits<double>::infinity()); }

  /// Parses "l1", "l2", "linf", "l3.5", ...
  static NormSpec parse(const std::string& text);

  Kind kind() const { return kind_; }
  double r() const { return r_; }
  bool is_lr(double r) const { return kind_ == Kind::Lr && std::abs(r_ - r) <= 1e-12 * r; }
  std::string name() const;

  friend bool operator==(const NormSpec&, const NormSpec&) = default;

 private:
  NormSpec(Kind kind, double r) : kind_(kind), r_(r) {}

  Kind kind_;
  double r_;
};

template <typename Derived>
typename Derived::Scalar norm_eval(const Eigen::MatrixBase<Derived>& v, const NormSpec& norm) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) return Scalar(0);
  if (norm.kind() == NormSpec::Kind::LInfinity) return v.cwiseAbs().maxCoeff();
  const double r = norm.r();
  if (r == 1.0) return v.cwiseAbs().sum();
  if (r == 2.0) return v.stableNorm();
  // Scale by the largest magnitude so |v_i|^r cannot overflow.
  const Scalar peak = v.cwiseAbs().maxCoeff();
  if (peak == Scalar(0)) return Scalar(0);
  const Scalar sum = (v.cwiseAbs() / peak).array().pow(Scalar(r)).sum();
  return peak * std::pow(sum, Scalar(1.0 / r));
}

/// Gradient of x -> ||x|| at v != 0 (a subgradient at kinks).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> norm_gradient(const Eigen::MatrixBase<Derived>& v,
                                                                        const NormSpec& norm) {
  using Scalar = typename Derived::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector g = Vector::Zero(v.size());
  const Scalar length = norm_eval(v, norm);
  if (length == Scalar(0)) return g;
  if (norm.kind() == NormSpec::Kind::LInfinity) {
    Eigen::Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    g(at) = v(at) > 0 ? Scalar(1) : Scalar(-1);
    return g;
  }
  const Scalar r = Scalar(norm.r());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const Scalar a = std::abs(v(i));
    if (a == Scalar(0)) continue;
    const Scalar sign = v(i) > 0 ? Scalar(1) : Scalar(-1);
    g(i) = sign * std::pow(a / length, r - Scalar(1));
  }
  return g;
}

}  // namespace dualquant
