#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "dualquant/norm.hpp"

namespace dualquant {

using Point = Eigen::VectorXd;

/// True when every coordinate is finite.
template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

/// A quantizer: n distinct points of R^d stored column-wise (d x n).
class Grid {
 public:
  /// Validates n >= 1, finite coordinates and pairwise distinct points.
  explicit Grid(Eigen::MatrixXd points);
  explicit Grid(std::span<const Point> points);

  Eigen::Index dim() const { return points_.rows(); }
  Eigen::Index size() const { return points_.cols(); }
  const Eigen::MatrixXd& points() const { return points_; }
  auto point(Eigen::Index i) const { return points_.col(i); }

  /// Dimension of the affine hull of the points.
  Eigen::Index affine_dimension() const;

  /// l_inf threshold below which two points count as duplicates.
  static double duplicate_tolerance(double max_abs_coordinate) { return 1e-12 * (1.0 + max_abs_coordinate); }

 private:
  Eigen::MatrixXd points_;
};

/// Axis-aligned bounding box [lower, upper].
struct Box {
  Point lower;
  Point upper;

  Eigen::Index dim() const { return lower.size(); }
  /// The 2^d corners, column-wise; coincident corners of flat boxes are merged.
  Eigen::MatrixXd corners() const;
};

}  // namespace dualquant
