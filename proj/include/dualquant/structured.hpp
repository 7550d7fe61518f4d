#pragma once

#include <span>
#include <vector>

#include "dualquant/grid.hpp"
#include "dualquant/norm.hpp"

namespace dualquant {

/// Strictly increasing knots on the real line.
class OrderedGrid1D {
 public:
  explicit OrderedGrid1D(std::vector<double> knots);
  static OrderedGrid1D uniform(double lo, double hi, std::size_t count);

  std::size_t size() const { return knots_.size(); }
  double front() const { return knots_.front(); }
  double back() const { return knots_.back(); }
  double operator[](std::size_t i) const { return knots_[i]; }
  std::span<const double> knots() const { return knots_; }

  /// Index i with knots[i] <= x <= knots[i+1]; requires front() <= x <= back().
  std::size_t bracket(double x) const;
  Grid to_grid() const;

 private:
  std::vector<double> knots_;
};

/// Cartesian product of per-axis knot sets; never materialised unless asked.
class ProductGrid {
 public:
  explicit ProductGrid(std::vector<OrderedGrid1D> axes);

  Eigen::Index dim() const { return static_cast<Eigen::Index>(axes_.size()); }
  std::size_t size() const;
  const std::vector<OrderedGrid1D>& axes() const { return axes_; }
  const OrderedGrid1D& axis(std::size_t j) const { return axes_[j]; }

  /// All points column-wise, axis 0 varying fastest.
  Grid materialize() const;

 private:
  std::vector<OrderedGrid1D> axes_;
};

/// F^p on the line: the two-knot barycentric cost on the bracketing interval.
double local_error_1d(double site, const OrderedGrid1D& grid, double p);

/// Exact integral of F^p against U([0,1]) for a grid with knots 0 and 1 at
/// its ends: sum_i 2 * gap_i^(p+1) / ((p+1)(p+2)).
double analytic_distortion_uniform_1d(const OrderedGrid1D& grid, double p);

/// Closed form for the uniform n-knot grid on [0,1]: 2/((p+1)(p+2)) * (n-1)^(-p).
double uniform_grid_distortion_1d(std::size_t knots, double p);

/// Product lattice corner + edge * {0, 1/m, ..., 1}^d.
ProductGrid lattice_grid(const Point& corner, double edge, std::size_t subdivisions);

/// Sum over axes of local_error_1d; the p-th power of F_p under the l_p norm.
/// Throws NormMismatch for any other norm.
double product_local_error(const Point& site, const ProductGrid& grid, double p, const NormSpec& norm);

/// Staggered (triangular-lattice) covering of corner + edge * [0,1]^2 with
/// `rows` rows; even rows carry intervals+1 evenly spaced points, odd rows
/// are shifted by half a spacing and include both edge points.
Grid staggered_grid_2d(const Point& corner, double edge, std::size_t rows, std::size_t intervals);
/// Near-equilateral staggered grid whose size is closest to `target`.
Grid staggered_grid_2d(const Point& corner, double edge, std::size_t target);

}  // namespace dualquant
