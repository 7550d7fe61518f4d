#include "dualquant/structured.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dualquant/functional.hpp"

namespace dualquant {

OrderedGrid1D::OrderedGrid1D(std::vector<double> knots) : knots_(std::move(knots)) {
  require(!knots_.empty(), ErrorKind::InvalidArgument, "ordered grid needs at least one knot");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    require(std::isfinite(knots_[i]), ErrorKind::InvalidArgument, "knots must be finite");
    if (i > 0) {
      require(knots_[i] > knots_[i - 1], ErrorKind::InvalidArgument, "knots must be strictly increasing");
    }
  }
}

OrderedGrid1D OrderedGrid1D::uniform(double lo, double hi, std::size_t count) {
  require(count >= 1, ErrorKind::InvalidArgument, "uniform grid needs at least one knot");
  if (count == 1) return OrderedGrid1D({lo});
  std::vector<double> knots(count);
  for (std::size_t i = 0; i < count; ++i) {
    knots[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  knots.back() = hi;
  return OrderedGrid1D(std::move(knots));
}

std::size_t OrderedGrid1D::bracket(double x) const {
  require(x >= front() && x <= back(), ErrorKind::OutsideRange, "site is outside the knot range");
  if (size() == 1) return 0;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const auto i = static_cast<std::size_t>(it - knots_.begin());
  return std::min(i == 0 ? 0 : i - 1, size() - 2);
}

Grid OrderedGrid1D::to_grid() const {
  return Grid(Eigen::MatrixXd(Eigen::Map<const Eigen::RowVectorXd>(knots_.data(), static_cast<Eigen::Index>(size()))));
}

ProductGrid::ProductGrid(std::vector<OrderedGrid1D> axes) : axes_(std::move(axes)) {
  require(!axes_.empty(), ErrorKind::InvalidArgument, "product grid needs at least one axis");
}

std::size_t ProductGrid::size() const {
  std::size_t total = 1;
  for (const auto& axis : axes_) total *= axis.size();
  return total;
}

Grid ProductGrid::materialize() const {
  const std::size_t total = size();
  Eigen::MatrixXd points(dim(), static_cast<Eigen::Index>(total));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (std::size_t j = 0; j < axes_.size(); ++j) {
      points(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(flat)) = axes_[j][rest % axes_[j].size()];
      rest /= axes_[j].size();
    }
  }
  return Grid(std::move(points));
}

double local_error_1d(double site, const OrderedGrid1D& grid, double p) {
  check_exponent(p);
  require(site >= grid.front() && site <= grid.back(), ErrorKind::OutsideRange,
          "site is outside [x_1, x_n]");
  if (grid.size() == 1) return 0.0;
  const std::size_t i = grid.bracket(site);
  const double a = grid[i];
  const double b = grid[i + 1];
  const double left = site - a;
  const double right = b - site;
  return (right * std::pow(left, p) + left * std::pow(right, p)) / (b - a);
}

double analytic_distortion_uniform_1d(const OrderedGrid1D& grid, double p) {
  check_exponent(p);
  require(grid.size() >= 2 && grid.front() == 0.0 && grid.back() == 1.0, ErrorKind::SpanMismatch,
          "grid must span exactly [0, 1]");
  const double factor = 2.0 / ((p + 1.0) * (p + 2.0));
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) total += std::pow(grid[i + 1] - grid[i], p + 1.0);
  return factor * total;
}

double uniform_grid_distortion_1d(std::size_t knots, double p) {
  check_exponent(p);
  require(knots >= 2, ErrorKind::InvalidArgument, "need at least two knots");
  return 2.0 / ((p + 1.0) * (p + 2.0)) * std::pow(static_cast<double>(knots - 1), -p);
}

ProductGrid lattice_grid(const Point& corner, double edge, std::size_t subdivisions) {
  require(corner.size() >= 1 && corner.allFinite(), ErrorKind::InvalidArgument, "corner must be finite");
  std::vector<OrderedGrid1D> axes;
  if (subdivisions == 0 || edge == 0.0) {
    for (Eigen::Index j = 0; j < corner.size(); ++j) axes.emplace_back(std::vector<double>{corner(j)});
    return ProductGrid(std::move(axes));
  }
  require(std::isfinite(edge) && edge > 0.0, ErrorKind::InvalidArgument, "lattice edge must be > 0");
  for (Eigen::Index j = 0; j < corner.size(); ++j) {
    std::vector<double> knots(subdivisions + 1);
    for (std::size_t i = 0; i <= subdivisions; ++i) {
      knots[i] = corner(j) + static_cast<double>(i) * edge / static_cast<double>(subdivisions);
    }
    axes.emplace_back(std::move(knots));
  }
  return ProductGrid(std::move(axes));
}

double product_local_error(const Point& site, const ProductGrid& grid, double p, const NormSpec& norm) {
  check_exponent(p);
  require(norm.is_lr(p), ErrorKind::NormMismatch,
          "product decomposition holds only under the l_p norm (norm " + norm.name() + ")");
  require(site.size() == grid.dim(), ErrorKind::InvalidArgument, "site dimension does not match the grid");
  double total = 0.0;
  for (std::size_t j = 0; j < grid.axes().size(); ++j) {
    total += local_error_1d(site(static_cast<Eigen::Index>(j)), grid.axis(j), p);
  }
  return total;
}

Grid staggered_grid_2d(const Point& corner, double edge, std::size_t rows, std::size_t intervals) {
  require(corner.size() == 2, ErrorKind::InvalidArgument, "staggered grids are two-dimensional");
  require(rows >= 2 && intervals >= 1, ErrorKind::InvalidArgument, "staggered grid needs rows >= 2, intervals >= 1");
  std::vector<Point> points;
  const double spacing = 1.0 / static_cast<double>(intervals);
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = static_cast<double>(r) / static_cast<double>(rows - 1);
    std::vector<double> xs;
    if (r % 2 == 0) {
      for (std::size_t i = 0; i <= intervals; ++i) xs.push_back(static_cast<double>(i) * spacing);
      xs.back() = 1.0;
    } else {
      xs.push_back(0.0);
      for (std::size_t i = 0; i < intervals; ++i) xs.push_back((static_cast<double>(i) + 0.5) * spacing);
      xs.push_back(1.0);
    }
    for (double x : xs) points.push_back(corner + edge * Eigen::Vector2d(x, y));
  }
  return Grid(points);
}

namespace {
std::size_t staggered_size(std::size_t rows, std::size_t intervals) {
  return (rows + 1) / 2 * (intervals + 1) + rows / 2 * (intervals + 2);
}
}  // namespace

Grid staggered_grid_2d(const Point& corner, double edge, std::size_t target) {
  std::size_t best_rows = 2, best_intervals = 1;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (std::size_t intervals = 1; staggered_size(2, intervals) <= 2 * target + 8; ++intervals) {
    const auto rows = static_cast<std::size_t>(std::lround(2.0 * static_cast<double>(intervals) / std::sqrt(3.0))) + 1;
    const std::size_t size = staggered_size(std::max<std::size_t>(rows, 2), intervals);
    const std::size_t gap = size > target ? size - target : target - size;
    if (gap < best_gap) {
      best_gap = gap;
      best_rows = std::max<std::size_t>(rows, 2);
      best_intervals = intervals;
    }
  }
  return staggered_grid_2d(corner, edge, best_rows, best_intervals);
}

}  // namespace dualquant
