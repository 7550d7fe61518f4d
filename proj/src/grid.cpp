#include "dualquant/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include <Eigen/QR>

namespace dualquant {

NormSpec NormSpec::parse(const std::string& text) {
  if (text == "linf" || text == "l_inf" || text == "l_infinity" || text == "inf") return linf();
  std::string body = text;
  if (body.rfind("l_", 0) == 0) {
    body = body.substr(2);
  } else if (!body.empty() && body[0] == 'l') {
    body = body.substr(1);
  }
  char* end = nullptr;
  const double r = std::strtod(body.c_str(), &end);
  require(!body.empty() && end != nullptr && *end == '\0', ErrorKind::InvalidArgument,
          "unrecognised norm '" + text + "' (expected l1, l2, linf or l<r>)");
  return lr(r);
}

std::string NormSpec::name() const {
  if (kind_ == Kind::LInfinity) return "linf";
  std::ostringstream os;
  os << 'l' << r_;
  return os.str();
}

Grid::Grid(Eigen::MatrixXd points) : points_(std::move(points)) {
  require(points_.cols() >= 1, ErrorKind::InvalidArgument, "grid needs at least one point");
  require(points_.rows() >= 1, ErrorKind::InvalidArgument, "grid points need dimension >= 1");
  require(points_.allFinite(), ErrorKind::InvalidArgument, "grid coordinates must be finite");
  const double tol = duplicate_tolerance(points_.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < points_.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < points_.cols(); ++j) {
      if ((points_.col(i) - points_.col(j)).cwiseAbs().maxCoeff() < tol) {
        throw Error(ErrorKind::InvalidArgument,
                    "grid points " + std::to_string(i) + " and " + std::to_string(j) + " are duplicates");
      }
    }
  }
}

namespace {
Eigen::MatrixXd stack(std::span<const Point> points) {
  require(!points.empty(), ErrorKind::InvalidArgument, "grid needs at least one point");
  Eigen::MatrixXd m(points.front().size(), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    require(points[i].size() == m.rows(), ErrorKind::InvalidArgument, "grid points have mixed dimensions");
    m.col(static_cast<Eigen::Index>(i)) = points[i];
  }
  return m;
}
}  // namespace

Grid::Grid(std::span<const Point> points) : Grid(stack(points)) {}

Eigen::Index Grid::affine_dimension() const {
  if (size() == 1) return 0;
  Eigen::MatrixXd offsets = points_.rightCols(size() - 1).colwise() - points_.col(0);
  const double scale = offsets.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(offsets / scale);
  qr.setThreshold(1e-10);
  return qr.rank();
}

Eigen::MatrixXd Box::corners() const {
  const Eigen::Index d = dim();
  std::vector<Point> found;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
    Point c(d);
    for (Eigen::Index j = 0; j < d; ++j) c(j) = (mask >> j) & 1u ? upper(j) : lower(j);
    const bool seen = std::any_of(found.begin(), found.end(), [&](const Point& q) { return q == c; });
    if (!seen) found.push_back(c);
  }
  Eigen::MatrixXd out(d, static_cast<Eigen::Index>(found.size()));
  for (std::size_t i = 0; i < found.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = found[i];
  return out;
}

}  // namespace dualquant
