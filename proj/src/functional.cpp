#include "dualquant/functional.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include <Eigen/LU>
#include <Eigen/QR>

#include "dualquant/montecarlo.hpp"

namespace dualquant {

void check_exponent(double p) {
  require(std::isfinite(p) && p >= 1.0, ErrorKind::InvalidArgument,
          "exponent p must be a finite real >= 1, got " + std::to_string(p));
}

double DistortionReport::root() const { return std::pow(std::max(estimate_p, 0.0), 1.0 / p); }

double DistortionReport::root_std_error() const {
  if (estimate_p <= 0.0) return 0.0;
  return std_error / (p * std::pow(estimate_p, (p - 1.0) / p));
}

Eigen::VectorXd dual_costs(const Point& site, const Eigen::MatrixXd& points, double p, const NormSpec& norm,
                           double& scale) {
  Eigen::VectorXd distances(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) distances(i) = norm_eval(site - points.col(i), norm);
  scale = 1.0;
  if (p <= 16.0) return distances.array().pow(p).matrix();

  const double largest = distances.maxCoeff();
  if (largest == 0.0) return Eigen::VectorXd::Zero(points.cols());
  Eigen::VectorXd costs(points.cols());
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    costs(i) = distances(i) == 0.0 ? 0.0 : std::exp(p * (std::log(distances(i)) - std::log(largest)));
  }
  scale = std::pow(largest, p);
  return costs;
}

LocalErrorEvaluator::LocalErrorEvaluator(const Grid& grid, double p, NormSpec norm)
    : grid_(grid), p_(p), norm_(norm), solver_(grid.points()) {
  check_exponent(p);
}

std::optional<LocalErrorResult> LocalErrorEvaluator::interior(const Point& site) {
  require(site.size() == grid_.dim(), ErrorKind::InvalidArgument, "site dimension does not match the grid");
  require(site.allFinite(), ErrorKind::InvalidArgument, "site must be finite");
  double scale = 1.0;
  const Eigen::VectorXd costs = dual_costs(site, grid_.points(), p_, norm_, scale);
  auto cert = solver_.solve(site, costs);
  if (!cert) return std::nullopt;
  if (scale != 1.0) {
    cert->value *= scale;
    cert->dual_slope *= scale;
    cert->dual_offset *= scale;
  }
  LocalErrorResult result;
  result.value_p = cert->value;
  result.branch = Branch::Interior;
  result.certificate = std::move(cert);
  return result;
}

LocalErrorResult LocalErrorEvaluator::local_error(const Point& site) {
  auto result = interior(site);
  if (!result) throw Error(ErrorKind::OutsideHull, "site is outside the convex hull of the grid");
  return *std::move(result);
}

LocalErrorResult LocalErrorEvaluator::local_error_extended(const Point& site) {
  if (auto result = interior(site)) return *std::move(result);
  const NearestNeighbor nn = nearest(site);
  LocalErrorResult result;
  result.value_p = std::pow(nn.distance, p_);
  result.branch = Branch::Exterior;
  result.nearest_index = nn.index;
  return result;
}

NearestNeighbor LocalErrorEvaluator::nearest(const Point& site) const {
  return nearest_neighbor_project(site, grid_, norm_);
}

LocalErrorResult local_error(const Point& site, const Grid& grid, double p, const NormSpec& norm) {
  return LocalErrorEvaluator(grid, p, norm).local_error(site);
}

LocalErrorResult local_error_extended(const Point& site, const Grid& grid, double p, const NormSpec& norm) {
  return LocalErrorEvaluator(grid, p, norm).local_error_extended(site);
}

NearestNeighbor nearest_neighbor_project(const Point& site, const Grid& grid, const NormSpec& norm) {
  require(site.size() == grid.dim(), ErrorKind::InvalidArgument, "site dimension does not match the grid");
  NearestNeighbor best{0, std::numeric_limits<double>::infinity()};
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double dist = norm_eval(site - grid.point(i), norm);
    if (dist < best.distance) best = {i, dist};
  }
  return best;
}

Eigen::Index draw_from_certificate(const BarycentricCertificate& certificate, RngStream& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t k = 0; k < certificate.support.size(); ++k) {
    cumulative += certificate.weights(static_cast<Eigen::Index>(k));
    if (u < cumulative) return certificate.support[k];
  }
  return certificate.support.back();
}

Point split(const Point& site, const Grid& grid, double p, const NormSpec& norm, RngStream& rng) {
  const LocalErrorResult r = local_error(site, grid, p, norm);
  return grid.point(draw_from_certificate(*r.certificate, rng));
}

Point split_extended(const Point& site, const Grid& grid, double p, const NormSpec& norm, RngStream& rng) {
  const LocalErrorResult r = local_error_extended(site, grid, p, norm);
  if (r.branch == Branch::Exterior) return grid.point(*r.nearest_index);
  return grid.point(draw_from_certificate(*r.certificate, rng));
}

double local_error_bruteforce(const Point& site, const Grid& grid, double p, const NormSpec& norm) {
  check_exponent(p);
  const Eigen::Index n = grid.size();
  const Eigen::Index d = grid.dim();
  require(n <= kBruteForceMaxPoints && d <= kBruteForceMaxDim, ErrorKind::TooLarge,
          "enumeration oracle is limited to 12 points in dimension <= 4");
  require(site.size() == d, ErrorKind::InvalidArgument, "site dimension does not match the grid");

  const double tol = 1e-9 * (1.0 + site.norm());
  const double scale = std::max(1.0, grid.points().cwiseAbs().maxCoeff());
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const int k = std::popcount(mask);
    if (k > d + 1) continue;
    Eigen::MatrixXd system(d + 1, k);
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0, c = 0; i < n; ++i) {
      if (!(mask >> i & 1u)) continue;
      system.col(c).head(d) = grid.point(i) / scale;
      system(d, c) = 1.0;
      members.push_back(i);
      ++c;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    lu.setThreshold(1e-10);
    if (lu.rank() < k) continue;  // not affinely independent
    Eigen::VectorXd target(d + 1);
    target.head(d) = site / scale;
    target(d) = 1.0;
    const Eigen::VectorXd weights = system.colPivHouseholderQr().solve(target);
    if ((system * weights - target).norm() * scale > tol) continue;
    if (weights.minCoeff() < -1e-12) continue;
    double cost = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      cost += std::max(weights(c), 0.0) * std::pow(norm_eval(site - grid.point(members[c]), norm), p);
    }
    best = std::min(best, cost);
  }
  if (!std::isfinite(best)) throw Error(ErrorKind::OutsideHull, "no subset of the grid contains the site");
  return best;
}

DistortionReport estimate_distortion(const Distribution& dist, const Grid& grid, double p, const NormSpec& norm,
                                     std::uint64_t samples, const RngStream& rng, bool extended) {
  check_exponent(p);
  require(samples >= 1, ErrorKind::InvalidArgument, "sample count must be >= 1");
  require(dist.dim() == grid.dim(), ErrorKind::InvalidArgument, "distribution and grid dimensions differ");
  const auto stats = run_sharded<1>(samples, rng, [&] {
    return [evaluator = LocalErrorEvaluator(grid, p, norm), &dist, extended](RngStream& stream) mutable {
      const Point x = dist.draw(stream);
      const double v = extended ? evaluator.local_error_extended(x).value_p : evaluator.local_error(x).value_p;
      return std::array<double, 1>{v};
    };
  });
  DistortionReport report;
  report.estimate_p = stats[0].mean();
  report.std_error = stats[0].std_error();
  report.samples = samples;
  report.seed = rng.seed();
  report.stream_id = rng.stream_id();
  report.extended = extended;
  report.p = p;
  report.norm = norm;
  return report;
}

}  // namespace dualquant
