#pragma once

#include <cstdint>
#include <optional>

#include "dualquant/distribution.hpp"
#include "dualquant/grid.hpp"
#include "dualquant/lp.hpp"
#include "dualquant/norm.hpp"
#include "dualquant/rng.hpp"

namespace dualquant {

enum class Branch { Interior, Exterior };

/// Local (extended) dual quantization error at one site, as a p-th power.
struct LocalErrorResult {
  double value_p = 0.0;
  Branch branch = Branch::Interior;
  std::optional<BarycentricCertificate> certificate;  // interior only
  std::optional<Eigen::Index> nearest_index;          // exterior only
};

struct NearestNeighbor {
  Eigen::Index index = 0;
  double distance = 0.0;
};

/// Monte Carlo estimate of E[F^p] (or E[Fbar^p] when `extended`).
struct DistortionReport {
  double estimate_p = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  bool extended = false;
  double p = 1.0;
  NormSpec norm = NormSpec::l2();

  /// estimate_p^(1/p), the distortion itself.
  double root() const;
  /// Delta-method standard error of root().
  double root_std_error() const;
};

/// Costs ||site - x_i||^p. For p > 16 the costs are computed in the log
/// domain and divided by their maximum; the factor is returned in `scale`
/// so that true costs are costs * scale.
Eigen::VectorXd dual_costs(const Point& site, const Eigen::MatrixXd& points, double p, const NormSpec& norm,
                           double& scale);

/// Evaluates F_p and its extension against a fixed grid, reusing the
/// grid's affine reduction across calls. Not thread-safe; use one per thread.
class LocalErrorEvaluator {
 public:
  LocalErrorEvaluator(const Grid& grid, double p, NormSpec norm);

  const Grid& grid() const { return grid_; }
  double p() const { return p_; }
  const NormSpec& norm() const { return norm_; }

  /// Throws OutsideHull when the site is not in conv(grid).
  LocalErrorResult local_error(const Point& site);
  LocalErrorResult local_error_extended(const Point& site);
  NearestNeighbor nearest(const Point& site) const;

 private:
  std::optional<LocalErrorResult> interior(const Point& site);

  Grid grid_;
  double p_;
  NormSpec norm_;
  BarycentricSolver<double> solver_;
};

void check_exponent(double p);

LocalErrorResult local_error(const Point& site, const Grid& grid, double p, const NormSpec& norm);
LocalErrorResult local_error_extended(const Point& site, const Grid& grid, double p, const NormSpec& norm);

/// Closest grid point; ties go to the lowest index.
NearestNeighbor nearest_neighbor_project(const Point& site, const Grid& grid, const NormSpec& norm);

/// Draws support index i with probability equal to its certificate weight.
Eigen::Index draw_from_certificate(const BarycentricCertificate& certificate, RngStream& rng);

/// Random splitting operator: a grid point whose conditional mean is the
/// site. Throws OutsideHull for exterior sites.
Point split(const Point& site, const Grid& grid, double p, const NormSpec& norm, RngStream& rng);
/// Extended splitting operator: exterior sites map to their nearest neighbour.
Point split_extended(const Point& site, const Grid& grid, double p, const NormSpec& norm, RngStream& rng);

/// Largest grid accepted by the enumeration oracle.
inline constexpr Eigen::Index kBruteForceMaxPoints = 12;
inline constexpr Eigen::Index kBruteForceMaxDim = 4;

/// F_p^p by enumeration of affinely independent subsets of size <= d+1.
/// Independent of the simplex path; throws TooLarge beyond the guard and
/// OutsideHull when no subset contains the site.
double local_error_bruteforce(const Point& site, const Grid& grid, double p, const NormSpec& norm);

/// Sharded Monte Carlo estimate of the (extended) dual distortion.
DistortionReport estimate_distortion(const Distribution& dist, const Grid& grid, double p, const NormSpec& norm,
                                     std::uint64_t samples, const RngStream& rng, bool extended);

}  // namespace dualquant
