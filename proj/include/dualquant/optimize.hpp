#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dualquant/distribution.hpp"
#include "dualquant/functional.hpp"
#include "dualquant/grid.hpp"

namespace dualquant {

enum class OptimizerMethod { Sgd, LloydLike, Exhaustive1D };

std::string to_string(OptimizerMethod method);
OptimizerMethod parse_optimizer_method(const std::string& text);

struct OptimizerConfig {
  OptimizerMethod method = OptimizerMethod::Sgd;
  std::uint64_t iterations = 20000;
  double step_a = 10.0;   // step_t = step_a / (step_b + t)
  double step_b = 100.0;
  int restarts = 1;
  std::uint64_t samples_per_eval = 20000;
  std::uint64_t final_samples = 100000;
  std::uint64_t seed = 0;
  /// Optimise the extended error (exterior samples pay the nearest-point distance).
  bool extended = false;

  void validate() const;
};

struct TrajectoryPoint {
  std::uint64_t iteration = 0;
  double estimate_p = 0.0;
  double running_best = 0.0;
};

struct OptimizationResult {
  Grid grid;
  DistortionReport final_report;
  std::vector<TrajectoryPoint> trajectory;
  OptimizerConfig config;
};

/// Best grid of at most n points for the dual (or extended dual) distortion.
///
/// sgd: Robbins-Monro on single draws with the envelope gradient, averaging
/// the last 10% of iterates. lloyd_like: full-batch gradient steps on a fixed
/// sample of samples_per_eval draws. exhaustive_1d: cyclic golden-section
/// search over each knot of a one-dimensional grid against the exact
/// (quadrature) objective.
///
/// In non-extended mode the corners of the support box are pinned so the
/// hull always covers the support. The final report is evaluated on a
/// stream distinct from every training stream.
OptimizationResult optimize_grid(const Distribution& dist, std::size_t n, double p, const NormSpec& norm,
                                 const OptimizerConfig& config, const RngStream& rng);

/// Gradient of F^p(sample; grid) (or its extension) with respect to every
/// grid point, column-wise. Interior samples use the certificate weights w
/// and dual slope a: w_i * (grad_x ||x - sample||^p at x_i - a).
Eigen::MatrixXd local_error_gradient(const Grid& grid, const Point& sample, double p, const NormSpec& norm,
                                     bool extended);

/// grid - step * local_error_gradient(grid, sample).
Grid sgd_step(const Grid& grid, const Point& sample, double p, const NormSpec& norm, double step,
              bool extended = false);

/// Monte Carlo estimate of E min_i ||X - x_i||^p.
DistortionReport regular_quantization_distortion(const Distribution& dist, const Grid& grid, double p,
                                                 const NormSpec& norm, std::uint64_t samples, const RngStream& rng);

/// Exact one-dimensional objective used by exhaustive_1d: integral of F^p
/// (extended: plus the outer tails) against a 1D law.
double dual_distortion_1d(const Distribution& dist, std::span<const double> knots, double p, bool extended);

}  // namespace dualquant
