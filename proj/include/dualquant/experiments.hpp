#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dualquant/config.hpp"
#include "dualquant/functional.hpp"
#include "dualquant/pierce.hpp"

namespace dualquant {

struct RateScanRow {
  std::size_t n = 0;
  Eigen::Index d = 0;
  double p = 2.0;
  double estimate = 0.0;   // p-th root of the Monte Carlo mean
  double std_error = 0.0;  // of estimate
  double normalized = 0.0; // n^(1/d) * estimate
  std::string grid_source;
  std::uint64_t seed = 0;
  /// Set when some draw fell outside the grid's hull; numbers are then NaN.
  bool failed = false;
  std::string failure;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct QdqBoundReport {
  double empirical_q = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct ComparisonRow {
  std::size_t n = 0;
  double dual_estimate = 0.0;  // NaN when some draw left the hull
  double extended_estimate = 0.0;
  double voronoi_estimate = 0.0;
  std::uint64_t exterior_draws = 0;
};

/// Grid of (about) n points for the configured law. Lattice grids need
/// n = (m+1)^d and a bounded support box; staggered grids pick the
/// near-equilateral size closest to n on a square support.
Grid build_grid(const ExperimentConfig& config, std::size_t n);

/// Evaluation stream of the row for grid size n.
RngStream row_stream(std::uint64_t seed, std::size_t n);

std::vector<RateScanRow> run_rate_scan(const ExperimentConfig& config);

/// Least squares of log(estimate) on log(n) over rows with positive estimates.
RateFit fit_rate(std::span<const RateScanRow> rows);
RateFit fit_rate(std::span<const double> n, std::span<const double> estimate);

/// Bound d^(1/r) * (2/((p+1)(p+2)))^(1/p) against the smallest
/// normalized - 3 * normalized std error over the rows.
QdqBoundReport check_qdq_bound(Eigen::Index d, double r, double p, std::span<const RateScanRow> rows);

/// Dual, extended and nearest-neighbour distortions on the same draws.
std::vector<ComparisonRow> run_comparison(const ExperimentConfig& config);

PierceScanResult run_pierce_scan(const ExperimentConfig& config);

/// A column-labelled table written as CSV or as a JSON array of objects.
struct Table {
  using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void write_csv(std::ostream& out) const;
  void write_json(std::ostream& out) const;
};

Table rate_scan_table(std::span<const RateScanRow> rows);
Table comparison_table(std::span<const ComparisonRow> rows);
Table pierce_table(const PierceScanResult& result);

}  // namespace dualquant
