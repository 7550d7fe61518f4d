#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dualquant/distribution.hpp"
#include "dualquant/rng.hpp"

namespace dualquant {

/// Splitting functionals at level n: nearest-knot (Voronoi) or randomised
/// two-knot (dual) selection. Both return x_1 below the knots and x_n above.
enum class SplittingKind { Voronoi, Dual };

/// What a Pierce scan averages per draw.
///  - Envelope: A_{p,n}(knots, X)^p, the deterministic bound on any splitting functional.
///  - Dual: the extended dual error of the random grid, E_U |X - Phi_dual|^p.
enum class PierceFunctional { Envelope, Dual };

/// `knots` must be non-decreasing (repeated knots allowed).
double apply_splitting(SplittingKind kind, std::span<const double> knots, double site, RngStream& rng);

/// A_{p,n} in root form: the bracketing gap [x_i, x_{i+1}) inside, the
/// distance to the extreme knot outside. Independent of p.
double a_pn(std::span<const double> knots, double site);

/// Sorted i.i.d. Pareto(index) draws, all >= 1.
std::vector<double> pareto_order_statistics(std::size_t n, double index, RngStream& rng);

struct PierceScanRow {
  std::size_t n = 0;
  double error_p_root = 0.0;  // (E[...])^(1/p)
  double normalized = 0.0;    // n^(1/d) * error_p_root
  double std_error = 0.0;     // of error_p_root (delta method)
};

struct PierceScanConfig {
  double p = 2.0;
  double eta = 1.0;
  double delta = 0.0;  // Pareto index; 0 selects p / (2 eta)
  std::vector<std::size_t> n_values;
  std::uint64_t samples = 20000;
  PierceFunctional functional = PierceFunctional::Envelope;

  double pareto_index() const { return delta > 0.0 ? delta : p / (2.0 * eta); }
};

struct PierceScanResult {
  std::vector<PierceScanRow> rows;
  /// Non-empty when the empirical (p+eta)-moment looks unstable.
  std::string moment_warning;
};

/// Random knot set for one axis built from Pareto order statistics, with at
/// most `n` knots. One-sided (support bounded below by 0) knots are
/// {0} U {Y_(i) - 1 : i <= n - l + 1}, l = ceil(p / delta); otherwise both
/// half-lines get such a set with (n - 1) / 2 knots each, mirrored through 0.
std::vector<double> pierce_random_knots(std::size_t n, double p, double delta, bool one_sided, RngStream& rng);

/// n * (E A_{p,n}^p)^(1/p) (or the dual variant) for a one-dimensional law.
PierceScanResult pierce_scan_1d(const Distribution& dist, const PierceScanConfig& config, const RngStream& rng);

/// Product construction: floor(n^(1/d)) random knots per axis, combined
/// under the l_p norm; rows report n^(1/d) * error.
PierceScanResult pierce_scan_product(const Distribution& dist, const PierceScanConfig& config, const RngStream& rng);

/// Largest integer m with m^d <= n.
std::size_t integer_root(std::size_t n, std::size_t d);

}  // namespace dualquant
