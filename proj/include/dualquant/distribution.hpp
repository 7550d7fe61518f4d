#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "dualquant/grid.hpp"
#include "dualquant/rng.hpp"

namespace dualquant {

/// Axis-parallel hypercube corner + edge * [0,1]^d.
struct Cube {
  Point corner;
  double edge = 1.0;
};

/// A samplable law on R^d.
///
/// Samplers (documented so other implementations match in distribution):
///  - uniform cube: corner_j + edge * U_j, U_j uniform on [0,1).
///  - union of cubes: one U selects cube i by inverse CDF of the weights,
///    then a uniform draw in that cube.
///  - gaussian: Box-Muller, z = sqrt(-2 ln U1) * (cos, sin)(2 pi U2), with U1 in (0,1];
///    coordinates are filled pairwise and a trailing odd sine is discarded.
///  - exponential: -ln(U) / rate per axis, U in (0,1].
///  - pareto: U^(-1/index) per axis, U in (0,1]; support [1, inf).
///  - empirical: index floor(U * m) into the stored points.
class Distribution {
 public:
  struct UniformCube { Cube cube; };
  struct UniformCubeUnion { std::vector<Cube> cubes; std::vector<double> weights; };
  struct Gaussian { Eigen::Index dim; };
  struct Exponential { Eigen::Index dim; double rate; };
  struct Pareto { Eigen::Index dim; double index; };
  struct Empirical { Eigen::MatrixXd points; };
  using Variant = std::variant<UniformCube, UniformCubeUnion, Gaussian, Exponential, Pareto, Empirical>;

  static Distribution uniform_cube(Point corner, double edge);
  static Distribution uniform_cube_union(std::vector<Cube> cubes, std::vector<double> weights);
  static Distribution gaussian(Eigen::Index dim);
  static Distribution exponential(Eigen::Index dim, double rate);
  static Distribution pareto(Eigen::Index dim, double index);
  static Distribution empirical(Eigen::MatrixXd points);
  static Distribution point_mass(const Point& atom);

  Eigen::Index dim() const;
  const Variant& spec() const { return spec_; }
  std::string kind_name() const;
  std::string describe() const;

  Point draw(RngStream& rng) const;
  /// count i.i.d. draws, column-wise (d x count).
  Eigen::MatrixXd sample(RngStream& rng, Eigen::Index count) const;

  /// Smallest axis-aligned box containing the support, when bounded.
  std::optional<Box> support_box() const;
  /// Per-axis infimum of the support (may be -inf).
  Point support_lower() const;
  bool has_full_dimensional_support() const;

  /// Density of a one-dimensional absolutely continuous law (nullopt otherwise).
  std::optional<double> density_1d(double x) const;

  /// E|X|^q estimated from the given draws (Euclidean norm).
  static double empirical_moment(const Eigen::MatrixXd& draws, double q);

 private:
  explicit Distribution(Variant spec) : spec_(std::move(spec)) {}

  Variant spec_;
};

}  // namespace dualquant
