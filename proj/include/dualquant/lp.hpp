#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "dualquant/error.hpp"
#include "dualquant/grid.hpp"

namespace dualquant {

/// Witness for the barycentric minimum
///
///   min sum_i w_i c_i  s.t.  sum_i w_i x_i = site, sum_i w_i = 1, w >= 0.
///
/// `support` holds grid indices in increasing order with strictly positive
/// weights. The dual solution is returned as an affine function
/// phi(x) = dual_slope . x + dual_offset with phi(x_i) <= c_i for every grid
/// point, equality on the support, and phi(site) = value.
template <typename Scalar>
struct BarycentricCertificateT {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Scalar value = Scalar(0);
  std::vector<Eigen::Index> support;
  Vector weights;
  Vector dual_slope;
  Scalar dual_offset = Scalar(0);
  int iterations = 0;

  /// sum_i w_i x_i over the support.
  template <typename Points>
  Vector barycenter(const Eigen::MatrixBase<Points>& points) const {
    Vector out = Vector::Zero(points.rows());
    for (std::size_t k = 0; k < support.size(); ++k) {
      out += weights(static_cast<Eigen::Index>(k)) * points.col(support[k]);
    }
    return out;
  }
};

using BarycentricCertificate = BarycentricCertificateT<double>;

/// Dense two-phase simplex specialised to the barycentric LP of a fixed
/// point set. The affine hull of the points is computed once; each solve
/// works in affine coordinates with (k+1) equality rows, k the affine
/// dimension, so degenerate point sets never produce redundant rows.
///
/// Pricing is Dantzig (most negative reduced cost, lowest index on ties)
/// and switches to Bland's rule after a run of degenerate pivots. If the
/// iteration cap is hit the solve is retried under Bland's rule from the
/// start before NumericalFailure is raised.
template <typename Scalar>
class BarycentricSolver {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Certificate = BarycentricCertificateT<Scalar>;

  /// Relative feasibility tolerance: a site is inside when its residual is
  /// below kFeasibilityTolerance * (1 + |site|).
  static constexpr double kFeasibilityTolerance = 1e-9;

  explicit BarycentricSolver(const Eigen::Ref<const Matrix>& points) : points_(points) {
    require(points_.cols() >= 1 && points_.rows() >= 1, ErrorKind::InvalidArgument, "empty point set");
    require(points_.allFinite(), ErrorKind::InvalidArgument, "point coordinates must be finite");
    origin_ = points_.col(0);
    const Matrix offsets = points_.colwise() - origin_;
    scale_ = offsets.cwiseAbs().maxCoeff();
    if (!(scale_ > Scalar(0))) scale_ = Scalar(1);
    Eigen::ColPivHouseholderQR<Matrix> qr(offsets / scale_);
    qr.setThreshold(Scalar(1e-10));
    rank_ = qr.rank();
    basis_ = Matrix(qr.householderQ()).leftCols(rank_);
    rows_ = rank_ + 1;
    constraints_.resize(rows_, points_.cols());
    constraints_.topRows(rank_) = basis_.transpose() * offsets / scale_;
    constraints_.row(rank_).setOnes();
  }

  Eigen::Index dim() const { return points_.rows(); }
  Eigen::Index size() const { return points_.cols(); }
  Eigen::Index affine_dimension() const { return rank_; }
  const Matrix& points() const { return points_; }

  /// Global optimum of the barycentric LP, or nullopt when the site is
  /// outside the convex hull. Boundary sites count as inside.
  template <typename Site, typename Costs>
  std::optional<Certificate> solve(const Eigen::MatrixBase<Site>& site, const Eigen::MatrixBase<Costs>& costs) {
    require(site.size() == dim(), ErrorKind::InvalidArgument, "site dimension does not match the grid");
    require(costs.size() == size(), ErrorKind::InvalidArgument, "one cost per grid point required");
    require(site.allFinite(), ErrorKind::InvalidArgument, "site must be finite");
    require(costs.allFinite() && (costs.array() >= Scalar(0)).all(), ErrorKind::InvalidArgument,
            "costs must be finite and nonnegative");
    if (!prepare_rhs(site)) return std::nullopt;

    const Scalar cost_scale = costs.maxCoeff() > Scalar(0) ? costs.maxCoeff() : Scalar(1);
    cost_ = costs / cost_scale;
    for (int attempt = 0; attempt < 2; ++attempt) {
      const bool bland = attempt == 1;
      if (!phase_one(site, bland)) return std::nullopt;
      if (phase_two(bland)) return certificate(site, costs, cost_scale);
    }
    throw Error(ErrorKind::NumericalFailure, "simplex did not terminate after anti-cycling retry");
  }

  /// Feasibility of the barycentric system (phase I only).
  template <typename Site>
  bool contains(const Eigen::MatrixBase<Site>& site) {
    require(site.size() == dim(), ErrorKind::InvalidArgument, "site dimension does not match the grid");
    if (!site.allFinite()) return false;
    if (!prepare_rhs(site)) return false;
    return phase_one(site, false);
  }

 private:
  static constexpr Scalar kPivotTolerance = Scalar(1e-11);
  static constexpr Scalar kOptimalityTolerance = Scalar(1e-12);
  static constexpr int kStallThreshold = 20;

  template <typename Site>
  Scalar site_tolerance(const Eigen::MatrixBase<Site>& site) const {
    return Scalar(kFeasibilityTolerance) * (Scalar(1) + site.norm());
  }

  // Affine coordinates of the site; false when it leaves the affine hull.
  template <typename Site>
  bool prepare_rhs(const Eigen::MatrixBase<Site>& site) {
    const Vector offset = (site - origin_) / scale_;
    rhs_.resize(rows_);
    rhs_.head(rank_) = basis_.transpose() * offset;
    rhs_(rank_) = Scalar(1);
    const Scalar residual = (offset - basis_ * rhs_.head(rank_)).norm() * scale_;
    return residual <= site_tolerance(site);
  }

  Eigen::Index columns() const { return size() + rows_; }

  // Column j of [A | I] with rows sign-flipped so that rhs >= 0.
  Scalar entry(Eigen::Index row, Eigen::Index col) const {
    if (col < size()) return sign_(row) * constraints_(row, col);
    return col - size() == row ? Scalar(1) : Scalar(0);
  }

  void load_basis_matrix() {
    basis_matrix_.resize(rows_, rows_);
    for (Eigen::Index k = 0; k < rows_; ++k) {
      for (Eigen::Index r = 0; r < rows_; ++r) basis_matrix_(r, k) = entry(r, basis_index_[k]);
    }
    lu_.compute(basis_matrix_);
    basic_values_ = lu_.solve(signed_rhs_);
  }

  Vector column(Eigen::Index col) const {
    Vector a(rows_);
    for (Eigen::Index r = 0; r < rows_; ++r) a(r) = entry(r, col);
    return a;
  }

  // One simplex run over the allowed columns; returns false on the iteration cap.
  bool iterate(const Vector& objective, bool allow_artificial, bool bland) {
    const Eigen::Index limit = 1000 + 50 * columns();
    int degenerate_run = 0;
    Matrix signed_constraints = sign_.asDiagonal() * constraints_;
    for (Eigen::Index it = 0; it < limit; ++it) {
      ++iterations_;
      load_basis_matrix();
      Vector basic_cost(rows_);
      for (Eigen::Index k = 0; k < rows_; ++k) basic_cost(k) = objective(basis_index_[k]);
      duals_ = lu_.transpose().solve(basic_cost);

      reduced_.noalias() = objective.head(size()) - signed_constraints.transpose() * duals_;
      Eigen::Index entering = -1;
      Scalar best = -kOptimalityTolerance;
      auto consider = [&](Eigen::Index j, Scalar rc) {
        if (in_basis_[j]) return;
        if (bland) {
          if (entering < 0 && rc < -kOptimalityTolerance) entering = j;
        } else if (rc < best) {
          best = rc;
          entering = j;
        }
      };
      for (Eigen::Index j = 0; j < size(); ++j) consider(j, reduced_(j));
      if (allow_artificial) {
        for (Eigen::Index r = 0; r < rows_; ++r) consider(size() + r, objective(size() + r) - duals_(r));
      }
      if (entering < 0) return true;

      const Vector direction = lu_.solve(column(entering));
      Eigen::Index leaving = -1;
      Scalar ratio = std::numeric_limits<Scalar>::infinity();
      for (Eigen::Index k = 0; k < rows_; ++k) {
        if (direction(k) <= kPivotTolerance) continue;
        const Scalar t = std::max(basic_values_(k), Scalar(0)) / direction(k);
        const bool tie = leaving >= 0 && std::abs(t - ratio) <= Scalar(1e-14) * (Scalar(1) + ratio);
        if (t < ratio && !tie) {
          ratio = t;
          leaving = k;
        } else if (tie && basis_index_[k] < basis_index_[leaving]) {
          leaving = k;
        }
      }
      if (leaving < 0) {
        throw Error(ErrorKind::NumericalFailure, "unbounded direction in a bounded barycentric LP");
      }
      degenerate_run = ratio <= Scalar(1e-14) ? degenerate_run + 1 : 0;
      if (degenerate_run > kStallThreshold) bland = true;
      in_basis_[basis_index_[leaving]] = false;
      basis_index_[leaving] = entering;
      in_basis_[entering] = true;
    }
    return false;
  }

  template <typename Site>
  bool phase_one(const Eigen::MatrixBase<Site>& site, bool bland) {
    iterations_ = 0;
    sign_ = rhs_.unaryExpr([](Scalar v) { return v < Scalar(0) ? Scalar(-1) : Scalar(1); });
    signed_rhs_ = sign_.cwiseProduct(rhs_);
    basis_index_.resize(rows_);
    in_basis_.assign(columns(), false);
    for (Eigen::Index r = 0; r < rows_; ++r) {
      basis_index_[r] = size() + r;
      in_basis_[size() + r] = true;
    }
    Vector objective = Vector::Zero(columns());
    objective.tail(rows_).setOnes();
    if (!iterate(objective, true, bland)) {
      if (bland) throw Error(ErrorKind::NumericalFailure, "phase I did not terminate");
      return phase_one(site, true);
    }
    load_basis_matrix();
    Scalar infeasibility = Scalar(0);
    for (Eigen::Index k = 0; k < rows_; ++k) {
      if (basis_index_[k] >= size()) infeasibility += std::abs(basic_values_(k));
    }
    if (infeasibility * std::max(scale_, Scalar(1)) > site_tolerance(site)) return false;
    drive_out_artificials();
    return true;
  }

  // Degenerate pivots replacing zero-level artificials by structural columns.
  void drive_out_artificials() {
    for (Eigen::Index k = 0; k < rows_; ++k) {
      if (basis_index_[k] < size()) continue;
      load_basis_matrix();
      Vector unit = Vector::Zero(rows_);
      unit(k) = Scalar(1);
      const Vector row = lu_.transpose().solve(unit);
      Eigen::Index pick = -1;
      Scalar largest = Scalar(1e-9);
      for (Eigen::Index j = 0; j < size(); ++j) {
        if (in_basis_[j]) continue;
        const Scalar v = std::abs(row.dot(column(j)));
        if (v > largest) {
          largest = v;
          pick = j;
        }
      }
      if (pick < 0) throw Error(ErrorKind::NumericalFailure, "redundant equality row after affine reduction");
      in_basis_[basis_index_[k]] = false;
      basis_index_[k] = pick;
      in_basis_[pick] = true;
    }
  }

  bool phase_two(bool bland) {
    Vector objective = Vector::Zero(columns());
    objective.head(size()) = cost_;
    return iterate(objective, false, bland);
  }

  template <typename Site, typename Costs>
  Certificate certificate(const Eigen::MatrixBase<Site>& site, const Eigen::MatrixBase<Costs>& costs,
                          Scalar cost_scale) {
    load_basis_matrix();
    std::vector<Eigen::Index> basic(basis_index_.begin(), basis_index_.end());
    std::sort(basic.begin(), basic.end());

    // Re-solve the weights in the original coordinates so the barycenter
    // matches the site to working precision.
    const Eigen::Index m = static_cast<Eigen::Index>(basic.size());
    Matrix system(dim() + 1, m);
    for (Eigen::Index k = 0; k < m; ++k) {
      system.col(k).head(dim()) = (points_.col(basic[k]) - origin_) / scale_;
      system(dim(), k) = Scalar(1);
    }
    Vector target(dim() + 1);
    target.head(dim()) = (site - origin_) / scale_;
    target(dim()) = Scalar(1);
    Vector weights = system.colPivHouseholderQr().solve(target);

    Certificate cert;
    std::vector<Scalar> kept;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (weights(k) > Scalar(1e-15)) {
        cert.support.push_back(basic[k]);
        kept.push_back(weights(k));
      }
    }
    if (cert.support.empty()) throw Error(ErrorKind::NumericalFailure, "optimal basis carries no weight");
    cert.weights = Eigen::Map<const Vector>(kept.data(), static_cast<Eigen::Index>(kept.size()));
    cert.weights /= cert.weights.sum();

    Scalar value = Scalar(0);
    Scalar cheapest = std::numeric_limits<Scalar>::infinity();
    for (std::size_t k = 0; k < cert.support.size(); ++k) {
      value += cert.weights(static_cast<Eigen::Index>(k)) * costs(cert.support[k]);
      cheapest = std::min(cheapest, Scalar(costs(cert.support[k])));
    }
    // A convex combination never drops below its smallest term.
    cert.value = std::max(value, cheapest);

    // Undo row signs, affine coordinates and cost scaling on the duals.
    const Vector y = sign_.cwiseProduct(duals_) * cost_scale;
    cert.dual_slope = basis_ * y.head(rank_) / scale_;
    cert.dual_offset = y(rank_) - cert.dual_slope.dot(origin_);
    cert.iterations = iterations_;
    return cert;
  }

  Matrix points_;
  Vector origin_;
  Scalar scale_ = Scalar(1);
  Eigen::Index rank_ = 0;
  Eigen::Index rows_ = 1;
  Matrix basis_;
  Matrix constraints_;

  // Per-solve workspace.
  Vector rhs_, sign_, signed_rhs_, cost_, duals_, reduced_, basic_values_;
  Matrix basis_matrix_;
  Eigen::PartialPivLU<Matrix> lu_;
  std::vector<Eigen::Index> basis_index_;
  std::vector<bool> in_basis_;
  int iterations_ = 0;
};

/// One-shot solve of the barycentric LP for `site` over `grid`.
std::optional<BarycentricCertificate> solve_barycentric_min(const Point& site, const Grid& grid,
                                                            const Eigen::VectorXd& costs);

/// True iff site lies in the (closed) convex hull of the grid.
bool hull_contains(const Point& site, const Grid& grid);

}  // namespace dualquant
