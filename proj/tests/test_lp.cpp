#include <doctest.h>

#include <cmath>

#include <Eigen/LU>

#include "dualquant/functional.hpp"
#include "dualquant/lp.hpp"

using namespace dualquant;

namespace {

Eigen::MatrixXd random_points(RngStream& rng, Eigen::Index d, Eigen::Index n) {
  Eigen::MatrixXd x(d, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(j, i) = rng.uniform();
  return x;
}

Point random_convex_combination(RngStream& rng, const Eigen::MatrixXd& x) {
  Eigen::VectorXd w(x.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = -std::log(rng.uniform_open_left());
  return x * (w / w.sum());
}

Eigen::VectorXd costs_for(const Point& site, const Eigen::MatrixXd& x, double p, const NormSpec& norm) {
  Eigen::VectorXd c(x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) c(i) = std::pow(norm_eval(Point(site - x.col(i)), norm), p);
  return c;
}

// Optimality by weak duality: primal feasible, dual feasible, equal objectives.
void check_certificate(const BarycentricCertificate& cert, const Point& site, const Eigen::MatrixXd& x,
                       const Eigen::VectorXd& costs) {
  const Eigen::Index d = x.rows();
  const double scale = 1.0 + costs.cwiseAbs().maxCoeff();
  REQUIRE(cert.support.size() == static_cast<std::size_t>(cert.weights.size()));
  CHECK(cert.weights.minCoeff() > 0.0);
  CHECK(std::abs(cert.weights.sum() - 1.0) <= 1e-10);
  CHECK((cert.barycenter(x) - site).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + site.norm()));
  CHECK(cert.support.size() <= static_cast<std::size_t>(d + 1));
  CHECK(std::is_sorted(cert.support.begin(), cert.support.end()));
  // affinely independent support
  Eigen::MatrixXd lifted(d + 1, static_cast<Eigen::Index>(cert.support.size()));
  for (std::size_t k = 0; k < cert.support.size(); ++k) {
    lifted.col(static_cast<Eigen::Index>(k)).head(d) = x.col(cert.support[k]);
    lifted(d, static_cast<Eigen::Index>(k)) = 1.0;
  }
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(lifted).rank() == lifted.cols());
  // reduced costs c_i - phi(x_i) >= 0, zero on the support
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const double reduced = costs(i) - (cert.dual_slope.dot(x.col(i)) + cert.dual_offset);
    CHECK(reduced >= -1e-9 * scale);
  }
  for (auto i : cert.support) {
    CHECK(std::abs(costs(i) - cert.dual_slope.dot(x.col(i)) - cert.dual_offset) <= 1e-9 * scale);
  }
  CHECK(std::abs(cert.dual_slope.dot(site) + cert.dual_offset - cert.value) <= 1e-9 * scale);
  double primal = 0.0;
  for (std::size_t k = 0; k < cert.support.size(); ++k) primal += cert.weights(static_cast<Eigen::Index>(k)) * costs(cert.support[k]);
  CHECK(std::abs(primal - cert.value) <= 1e-9 * scale);
}

}  // namespace

TEST_CASE("small examples") {
  Eigen::MatrixXd line(1, 2);
  line << 0.0, 1.0;
  const Grid g1(line);
  const Point half = Point::Constant(1, 0.5);
  auto cert = solve_barycentric_min(half, g1, costs_for(half, line, 2, NormSpec::l2()));
  REQUIRE(cert);
  CHECK(cert->value == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(cert->weights(0) == doctest::Approx(0.5));
  CHECK(cert->weights(1) == doctest::Approx(0.5));

  Eigen::MatrixXd sq(2, 4);
  sq << 0, 1, 0, 1, 0, 0, 1, 1;
  const Grid g2(sq);
  const Point centre = Point::Constant(2, 0.5);
  cert = solve_barycentric_min(centre, g2, costs_for(centre, sq, 2, NormSpec::l2()));
  REQUIRE(cert);
  CHECK(cert->value == doctest::Approx(0.5).epsilon(1e-14));

  const Point vertex = sq.col(2);
  cert = solve_barycentric_min(vertex, g2, costs_for(vertex, sq, 2, NormSpec::l2()));
  REQUIRE(cert);
  CHECK(cert->support == std::vector<Eigen::Index>{2});
  CHECK(cert->weights(0) == 1.0);
  CHECK(cert->value == 0.0);

  CHECK(hull_contains(centre, g2));
  CHECK_FALSE(hull_contains(Eigen::Vector2d(2, 0), g2));
  CHECK(hull_contains(Eigen::Vector2d(0.5, 0), g2));
  CHECK_FALSE(solve_barycentric_min(Eigen::Vector2d(2, 0), g2, Eigen::VectorXd::Ones(4)));
}

TEST_CASE("random instances: optimality certificates, support size, membership agreement") {
  RngStream rng(2024, 1);
  const std::vector<NormSpec> norms{NormSpec::l1(), NormSpec::l2(), NormSpec::linf()};
  int solved = 0, infeasible = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index d = 1 + trial % 4;
    const Eigen::Index n = d + 1 + static_cast<Eigen::Index>(rng.uniform() * (30 - d));
    const Eigen::MatrixXd x = random_points(rng, d, n);
    const Grid grid(x);
    const bool inside = trial % 3 != 0;
    Point site = inside ? random_convex_combination(rng, x) : Point(Point::Random(d) * 1.5);
    if (!inside) site.array() += 0.5;
    const double p = std::array{1.0, 1.5, 2.0, 4.0}[trial % 4];
    Eigen::VectorXd costs = costs_for(site, x, p, norms[trial % 3]);
    if (trial % 7 == 0) {
      for (Eigen::Index i = 0; i < n; ++i) costs(i) = rng.uniform();  // arbitrary nonnegative costs
    }
    const auto cert = solve_barycentric_min(site, grid, costs);
    CHECK(static_cast<bool>(cert) == hull_contains(site, grid));
    if (inside) CHECK(cert.has_value());
    if (cert) {
      check_certificate(*cert, site, x, costs);
      ++solved;
    } else {
      ++infeasible;
    }
  }
  CHECK(solved > 600);
  CHECK(infeasible > 50);
}

TEST_CASE("points outside the bounding box are never contained") {
  RngStream rng(99, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index d = 1 + trial % 3;
    const Eigen::MatrixXd x = random_points(rng, d, d + 3);
    Point site = x.rowwise().maxCoeff();
    site(trial % d) += 0.01 + rng.uniform();
    CHECK_FALSE(hull_contains(site, Grid(x)));
  }
}

TEST_CASE("degenerate grids are reduced to their affine hull") {
  // collinear points in the plane
  Eigen::MatrixXd line(2, 4);
  line << 0, 1, 2, 3, 0, 2, 4, 6;
  const Grid g(line);
  const Point on = Eigen::Vector2d(1.5, 3.0);
  const auto cert = solve_barycentric_min(on, g, costs_for(on, line, 2, NormSpec::l2()));
  REQUIRE(cert);
  check_certificate(*cert, on, line, costs_for(on, line, 2, NormSpec::l2()));
  CHECK(cert->value == doctest::Approx(0.25 * 5.0));
  CHECK_FALSE(hull_contains(Eigen::Vector2d(1.5, 3.01), g));
  CHECK_FALSE(hull_contains(Eigen::Vector2d(3.5, 7.0), g));

  // a flat square in R^3
  Eigen::MatrixXd flat(3, 4);
  flat << 0, 1, 0, 1, 0, 0, 1, 1, 2, 2, 2, 2;
  const Point mid = Eigen::Vector3d(0.5, 0.5, 2.0);
  const auto c2 = solve_barycentric_min(mid, Grid(flat), costs_for(mid, flat, 2, NormSpec::l2()));
  REQUIRE(c2);
  CHECK(c2->value == doctest::Approx(0.5));
  CHECK_FALSE(hull_contains(Eigen::Vector3d(0.5, 0.5, 2.001), Grid(flat)));

  // a single point
  const Grid single(Eigen::MatrixXd::Constant(2, 1, 0.3));
  CHECK(hull_contains(Point::Constant(2, 0.3), single));
  CHECK_FALSE(hull_contains(Point::Constant(2, 0.31), single));
}

TEST_CASE("degenerate pivoting: lattices with many equal costs") {
  Eigen::MatrixXd x(2, 25);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) x.col(5 * i + j) << i / 4.0, j / 4.0;
  const Grid grid(x);
  RngStream rng(1, 1);
  for (int trial = 0; trial < 500; ++trial) {
    // sites on lattice lines and cell centres are degenerate on purpose
    Point site(2);
    site << std::round(rng.uniform() * 8) / 8.0, std::round(rng.uniform() * 8) / 8.0;
    const Eigen::VectorXd costs = costs_for(site, x, 2, NormSpec::l2());
    const auto cert = solve_barycentric_min(site, grid, costs);
    REQUIRE(cert);
    check_certificate(*cert, site, x, costs);
    // p = 2, l2 on a product grid: sum over axes of (s - a)(b - s) for the bracketing knots a <= s <= b
    double expected = 0.0;
    for (int j = 0; j < 2; ++j) {
      const double a = std::min(std::floor(site(j) * 4.0), 3.0) / 4.0;
      expected += (site(j) - a) * (a + 0.25 - site(j));
    }
    CHECK(cert->value == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("deterministic output") {
  RngStream rng(5, 5);
  const Eigen::MatrixXd x = random_points(rng, 3, 20);
  const Point site = random_convex_combination(rng, x);
  const Eigen::VectorXd costs = costs_for(site, x, 2, NormSpec::l2());
  const auto a = solve_barycentric_min(site, Grid(x), costs);
  const auto b = solve_barycentric_min(site, Grid(x), costs);
  REQUIRE(a);
  CHECK(a->support == b->support);
  CHECK(a->weights == b->weights);
  CHECK(a->value == b->value);
}

TEST_CASE("widely scaled grids") {
  RngStream rng(8, 8);
  for (double scale : {1e-6, 1e6}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::MatrixXd x = random_points(rng, 2, 8) * scale;
      const Point site = random_convex_combination(rng, x);
      const Eigen::VectorXd costs = costs_for(site, x, 2, NormSpec::l2());
      const auto cert = solve_barycentric_min(site, Grid(x), costs);
      REQUIRE(cert);
      CHECK(cert->value == doctest::Approx(local_error_bruteforce(site, Grid(x), 2, NormSpec::l2())).epsilon(1e-8));
    }
  }
}
