#include <doctest.h>

#include <cmath>

#include "dualquant/functional.hpp"
#include "dualquant/structured.hpp"

using namespace dualquant;

namespace {

// Gauss-free oracle: composite Simpson on each interval of the closed form.
double simpson_uniform(const OrderedGrid1D& g, double p) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const int m = 2000;
    const double a = g[i], b = g[i + 1], h = (b - a) / m;
    double s = 0.0;
    for (int k = 0; k <= m; ++k) {
      const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      s += w * local_error_1d(a + k * h, g, p);
    }
    total += s * h / 3.0;
  }
  return total;
}

OrderedGrid1D random_unit_grid(RngStream& rng, std::size_t n) {
  std::vector<double> inner;
  for (std::size_t i = 0; i + 2 < n; ++i) inner.push_back(rng.uniform());
  std::sort(inner.begin(), inner.end());
  std::vector<double> knots{0.0};
  for (double x : inner)
    if (x > knots.back() + 1e-9 && x < 1.0 - 1e-9) knots.push_back(x);
  knots.push_back(1.0);
  return OrderedGrid1D(knots);
}

}  // namespace

TEST_CASE("ordered grid validation") {
  CHECK_THROWS_AS(OrderedGrid1D({0.0, 0.0}), Error);
  CHECK_THROWS_AS(OrderedGrid1D({1.0, 0.0}), Error);
  CHECK_THROWS_AS(OrderedGrid1D(std::vector<double>{}), Error);
  const auto u = OrderedGrid1D::uniform(0, 1, 11);
  CHECK(u.size() == 11);
  CHECK(u.back() == 1.0);
  CHECK(u.bracket(0.35) == 3);
  CHECK(u.bracket(1.0) == 9);
  CHECK_THROWS_AS(u.bracket(1.5), Error);
}

TEST_CASE("local_error_1d examples and LP agreement") {
  const OrderedGrid1D unit({0.0, 1.0});
  CHECK(local_error_1d(0.5, unit, 2) == doctest::Approx(0.25));
  CHECK(local_error_1d(1.0, unit, 2) == 0.0);
  CHECK(local_error_1d(0.0, unit, 3) == 0.0);
  CHECK_THROWS_AS(local_error_1d(1.2, unit, 2), Error);
  try {
    local_error_1d(-0.1, unit, 2);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutsideRange);
  }
  RngStream rng(5, 1);
  for (int trial = 0; trial < 500; ++trial) {
    const OrderedGrid1D g = random_unit_grid(rng, 2 + trial % 10);
    const double site = rng.uniform();
    const double p = 1.0 + 4.0 * rng.uniform();
    CHECK(local_error_1d(site, g, p) ==
          doctest::Approx(local_error(Point::Constant(1, site), g.to_grid(), p, NormSpec::l2()).value_p).epsilon(1e-10));
  }
}

TEST_CASE("analytic distortion on [0,1]") {
  CHECK(analytic_distortion_uniform_1d(OrderedGrid1D::uniform(0, 1, 3), 2) == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
  CHECK(std::sqrt(analytic_distortion_uniform_1d(OrderedGrid1D::uniform(0, 1, 3), 2)) == doctest::Approx(0.2041).epsilon(1e-3));
  CHECK(analytic_distortion_uniform_1d(OrderedGrid1D({0.0, 1.0}), 2) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK_THROWS_AS(analytic_distortion_uniform_1d(OrderedGrid1D({0.0, 0.9}), 2), Error);
  CHECK_THROWS_AS(analytic_distortion_uniform_1d(OrderedGrid1D({0.1, 1.0}), 2), Error);
  for (double p : {1.0, 2.0, 3.0, 5.0}) {
    for (std::size_t n = 2; n <= 64; ++n) {
      const double v = analytic_distortion_uniform_1d(OrderedGrid1D::uniform(0, 1, n), p);
      const double closed = 2.0 / ((p + 1) * (p + 2)) * std::pow(static_cast<double>(n - 1), -p);
      CHECK(std::abs(v - closed) <= 1e-12 * closed);
      CHECK(uniform_grid_distortion_1d(n, p) == doctest::Approx(closed).epsilon(1e-14));
    }
  }
}

TEST_CASE("analytic distortion matches numerical integration and Monte Carlo") {
  RngStream rng(9, 9);
  for (int trial = 0; trial < 40; ++trial) {
    const OrderedGrid1D g = random_unit_grid(rng, 3 + trial % 6);
    const double p = std::array{1.0, 1.5, 2.0, 3.5}[trial % 4];
    CHECK(analytic_distortion_uniform_1d(g, p) == doctest::Approx(simpson_uniform(g, p)).epsilon(1e-9));
  }
  const auto unit = Distribution::uniform_cube(Point::Zero(1), 1.0);
  for (int trial = 0; trial < 3; ++trial) {
    const OrderedGrid1D g = random_unit_grid(rng, 6);
    const auto report = estimate_distortion(unit, g.to_grid(), 2, NormSpec::l2(), 300000, RngStream(trial, 0), false);
    CHECK(std::abs(report.estimate_p - analytic_distortion_uniform_1d(g, 2)) <= 3.0 * report.std_error);
  }
}

TEST_CASE("uniform grid is the minimiser and adding knots helps") {
  RngStream rng(17, 0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(trial % 8);
    const double p = std::array{1.0, 2.0, 3.0}[trial % 3];
    const double best = analytic_distortion_uniform_1d(OrderedGrid1D::uniform(0, 1, n), p);
    const OrderedGrid1D uniform = OrderedGrid1D::uniform(0, 1, n);
    std::vector<double> knots(uniform.knots().begin(), uniform.knots().end());
    for (std::size_t i = 1; i + 1 < n; ++i) knots[i] += (rng.uniform() - 0.5) * 0.5 / static_cast<double>(n - 1);
    CHECK(analytic_distortion_uniform_1d(OrderedGrid1D(knots), p) >= best);
    // insert one knot inside a random gap
    std::vector<double> more = knots;
    const std::size_t gap = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n - 1));
    more.insert(more.begin() + static_cast<std::ptrdiff_t>(gap) + 1, 0.5 * (knots[gap] + knots[gap + 1]));
    CHECK(analytic_distortion_uniform_1d(OrderedGrid1D(more), p) < analytic_distortion_uniform_1d(OrderedGrid1D(knots), p));
  }
}

TEST_CASE("lattice grids") {
  const ProductGrid g1 = lattice_grid(Point::Zero(1), 1.0, 2);
  REQUIRE(g1.size() == 3);
  CHECK(g1.axis(0)[1] == 0.5);
  const Grid corners = lattice_grid(Point::Zero(2), 1.0, 1).materialize();
  CHECK(corners.size() == 4);
  CHECK(corners.points().col(3) == Eigen::Vector2d(1, 1));
  CHECK(corners.points().col(1) == Eigen::Vector2d(1, 0));  // axis 0 fastest
  CHECK(lattice_grid(Point::Zero(3), 2.0, 3).size() == 64);
  CHECK(lattice_grid(Point::Zero(2), 1.0, 0).size() == 1);

  // sup of F^p over the cube scales like m^-p: fitted constant stable
  RngStream rng(3, 3);
  std::vector<double> constants;
  for (std::size_t m : {2u, 4u, 8u}) {
    const ProductGrid g = lattice_grid(Point::Zero(2), 1.0, m);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const Eigen::Vector2d site(rng.uniform(), rng.uniform());
      worst = std::max(worst, product_local_error(site, g, 2, NormSpec::l2()));
    }
    constants.push_back(worst / (std::pow(0.5, 2) * std::pow(static_cast<double>(m), -2.0)));
  }
  for (double c : constants) CHECK(c == doctest::Approx(constants.front()).epsilon(0.02));
}

TEST_CASE("product decomposition") {
  const ProductGrid sq = lattice_grid(Point::Zero(2), 1.0, 1);
  CHECK(product_local_error(Eigen::Vector2d(0.5, 0.5), sq, 2, NormSpec::l2()) == doctest::Approx(0.5));
  CHECK(product_local_error(Eigen::Vector2d(1, 0), sq, 2, NormSpec::l2()) == 0.0);
  CHECK_THROWS_AS(product_local_error(Eigen::Vector2d(0.5, 0.5), sq, 2, NormSpec::l1()), Error);
  CHECK_THROWS_AS(product_local_error(Eigen::Vector2d(0.5, 0.5), sq, 3, NormSpec::l2()), Error);
  RngStream rng(8, 2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index d = 1 + trial % 3;
    const double p = std::array{1.0, 1.5, 2.0, 3.0}[trial % 4];
    std::vector<OrderedGrid1D> axes;
    for (Eigen::Index j = 0; j < d; ++j) axes.push_back(random_unit_grid(rng, 2 + static_cast<std::size_t>(trial % 3)));
    const ProductGrid g(axes);
    Point site(d);
    for (Eigen::Index j = 0; j < d; ++j) site(j) = rng.uniform();
    const NormSpec norm = NormSpec::lr(p);
    const double product = product_local_error(site, g, p, norm);
    const double lp = local_error(site, g.materialize(), p, norm).value_p;
    CHECK(std::abs(product - lp) <= 1e-9 * (1.0 + lp));
  }
}

TEST_CASE("scaling of lattice distortion") {
  const auto unit = Distribution::uniform_cube(Point::Zero(2), 1.0);
  const auto big = Distribution::uniform_cube(Eigen::Vector2d(-1, 2), 3.0);
  const Grid g = lattice_grid(Point::Zero(2), 1.0, 3).materialize();
  const Grid g3 = lattice_grid(Eigen::Vector2d(-1, 2), 3.0, 3).materialize();
  const auto a = estimate_distortion(unit, g, 2, NormSpec::l2(), 20000, RngStream(1, 1), false);
  const auto b = estimate_distortion(big, g3, 2, NormSpec::l2(), 20000, RngStream(1, 1), false);
  // identical draws up to the affine map, so the ratio is exact up to rounding
  CHECK(b.estimate_p / a.estimate_p == doctest::Approx(9.0).epsilon(1e-9));
}

TEST_CASE("staggered grids") {
  const Grid g = staggered_grid_2d(Point::Zero(2), 1.0, 600);
  CHECK(std::abs(static_cast<double>(g.size()) - 600.0) < 40.0);
  CHECK(g.points().minCoeff() == 0.0);
  CHECK(g.points().maxCoeff() == 1.0);
  // covers the square: every corner is a grid point
  for (const Eigen::Vector2d c : {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 1)}) {
    CHECK(nearest_neighbor_project(c, g, NormSpec::l2()).distance == 0.0);
  }
  const Grid small = staggered_grid_2d(Point::Zero(2), 1.0, 3, 2);
  CHECK(small.size() == 3 + 4 + 3);
}
