#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dualquant/distribution.hpp"
#include "dualquant/error.hpp"
#include "dualquant/grid.hpp"
#include "dualquant/montecarlo.hpp"
#include "dualquant/norm.hpp"
#include "dualquant/pierce.hpp"
#include "dualquant/rng.hpp"

using namespace dualquant;

namespace {

Eigen::Vector2d v2(double a, double b) { return {a, b}; }

Point random_vector(RngStream& rng, Eigen::Index d) {
  Point v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = 4.0 * rng.uniform() - 2.0;
  return v;
}

}  // namespace

TEST_CASE("norm examples") {
  CHECK(norm_eval(v2(3, 4), NormSpec::l2()) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(norm_eval(v2(0, 0), NormSpec::l2()) == 0.0);
  CHECK(norm_eval(v2(0, 0), NormSpec::linf()) == 0.0);
  CHECK(norm_eval(v2(0, 0), NormSpec::lr(3.5)) == 0.0);
  CHECK(norm_eval(v2(1, 1), NormSpec::l1()) == 2.0);
  CHECK(norm_eval(v2(1, 1), NormSpec::linf()) == 1.0);
  CHECK(norm_eval(v2(1e200, 1e200), NormSpec::lr(3)) == doctest::Approx(1e200 * std::cbrt(2.0)));
}

TEST_CASE("norm parsing") {
  CHECK(NormSpec::parse("l1").is_lr(1));
  CHECK(NormSpec::parse("l2").is_lr(2));
  CHECK(NormSpec::parse("l3.5").is_lr(3.5));
  CHECK(NormSpec::parse("linf").kind() == NormSpec::Kind::LInfinity);
  CHECK(NormSpec::parse("l2").name() == "l2");
  CHECK_THROWS_AS(NormSpec::parse("l0.5"), Error);
  CHECK_THROWS_AS(NormSpec::parse("euclid"), Error);
  CHECK_THROWS_AS(NormSpec::lr(0.9), Error);
}

TEST_CASE("norm homogeneity, triangle inequality and Hoelder comparison") {
  RngStream rng(7, 1);
  const std::vector<NormSpec> norms{NormSpec::l1(), NormSpec::l2(), NormSpec::lr(1.5), NormSpec::lr(4),
                                    NormSpec::linf()};
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index d = 1 + trial % 5;
    const Point u = random_vector(rng, d);
    const Point v = random_vector(rng, d);
    const double alpha = 6.0 * rng.uniform() - 3.0;
    for (const NormSpec& n : norms) {
      CHECK(norm_eval(Point(alpha * u), n) == doctest::Approx(std::abs(alpha) * norm_eval(u, n)).epsilon(1e-12));
      CHECK(norm_eval(Point(u + v), n) <= norm_eval(u, n) + norm_eval(v, n) + 1e-12);
      ++checked;
    }
    // ||v||_r <= d^(1/r - 1/p) ||v||_p for r <= p
    for (auto [r, p] : {std::pair{1.0, 2.0}, {2.0, 2.0}, {1.5, 4.0}, {2.0, 3.0}}) {
      const double lhs = norm_eval(v, NormSpec::lr(r));
      const double rhs = std::pow(static_cast<double>(d), 1.0 / r - 1.0 / p) * norm_eval(v, NormSpec::lr(p));
      CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
  }
  CHECK(checked == 5000);
}

TEST_CASE("norm gradient matches finite differences") {
  RngStream rng(11, 2);
  for (int trial = 0; trial < 200; ++trial) {
    const Point v = random_vector(rng, 3);
    for (const NormSpec& n : {NormSpec::l1(), NormSpec::l2(), NormSpec::lr(3)}) {
      const Point g = norm_gradient(v, n);
      for (Eigen::Index j = 0; j < 3; ++j) {
        Point up = v, down = v;
        up(j) += 1e-6;
        down(j) -= 1e-6;
        CHECK(g(j) == doctest::Approx((norm_eval(up, n) - norm_eval(down, n)) / 2e-6).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("philox known answer and stream properties") {
  // Philox4x32-10 with zero key and counter: first block.
  RngStream zero(0, 0);
  const std::uint64_t first = zero.next_u64();
  CHECK((first & 0xffffffffu) == 0x6627e8d5u);
  CHECK((first >> 32) == 0xe169c58du);

  RngStream a(42, 9), b(42, 9), c(42, 10), e(43, 9);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs_stream |= x != c.next_u64();
    differs_seed |= x != e.next_u64();
  }
  CHECK(differs_stream);
  CHECK(differs_seed);

  RngStream u(3, 3);
  double lo = 1.0, hi = 0.0, sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    sum += x;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(RngStream(1, 2).substream(5).stream_id() == RngStream(1, 2).substream(5).stream_id());
  CHECK(RngStream(1, 2).substream(5).stream_id() != RngStream(1, 2).substream(6).stream_id());
  RngStream open(5, 5);
  for (int i = 0; i < 1000; ++i) CHECK(open.uniform_open_left() > 0.0);
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid(Eigen::MatrixXd(2, 0)), Error);
  Eigen::MatrixXd dup(1, 2);
  dup << 0.5, 0.5 + 1e-14;
  CHECK_THROWS_AS(Grid{dup}, Error);
  Eigen::MatrixXd bad(1, 2);
  bad << 0.0, std::nan("");
  CHECK_THROWS_AS(Grid{bad}, Error);
  Eigen::MatrixXd line(2, 3);
  line << 0, 1, 2, 0, 1, 2;
  CHECK(Grid(line).affine_dimension() == 1);
  Eigen::MatrixXd tri(2, 3);
  tri << 0, 1, 0, 0, 0, 1;
  CHECK(Grid(tri).affine_dimension() == 2);
  Box box{v2(0, 0), v2(1, 0)};
  CHECK(box.corners().cols() == 2);
}

TEST_CASE("distribution sampling contracts") {
  RngStream rng(5, 0);
  const auto cube = Distribution::uniform_cube(v2(0, 0), 1.0);
  const Eigen::MatrixXd xs = cube.sample(rng, 5000);
  CHECK(xs.minCoeff() >= 0.0);
  CHECK(xs.maxCoeff() <= 1.0);
  CHECK_THROWS_AS(cube.sample(rng, 0), Error);

  const auto pareto = Distribution::pareto(1, 2.0);
  CHECK(pareto.sample(rng, 5000).minCoeff() >= 1.0);

  Eigen::MatrixXd ab(1, 2);
  ab << -3.0, 7.0;
  const auto emp = Distribution::empirical(ab);
  const Eigen::MatrixXd draws = emp.sample(rng, 4);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK((draws(0, i) == -3.0 || draws(0, i) == 7.0));

  RngStream r1(9, 4), r2(9, 4);
  for (const auto& d : {Distribution::gaussian(3), Distribution::exponential(2, 1.5), pareto, cube}) {
    CHECK(d.sample(r1, 100) == d.sample(r2, 100));
  }
  CHECK(Distribution::exponential(1, 1.0).sample(rng, 1000).minCoeff() >= 0.0);
}

TEST_CASE("distribution moments") {
  RngStream rng(21, 0);
  const Eigen::MatrixXd g = Distribution::gaussian(2).sample(rng, 200000);
  CHECK(std::abs(g.row(0).mean()) < 0.01);
  CHECK((g.row(1).array().square().mean()) == doctest::Approx(1.0).epsilon(0.02));
  const Eigen::MatrixXd e = Distribution::exponential(1, 2.0).sample(rng, 200000);
  CHECK(e.mean() == doctest::Approx(0.5).epsilon(0.02));
  const auto u = Distribution::uniform_cube_union({{Point::Constant(1, 0.0), 1.0}, {Point::Constant(1, 2.0), 1.0}},
                                                  {0.25, 0.75});
  const Eigen::MatrixXd ux = u.sample(rng, 100000);
  CHECK((ux.array() >= 2.0).cast<double>().mean() == doctest::Approx(0.75).epsilon(0.02));
  CHECK(((ux.array() > 1.0) && (ux.array() < 2.0)).count() == 0);
  CHECK(*u.density_1d(0.5) == doctest::Approx(0.25));
  CHECK(*u.density_1d(1.5) == 0.0);
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(Distribution::uniform_cube(v2(0, 0), 0.0), Error);
  CHECK_THROWS_AS(Distribution::exponential(1, -1.0), Error);
  CHECK_THROWS_AS(Distribution::pareto(1, 0.0), Error);
  // overlapping cubes
  CHECK_THROWS_AS(Distribution::uniform_cube_union({{Point::Constant(1, 0.0), 1.0}, {Point::Constant(1, 0.5), 1.0}},
                                                   {0.5, 0.5}),
                  Error);
  // unequal edges
  CHECK_THROWS_AS(Distribution::uniform_cube_union({{Point::Constant(1, 0.0), 1.0}, {Point::Constant(1, 3.0), 2.0}},
                                                   {0.5, 0.5}),
                  Error);
  // weights not summing to one
  CHECK_THROWS_AS(Distribution::uniform_cube_union({{Point::Constant(1, 0.0), 1.0}, {Point::Constant(1, 3.0), 1.0}},
                                                   {0.5, 0.6}),
                  Error);
}

TEST_CASE("pareto order statistics") {
  RngStream rng(13, 0);
  const auto one = pareto_order_statistics(1, 2.0, rng);
  REQUIRE(one.size() == 1);
  CHECK(one[0] >= 1.0);
  for (std::size_t n : {2u, 5u, 17u, 100u}) {
    const auto ys = pareto_order_statistics(n, 1.5, rng);
    CHECK(std::is_sorted(ys.begin(), ys.end()));
    CHECK(ys.front() >= 1.0);
  }
  // Kolmogorov-Smirnov distance against 1 - y^(-1)
  const auto ys = pareto_order_statistics(1000, 1.0, rng);
  double ks = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double cdf = 1.0 - 1.0 / ys[i];
    ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / 1000.0), std::abs(cdf - static_cast<double>(i + 1) / 1000.0)});
  }
  CHECK(ks <= 0.06);
}

TEST_CASE("running stats and sharding") {
  RunningStats s;
  for (double x : {1.0, 2.0, 3.0, 4.0}) s.push(x);
  CHECK(s.mean() == 2.5);
  CHECK(s.variance() == doctest::Approx(5.0 / 3.0));
  RunningStats a, b;
  a.push(1.0);
  a.push(2.0);
  b.push(3.0);
  b.push(4.0);
  a.merge(b);
  CHECK(a.mean() == 2.5);
  CHECK(a.variance() == doctest::Approx(5.0 / 3.0));

  const RngStream rng(77, 3);
  auto worker = [] { return [](RngStream& s) { return std::array<double, 1>{s.uniform()}; }; };
  set_monte_carlo_threads(1);
  const auto one = run_sharded<1>(100000, rng, worker);
  set_monte_carlo_threads(4);
  const auto four = run_sharded<1>(100000, rng, worker);
  set_monte_carlo_threads(0);
  CHECK(one[0].mean() == four[0].mean());
  CHECK(one[0].variance() == four[0].variance());
  CHECK(one[0].count() == 100000);
}
