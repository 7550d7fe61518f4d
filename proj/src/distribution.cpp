#include "dualquant/distribution.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace dualquant {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_cube(const Cube& c) {
  require(c.corner.size() >= 1, ErrorKind::InvalidArgument, "cube corner must have dimension >= 1");
  require(c.corner.allFinite(), ErrorKind::InvalidArgument, "cube corner must be finite");
  require(std::isfinite(c.edge) && c.edge > 0.0, ErrorKind::InvalidArgument, "cube edge must be > 0");
}

bool interiors_overlap(const Cube& a, const Cube& b) {
  for (Eigen::Index j = 0; j < a.corner.size(); ++j) {
    if (std::abs(a.corner(j) - b.corner(j)) >= a.edge) return false;
  }
  return true;
}

double draw_gaussian_pair(RngStream& rng, double& second) {
  const double radius = std::sqrt(-2.0 * std::log(rng.uniform_open_left()));
  const double angle = 2.0 * std::numbers::pi * rng.uniform();
  second = radius * std::sin(angle);
  return radius * std::cos(angle);
}

}  // namespace

Distribution Distribution::uniform_cube(Point corner, double edge) {
  Cube cube{std::move(corner), edge};
  check_cube(cube);
  return Distribution(UniformCube{std::move(cube)});
}

Distribution Distribution::uniform_cube_union(std::vector<Cube> cubes, std::vector<double> weights) {
  require(!cubes.empty(), ErrorKind::InvalidArgument, "cube union needs at least one cube");
  require(cubes.size() == weights.size(), ErrorKind::InvalidArgument, "one weight per cube required");
  double total = 0.0;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    check_cube(cubes[i]);
    require(cubes[i].corner.size() == cubes[0].corner.size(), ErrorKind::InvalidArgument,
            "cubes have mixed dimensions");
    require(std::abs(cubes[i].edge - cubes[0].edge) <= 1e-12 * cubes[0].edge, ErrorKind::InvalidArgument,
            "cubes must share a common edge length");
    require(std::isfinite(weights[i]) && weights[i] > 0.0, ErrorKind::InvalidArgument,
            "cube weights must be positive");
    total += weights[i];
    for (std::size_t j = 0; j < i; ++j) {
      require(!interiors_overlap(cubes[i], cubes[j]), ErrorKind::InvalidArgument,
              "cubes " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
    }
  }
  require(std::abs(total - 1.0) <= 1e-12, ErrorKind::InvalidArgument, "cube weights must sum to 1");
  return Distribution(UniformCubeUnion{std::move(cubes), std::move(weights)});
}

Distribution Distribution::gaussian(Eigen::Index dim) {
  require(dim >= 1, ErrorKind::InvalidArgument, "gaussian dimension must be >= 1");
  return Distribution(Gaussian{dim});
}

Distribution Distribution::exponential(Eigen::Index dim, double rate) {
  require(dim >= 1, ErrorKind::InvalidArgument, "exponential dimension must be >= 1");
  require(std::isfinite(rate) && rate > 0.0, ErrorKind::InvalidArgument, "exponential rate must be > 0");
  return Distribution(Exponential{dim, rate});
}

Distribution Distribution::pareto(Eigen::Index dim, double index) {
  require(dim >= 1, ErrorKind::InvalidArgument, "pareto dimension must be >= 1");
  require(std::isfinite(index) && index > 0.0, ErrorKind::InvalidArgument, "pareto index must be > 0");
  return Distribution(Pareto{dim, index});
}

Distribution Distribution::empirical(Eigen::MatrixXd points) {
  require(points.cols() >= 1 && points.rows() >= 1, ErrorKind::InvalidArgument,
          "empirical law needs at least one point");
  require(points.allFinite(), ErrorKind::InvalidArgument, "empirical points must be finite");
  return Distribution(Empirical{std::move(points)});
}

Distribution Distribution::point_mass(const Point& atom) { return empirical(Eigen::MatrixXd(atom)); }

Eigen::Index Distribution::dim() const {
  return std::visit(overloaded{
                        [](const UniformCube& s) { return s.cube.corner.size(); },
                        [](const UniformCubeUnion& s) { return s.cubes.front().corner.size(); },
                        [](const Gaussian& s) { return s.dim; },
                        [](const Exponential& s) { return s.dim; },
                        [](const Pareto& s) { return s.dim; },
                        [](const Empirical& s) { return s.points.rows(); },
                    },
                    spec_);
}

std::string Distribution::kind_name() const {
  return std::visit(overloaded{
                        [](const UniformCube&) { return std::string("uniform_cube"); },
                        [](const UniformCubeUnion&) { return std::string("uniform_cube_union"); },
                        [](const Gaussian&) { return std::string("gaussian"); },
                        [](const Exponential&) { return std::string("exponential"); },
                        [](const Pareto&) { return std::string("pareto"); },
                        [](const Empirical&) { return std::string("empirical"); },
                    },
                    spec_);
}

std::string Distribution::describe() const {
  std::ostringstream os;
  os << kind_name() << "(d=" << dim();
  std::visit(overloaded{
                 [&](const UniformCube& s) { os << ", edge=" << s.cube.edge; },
                 [&](const UniformCubeUnion& s) { os << ", cubes=" << s.cubes.size(); },
                 [&](const Gaussian&) {},
                 [&](const Exponential& s) { os << ", rate=" << s.rate; },
                 [&](const Pareto& s) { os << ", index=" << s.index; },
                 [&](const Empirical& s) { os << ", points=" << s.points.cols(); },
             },
             spec_);
  os << ')';
  return os.str();
}

Point Distribution::draw(RngStream& rng) const {
  const Eigen::Index d = dim();
  Point x(d);
  std::visit(overloaded{
                 [&](const UniformCube& s) {
                   for (Eigen::Index j = 0; j < d; ++j) x(j) = s.cube.corner(j) + s.cube.edge * rng.uniform();
                 },
                 [&](const UniformCubeUnion& s) {
                   const double u = rng.uniform();
                   std::size_t pick = s.cubes.size() - 1;
                   double cumulative = 0.0;
                   for (std::size_t i = 0; i < s.cubes.size(); ++i) {
                     cumulative += s.weights[i];
                     if (u < cumulative) {
                       pick = i;
                       break;
                     }
                   }
                   const Cube& c = s.cubes[pick];
                   for (Eigen::Index j = 0; j < d; ++j) x(j) = c.corner(j) + c.edge * rng.uniform();
                 },
                 [&](const Gaussian&) {
                   for (Eigen::Index j = 0; j < d; j += 2) {
                     double second = 0.0;
                     x(j) = draw_gaussian_pair(rng, second);
                     if (j + 1 < d) x(j + 1) = second;
                   }
                 },
                 [&](const Exponential& s) {
                   for (Eigen::Index j = 0; j < d; ++j) x(j) = -std::log(rng.uniform_open_left()) / s.rate;
                 },
                 [&](const Pareto& s) {
                   for (Eigen::Index j = 0; j < d; ++j) x(j) = std::pow(rng.uniform_open_left(), -1.0 / s.index);
                 },
                 [&](const Empirical& s) {
                   auto i = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(s.points.cols()));
                   x = s.points.col(std::min(i, s.points.cols() - 1));
                 },
             },
             spec_);
  return x;
}

Eigen::MatrixXd Distribution::sample(RngStream& rng, Eigen::Index count) const {
  require(count >= 1, ErrorKind::InvalidArgument, "sample count must be >= 1");
  Eigen::MatrixXd out(dim(), count);
  for (Eigen::Index i = 0; i < count; ++i) out.col(i) = draw(rng);
  return out;
}

std::optional<Box> Distribution::support_box() const {
  const Eigen::Index d = dim();
  return std::visit(overloaded{
                        [&](const UniformCube& s) -> std::optional<Box> {
                          return Box{s.cube.corner, s.cube.corner.array() + s.cube.edge};
                        },
                        [&](const UniformCubeUnion& s) -> std::optional<Box> {
                          Point lo = s.cubes.front().corner;
                          Point hi = lo.array() + s.cubes.front().edge;
                          for (const Cube& c : s.cubes) {
                            lo = lo.cwiseMin(c.corner);
                            hi = hi.cwiseMax(Point(c.corner.array() + c.edge));
                          }
                          return Box{lo, hi};
                        },
                        [](const Gaussian&) -> std::optional<Box> { return std::nullopt; },
                        [](const Exponential&) -> std::optional<Box> { return std::nullopt; },
                        [](const Pareto&) -> std::optional<Box> { return std::nullopt; },
                        [&](const Empirical& s) -> std::optional<Box> {
                          (void)d;
                          return Box{s.points.rowwise().minCoeff(), s.points.rowwise().maxCoeff()};
                        },
                    },
                    spec_);
}

Point Distribution::support_lower() const {
  const Eigen::Index d = dim();
  return std::visit(overloaded{
                        [&](const Gaussian&) -> Point {
                          return Point::Constant(d, -std::numeric_limits<double>::infinity());
                        },
                        [&](const Exponential&) -> Point { return Point::Zero(d); },
                        [&](const Pareto&) -> Point { return Point::Ones(d); },
                        [&](const auto&) -> Point { return support_box()->lower; },
                    },
                    spec_);
}

bool Distribution::has_full_dimensional_support() const {
  if (const auto* e = std::get_if<Empirical>(&spec_)) {
    if (e->points.cols() <= e->points.rows()) return false;
    return Grid(e->points).affine_dimension() == e->points.rows();
  }
  return true;
}

std::optional<double> Distribution::density_1d(double x) const {
  if (dim() != 1) return std::nullopt;
  return std::visit(overloaded{
                        [&](const UniformCube& s) -> std::optional<double> {
                          const double a = s.cube.corner(0);
                          return (x >= a && x <= a + s.cube.edge) ? 1.0 / s.cube.edge : 0.0;
                        },
                        [&](const UniformCubeUnion& s) -> std::optional<double> {
                          double f = 0.0;
                          for (std::size_t i = 0; i < s.cubes.size(); ++i) {
                            const double a = s.cubes[i].corner(0);
                            if (x >= a && x < a + s.cubes[i].edge) f += s.weights[i] / s.cubes[i].edge;
                          }
                          return f;
                        },
                        [&](const Gaussian&) -> std::optional<double> {
                          return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
                        },
                        [&](const Exponential& s) -> std::optional<double> {
                          return x < 0.0 ? 0.0 : s.rate * std::exp(-s.rate * x);
                        },
                        [&](const Pareto& s) -> std::optional<double> {
                          return x < 1.0 ? 0.0 : s.index * std::pow(x, -s.index - 1.0);
                        },
                        [](const Empirical&) -> std::optional<double> { return std::nullopt; },
                    },
                    spec_);
}

double Distribution::empirical_moment(const Eigen::MatrixXd& draws, double q) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < draws.cols(); ++i) sum += std::pow(draws.col(i).norm(), q);
  return sum / static_cast<double>(draws.cols());
}

}  // namespace dualquant
