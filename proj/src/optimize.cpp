#include "dualquant/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dualquant/montecarlo.hpp"
#include "dualquant/quadrature.hpp"

namespace dualquant {

namespace {

constexpr std::uint64_t kEvaluationStream = 0x4556414Cull;  // "EVAL"
constexpr std::uint64_t kFinalStream = 0x46494E41ull;       // "FINA"
constexpr std::uint64_t kIdleIterations = 100;

// Distinct atoms of an empirical law when there are at most `limit` of them.
std::optional<Eigen::MatrixXd> small_atom_set(const Distribution& dist, std::size_t limit) {
  const auto* e = std::get_if<Distribution::Empirical>(&dist.spec());
  if (!e) return std::nullopt;
  std::vector<Point> atoms;
  for (Eigen::Index i = 0; i < e->points.cols(); ++i) {
    const Point x = e->points.col(i);
    if (std::none_of(atoms.begin(), atoms.end(), [&](const Point& a) { return a == x; })) atoms.push_back(x);
    if (atoms.size() > limit) return std::nullopt;
  }
  Eigen::MatrixXd out(dist.dim(), static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t i = 0; i < atoms.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = atoms[i];
  return out;
}

bool has_near_duplicate(const Eigen::MatrixXd& points, Eigen::Index i) {
  const double tol = Grid::duplicate_tolerance(points.cwiseAbs().maxCoeff()) * 10.0;
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    if (j != i && (points.col(i) - points.col(j)).cwiseAbs().maxCoeff() < tol) return true;
  }
  return false;
}

// Starting configuration: pinned support corners (non-extended mode) then
// distinct i.i.d. draws.
struct Layout {
  Eigen::MatrixXd points;
  std::vector<bool> pinned;
};

Layout initial_layout(const Distribution& dist, std::size_t n, const OptimizerConfig& config, RngStream& rng) {
  const Eigen::Index d = dist.dim();
  Layout layout;
  layout.points.resize(d, static_cast<Eigen::Index>(n));
  layout.pinned.assign(n, false);
  Eigen::Index filled = 0;
  if (!config.extended) {
    const Eigen::MatrixXd corners = dist.support_box()->corners();
    require(static_cast<std::size_t>(corners.cols()) <= n, ErrorKind::TooFewPoints,
            "the hull of " + std::to_string(n) + " points cannot cover the support box (" +
                std::to_string(corners.cols()) + " corners)");
    layout.points.leftCols(corners.cols()) = corners;
    for (Eigen::Index i = 0; i < corners.cols(); ++i) layout.pinned[static_cast<std::size_t>(i)] = true;
    filled = corners.cols();
  }
  for (Eigen::Index i = filled; i < layout.points.cols(); ++i) {
    int attempts = 0;
    do {
      layout.points.col(i) = dist.draw(rng);
      require(++attempts < 10000, ErrorKind::InvalidArgument, "cannot draw distinct initial points");
    } while (has_near_duplicate(layout.points.leftCols(i + 1), i));
  }
  return layout;
}

double evaluate_on(const Eigen::MatrixXd& batch, const Grid& grid, double p, const NormSpec& norm, bool extended) {
  LocalErrorEvaluator evaluator(grid, p, norm);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < batch.cols(); ++i) {
    const Point x = batch.col(i);
    sum += extended ? evaluator.local_error_extended(x).value_p : evaluator.local_error(x).value_p;
  }
  return sum / static_cast<double>(batch.cols());
}

void clamp_to_box(Eigen::MatrixXd& points, const std::vector<bool>& pinned, const std::optional<Box>& box) {
  if (!box) return;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    if (pinned[static_cast<std::size_t>(i)]) continue;
    points.col(i) = points.col(i).cwiseMax(box->lower).cwiseMin(box->upper);
  }
}

struct RestartOutcome {
  Grid grid;
  double estimate_p;
  std::vector<TrajectoryPoint> trajectory;
};

// Shared driver for sgd and lloyd_like; `gradient_at` returns the descent
// direction for the current points at iteration t.
template <typename Gradient>
RestartOutcome descend(const Distribution& dist, Layout layout, double p, const NormSpec& norm,
                       const OptimizerConfig& config, RngStream& train, const Eigen::MatrixXd& eval_batch,
                       Gradient&& gradient_at) {
  const std::optional<Box> box = config.extended ? std::nullopt : dist.support_box();
  const std::size_t n = layout.pinned.size();
  const std::uint64_t idle_limit =
      kIdleIterations * std::max<std::uint64_t>(1, n / static_cast<std::size_t>(dist.dim() + 1));
  std::vector<std::uint64_t> last_used(n, 0);

  const std::uint64_t eval_every = std::max<std::uint64_t>(1, config.iterations / 20);
  const std::uint64_t average_from = config.iterations - config.iterations / 10;
  Eigen::MatrixXd average = Eigen::MatrixXd::Zero(layout.points.rows(), layout.points.cols());
  std::uint64_t averaged = 0;

  std::vector<TrajectoryPoint> trajectory;
  const double initial = evaluate_on(eval_batch, Grid(layout.points), p, norm, config.extended);
  trajectory.push_back({0, initial, initial});
  Grid best_grid(layout.points);
  double best = initial;

  for (std::uint64_t t = 1; t <= config.iterations; ++t) {
    const double step = config.step_a / (config.step_b + static_cast<double>(t));
    const Eigen::MatrixXd direction = gradient_at(Grid(layout.points), t);
    for (Eigen::Index i = 0; i < layout.points.cols(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (layout.pinned[k]) continue;
      if (direction.col(i).squaredNorm() > 0.0) last_used[k] = t;
      layout.points.col(i) -= step * direction.col(i);
    }
    clamp_to_box(layout.points, layout.pinned, box);
    for (Eigen::Index i = 0; i < layout.points.cols(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      if (layout.pinned[k]) continue;
      if (t - last_used[k] > idle_limit || has_near_duplicate(layout.points, i)) {
        do {
          layout.points.col(i) = dist.draw(train);
        } while (has_near_duplicate(layout.points, i));
        last_used[k] = t;
      }
    }
    if (t > average_from) {
      average += layout.points;
      ++averaged;
    }
    if (t % eval_every == 0 || t == config.iterations) {
      const double estimate = evaluate_on(eval_batch, Grid(layout.points), p, norm, config.extended);
      require(estimate <= 10.0 * initial || initial == 0.0, ErrorKind::Diverged,
              "distortion grew more than tenfold from its initial value");
      if (estimate < best) {
        best = estimate;
        best_grid = Grid(layout.points);
      }
      trajectory.push_back({t, estimate, best});
    }
  }
  if (averaged > 0) {
    Eigen::MatrixXd mean = average / static_cast<double>(averaged);
    for (Eigen::Index i = 0; i < mean.cols(); ++i) {
      if (layout.pinned[static_cast<std::size_t>(i)]) mean.col(i) = layout.points.col(i);
    }
    bool distinct = true;
    for (Eigen::Index i = 0; i < mean.cols() && distinct; ++i) distinct = !has_near_duplicate(mean, i);
    if (distinct) {
      const Grid averaged_grid(mean);
      const double estimate = evaluate_on(eval_batch, averaged_grid, p, norm, config.extended);
      if (estimate < best) {
        best = estimate;
        best_grid = averaged_grid;
      }
      trajectory.push_back({config.iterations, estimate, best});
    }
  }
  return {best_grid, best, std::move(trajectory)};
}

// Integration of g against a one-dimensional law over [a, b] (b may be +inf).
class LawIntegrator {
 public:
  LawIntegrator(const Distribution& dist) : dist_(dist), rule_(32) {
    const auto box = dist.support_box();
    lower_ = dist.support_lower()(0);
    upper_ = box ? box->upper(0) : std::numeric_limits<double>::infinity();
    if (const auto* u = std::get_if<Distribution::UniformCubeUnion>(&dist.spec())) {
      for (const Cube& c : u->cubes) {
        breaks_.push_back(c.corner(0));
        breaks_.push_back(c.corner(0) + c.edge);
      }
      std::sort(breaks_.begin(), breaks_.end());
    }
    if (const auto* e = std::get_if<Distribution::Empirical>(&dist.spec())) {
      atoms_.assign(e->points.data(), e->points.data() + e->points.size());
      std::sort(atoms_.begin(), atoms_.end());
      empirical_ = true;
    }
  }

  template <typename G>
  double integrate(G&& g, double a, double b) const {
    if (empirical_) {
      double sum = 0.0;
      const auto first = std::lower_bound(atoms_.begin(), atoms_.end(), a);
      for (auto it = first; it != atoms_.end() && *it <= b; ++it) sum += g(*it);
      return sum / static_cast<double>(atoms_.size());
    }
    a = std::max(a, lower_);
    b = std::min(b, upper_);
    if (!(b > a)) return 0.0;
    auto weighted = [&](double x) { return g(x) * *dist_.density_1d(x); };
    if (std::isinf(a)) {
      // Reflect the left half-line onto a right tail.
      if (std::isinf(b)) return integrate(g, a, 0.0) + integrate(g, 0.0, b);
      return rule_.integrate_right_tail([&](double y) { return weighted(-y); }, -b);
    }
    if (std::isinf(b)) return rule_.integrate_right_tail(weighted, a);
    double total = 0.0;
    double from = a;
    for (double cut : breaks_) {
      if (cut <= from || cut >= b) continue;
      total += rule_.integrate(weighted, from, cut);
      from = cut;
    }
    return total + rule_.integrate(weighted, from, b);
  }

 private:
  const Distribution& dist_;
  GaussLegendre rule_;
  double lower_ = -std::numeric_limits<double>::infinity();
  double upper_ = std::numeric_limits<double>::infinity();
  std::vector<double> breaks_;
  std::vector<double> atoms_;
  bool empirical_ = false;
};

double interval_cost(const LawIntegrator& law, double a, double b, double p) {
  if (!(b > a)) return 0.0;
  return law.integrate(
      [&](double x) {
        const double left = std::max(x - a, 0.0);
        const double right = std::max(b - x, 0.0);
        return (right * std::pow(left, p) + left * std::pow(right, p)) / (b - a);
      },
      a, b);
}

double right_tail_cost(const LawIntegrator& law, double b, double p) {
  return law.integrate([&](double x) { return x > b ? std::pow(x - b, p) : 0.0; }, b,
                       std::numeric_limits<double>::infinity());
}

double left_tail_cost(const LawIntegrator& law, double a, double p) {
  return law.integrate([&](double x) { return x < a ? std::pow(a - x, p) : 0.0; },
                       -std::numeric_limits<double>::infinity(), a);
}

Grid knots_to_grid(const std::vector<double>& knots) {
  return Grid(Eigen::Map<const Eigen::MatrixXd>(knots.data(), 1, static_cast<Eigen::Index>(knots.size())));
}

double objective_1d(const LawIntegrator& law, std::span<const double> k, double p, bool extended) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) total += interval_cost(law, k[i], k[i + 1], p);
  if (extended) total += left_tail_cost(law, k.front(), p) + right_tail_cost(law, k.back(), p);
  return total;
}

RestartOutcome exhaustive_1d(const Distribution& dist, std::size_t n, double p, const OptimizerConfig& config,
                             RngStream& train) {
  require(dist.dim() == 1, ErrorKind::InvalidArgument, "exhaustive_1d needs a one-dimensional law");
  const LawIntegrator law(dist);
  std::vector<double> knots;
  const std::optional<Box> box = dist.support_box();
  if (!config.extended) {
    require(box.has_value(), ErrorKind::InvalidArgument, "non-extended objective needs bounded support");
    require(n >= 2 || box->lower(0) == box->upper(0), ErrorKind::TooFewPoints,
            "two knots are needed to cover an interval");
  }
  Eigen::MatrixXd draws = dist.sample(train, static_cast<Eigen::Index>(std::max<std::size_t>(4 * n, 64)));
  std::vector<double> pool(draws.data(), draws.data() + draws.size());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  for (std::size_t i = 0; i < n; ++i) knots.push_back(pool[(i * (pool.size() - 1)) / std::max<std::size_t>(n - 1, 1)]);
  if (!config.extended) {
    knots.front() = box->lower(0);
    knots.back() = box->upper(0);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  auto objective = [&](std::span<const double> k) { return objective_1d(law, k, p, config.extended); };
  // Cost of everything touching knot i when it sits at x.
  auto local = [&](std::size_t i, double x) {
    double total = 0.0;
    if (i > 0) total += interval_cost(law, knots[i - 1], x, p);
    if (i + 1 < knots.size()) total += interval_cost(law, x, knots[i + 1], p);
    if (config.extended && i == 0) total += left_tail_cost(law, x, p);
    if (config.extended && i + 1 == knots.size()) total += right_tail_cost(law, x, p);
    return total;
  };

  std::vector<TrajectoryPoint> trajectory;
  double best = objective(knots);
  trajectory.push_back({0, best, best});
  const double span = std::max(knots.back() - knots.front(), 1.0);
  const std::size_t first = config.extended ? 0 : 1;
  const std::size_t last = config.extended ? knots.size() : knots.size() - 1;
  for (std::uint64_t sweep = 1; sweep <= config.iterations; ++sweep) {
    double largest_move = 0.0;
    for (std::size_t i = first; i < last; ++i) {
      const double lo = i > 0 ? knots[i - 1] : knots[i] - span;
      const double hi = i + 1 < knots.size() ? knots[i + 1] : knots[i] + span;
      const double gap = 1e-9 * (hi - lo);
      const double x = golden_section_minimize([&](double y) { return local(i, y); }, lo + gap, hi - gap,
                                               1e-13 * span);
      if (local(i, x) < local(i, knots[i])) {
        largest_move = std::max(largest_move, std::abs(x - knots[i]));
        knots[i] = x;
      }
    }
    if (sweep % 16 == 0 || largest_move < 1e-12 * span) {
      const double value = objective(knots);
      best = std::min(best, value);
      trajectory.push_back({sweep, value, best});
    }
    if (largest_move < 1e-12 * span) break;
  }
  return {knots_to_grid(knots), objective(knots), std::move(trajectory)};
}

}  // namespace

std::string to_string(OptimizerMethod method) {
  switch (method) {
    case OptimizerMethod::Sgd: return "sgd";
    case OptimizerMethod::LloydLike: return "lloyd_like";
    case OptimizerMethod::Exhaustive1D: return "exhaustive_1d";
  }
  return "unknown";
}

OptimizerMethod parse_optimizer_method(const std::string& text) {
  if (text == "sgd") return OptimizerMethod::Sgd;
  if (text == "lloyd_like") return OptimizerMethod::LloydLike;
  if (text == "exhaustive_1d") return OptimizerMethod::Exhaustive1D;
  throw Error(ErrorKind::ConfigError, "unknown optimizer method '" + text + "'");
}

void OptimizerConfig::validate() const {
  require(iterations >= 1, ErrorKind::ConfigError, "iterations must be >= 1");
  require(std::isfinite(step_a) && step_a > 0.0, ErrorKind::ConfigError, "step_a must be positive");
  require(std::isfinite(step_b) && step_b >= 1.0, ErrorKind::ConfigError, "step_b must be >= 1");
  require(restarts >= 1, ErrorKind::ConfigError, "restarts must be >= 1");
  require(samples_per_eval >= 1, ErrorKind::ConfigError, "samples_per_eval must be >= 1");
  require(final_samples >= 1, ErrorKind::ConfigError, "final_samples must be >= 1");
}

Eigen::MatrixXd local_error_gradient(const Grid& grid, const Point& sample, double p, const NormSpec& norm,
                                     bool extended) {
  LocalErrorEvaluator evaluator(grid, p, norm);
  const LocalErrorResult r = extended ? evaluator.local_error_extended(sample) : evaluator.local_error(sample);
  Eigen::MatrixXd gradient = Eigen::MatrixXd::Zero(grid.dim(), grid.size());
  // a sample sitting on a grid point: zero cost, no movement
  if (r.value_p == 0.0) return gradient;
  auto cost_gradient = [&](Eigen::Index i) -> Eigen::VectorXd {
    const Eigen::VectorXd v = grid.point(i) - sample;
    const double length = norm_eval(v, norm);
    if (length == 0.0) return Eigen::VectorXd::Zero(v.size());
    return p * std::pow(length, p - 1.0) * norm_gradient(v, norm);
  };
  if (r.branch == Branch::Exterior) {
    gradient.col(*r.nearest_index) = cost_gradient(*r.nearest_index);
    return gradient;
  }
  const BarycentricCertificate& cert = *r.certificate;
  for (std::size_t k = 0; k < cert.support.size(); ++k) {
    const Eigen::Index i = cert.support[k];
    gradient.col(i) = cert.weights(static_cast<Eigen::Index>(k)) * (cost_gradient(i) - cert.dual_slope);
  }
  return gradient;
}

Grid sgd_step(const Grid& grid, const Point& sample, double p, const NormSpec& norm, double step, bool extended) {
  return Grid(grid.points() - step * local_error_gradient(grid, sample, p, norm, extended));
}

DistortionReport regular_quantization_distortion(const Distribution& dist, const Grid& grid, double p,
                                                 const NormSpec& norm, std::uint64_t samples, const RngStream& rng) {
  check_exponent(p);
  require(samples >= 1, ErrorKind::InvalidArgument, "sample count must be >= 1");
  require(dist.dim() == grid.dim(), ErrorKind::InvalidArgument, "distribution and grid dimensions differ");
  const auto stats = run_sharded<1>(samples, rng, [&] {
    return [&](RngStream& stream) {
      const Point x = dist.draw(stream);
      return std::array<double, 1>{std::pow(nearest_neighbor_project(x, grid, norm).distance, p)};
    };
  });
  DistortionReport report;
  report.estimate_p = stats[0].mean();
  report.std_error = stats[0].std_error();
  report.samples = samples;
  report.seed = rng.seed();
  report.stream_id = rng.stream_id();
  report.extended = true;
  report.p = p;
  report.norm = norm;
  return report;
}

double dual_distortion_1d(const Distribution& dist, std::span<const double> knots, double p, bool extended) {
  check_exponent(p);
  require(dist.dim() == 1, ErrorKind::InvalidArgument, "dual_distortion_1d needs a one-dimensional law");
  require(!knots.empty(), ErrorKind::InvalidArgument, "at least one knot is required");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    require(knots[i] > knots[i - 1], ErrorKind::InvalidArgument, "knots must be strictly increasing");
  }
  if (!extended) {
    const auto box = dist.support_box();
    require(box && box->lower(0) >= knots.front() && box->upper(0) <= knots.back(), ErrorKind::OutsideHull,
            "the knots do not cover the support");
  }
  return objective_1d(LawIntegrator(dist), knots, p, extended);
}

OptimizationResult optimize_grid(const Distribution& dist, std::size_t n, double p, const NormSpec& norm,
                                 const OptimizerConfig& config, const RngStream& rng) {
  check_exponent(p);
  config.validate();
  require(n >= 1, ErrorKind::InvalidArgument, "grid size must be >= 1");
  require(!(dist.has_full_dimensional_support() && dist.support_box() &&
            n < static_cast<std::size_t>(dist.dim() + 1)),
          ErrorKind::TooFewPoints, "fewer than d+1 points cannot cover a full-dimensional support");
  if (!config.extended) {
    require(dist.support_box().has_value(), ErrorKind::InvalidArgument,
            "the non-extended objective needs a law with bounded support; use extended mode");
  }
  const RngStream final_stream = rng.substream(kFinalStream);

  if (auto atoms = small_atom_set(dist, n)) {
    Grid grid(*atoms);
    DistortionReport report =
        estimate_distortion(dist, grid, p, norm, config.final_samples, final_stream, config.extended);
    std::vector<TrajectoryPoint> trajectory{{0, report.estimate_p, report.estimate_p}};
    return {std::move(grid), report, std::move(trajectory), config};
  }

  RngStream eval_stream = rng.substream(kEvaluationStream);
  const Eigen::MatrixXd eval_batch = dist.sample(eval_stream, static_cast<Eigen::Index>(config.samples_per_eval));

  std::optional<RestartOutcome> best;
  for (int restart = 0; restart < config.restarts; ++restart) {
    RngStream train = rng.substream(static_cast<std::uint64_t>(restart));
    RestartOutcome outcome = [&]() -> RestartOutcome {
      if (config.method == OptimizerMethod::Exhaustive1D) return exhaustive_1d(dist, n, p, config, train);
      Layout layout = initial_layout(dist, n, config, train);
      if (config.method == OptimizerMethod::Sgd) {
        return descend(dist, std::move(layout), p, norm, config, train, eval_batch,
                       [&](const Grid& grid, std::uint64_t) {
                         return local_error_gradient(grid, dist.draw(train), p, norm, config.extended);
                       });
      }
      const Eigen::MatrixXd batch = dist.sample(train, static_cast<Eigen::Index>(config.samples_per_eval));
      return descend(dist, std::move(layout), p, norm, config, train, eval_batch,
                     [&](const Grid& grid, std::uint64_t) {
                       Eigen::MatrixXd total = Eigen::MatrixXd::Zero(grid.dim(), grid.size());
                       for (Eigen::Index i = 0; i < batch.cols(); ++i) {
                         total += local_error_gradient(grid, batch.col(i), p, norm, config.extended);
                       }
                       return Eigen::MatrixXd(total / static_cast<double>(batch.cols()));
                     });
    }();
    if (!best || outcome.estimate_p < best->estimate_p) best = std::move(outcome);
  }
  DistortionReport report =
      estimate_distortion(dist, best->grid, p, norm, config.final_samples, final_stream, config.extended);
  return {best->grid, report, std::move(best->trajectory), config};
}

}  // namespace dualquant
