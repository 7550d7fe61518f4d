#include "dualquant/pierce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dualquant/error.hpp"
#include "dualquant/montecarlo.hpp"

namespace dualquant {

namespace {

void check_knots(std::span<const double> knots) {
  require(!knots.empty(), ErrorKind::InvalidArgument, "splitting needs at least one knot");
  require(std::is_sorted(knots.begin(), knots.end()), ErrorKind::InvalidArgument, "knots must be non-decreasing");
}

// Index j of the first knot > site; the bracket is [knots[j-1], knots[j]).
std::size_t upper_index(std::span<const double> knots, double site) {
  return static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), site) - knots.begin());
}

// Extended dual error of the knot set at `site`: dual cost inside, distance^p outside.
double dual_cost_1d(std::span<const double> knots, double site, double p) {
  if (site <= knots.front()) return std::pow(knots.front() - site, p);
  if (site >= knots.back()) return std::pow(site - knots.back(), p);
  const std::size_t j = upper_index(knots, site);
  const double left = site - knots[j - 1];
  const double right = knots[j] - site;
  return (right * std::pow(left, p) + left * std::pow(right, p)) / (knots[j] - knots[j - 1]);
}

double nearest_gap(std::span<const double> knots, double site) {
  const std::size_t j = upper_index(knots, site);
  double best = std::numeric_limits<double>::infinity();
  if (j < knots.size()) best = knots[j] - site;
  if (j > 0) best = std::min(best, site - knots[j - 1]);
  return best;
}

void check_config(const PierceScanConfig& config) {
  require(std::isfinite(config.p) && config.p >= 1.0, ErrorKind::InvalidArgument, "p must be >= 1");
  require(std::isfinite(config.eta) && config.eta > 0.0, ErrorKind::InvalidArgument, "eta must be > 0");
  const double delta = config.pareto_index();
  require(delta > 0.0 && delta < config.p / config.eta, ErrorKind::InvalidArgument,
          "Pareto index must lie in (0, p/eta)");
  require(!config.n_values.empty(), ErrorKind::InvalidArgument, "scan needs at least one n");
  require(config.samples >= 2, ErrorKind::InvalidArgument, "scan needs at least two samples");
}

std::string moment_check(const Distribution& dist, double order, const RngStream& rng) {
  RngStream stream = rng.substream(0x6D6F6D656E74ull);
  const Eigen::MatrixXd draws = dist.sample(stream, 1 << 16);
  const double half = Distribution::empirical_moment(draws.leftCols(1 << 15), order);
  const double full = Distribution::empirical_moment(draws, order);
  if (!std::isfinite(full) || !std::isfinite(half) || full > 2.0 * half || half > 2.0 * full) {
    return "empirical moment of order " + std::to_string(order) + " is unstable (" + std::to_string(half) +
           " vs " + std::to_string(full) + "); the scan assumes it is finite";
  }
  return {};
}

PierceScanResult run_scan(const Distribution& dist, const PierceScanConfig& config, const RngStream& rng,
                          std::size_t d) {
  check_config(config);
  const double delta = config.pareto_index();
  const Point lower = dist.support_lower();
  std::vector<bool> one_sided(d);
  for (std::size_t j = 0; j < d; ++j) one_sided[j] = lower(static_cast<Eigen::Index>(j)) >= 0.0;

  PierceScanResult result;
  result.moment_warning = moment_check(dist, config.p + config.eta, rng);
  for (const std::size_t n : config.n_values) {
    require(n >= 1, ErrorKind::InvalidArgument, "n must be >= 1");
    const std::size_t per_axis = d == 1 ? n : integer_root(n, d);
    require(per_axis >= 1, ErrorKind::InvalidArgument, "n too small for the product construction");
    const auto stats = run_sharded<1>(config.samples, rng.substream(mix64(n)), [&] {
      return [&](RngStream& stream) {
        const Point x = dist.draw(stream);
        double envelope = 0.0, inside = 0.0, nearest = 0.0;
        bool in_hull = true;
        for (std::size_t j = 0; j < d; ++j) {
          const std::vector<double> knots = pierce_random_knots(per_axis, config.p, delta, one_sided[j], stream);
          const double site = x(static_cast<Eigen::Index>(j));
          envelope += std::pow(a_pn(knots, site), config.p);
          inside += dual_cost_1d(knots, site, config.p);
          nearest += std::pow(nearest_gap(knots, site), config.p);
          in_hull = in_hull && site >= knots.front() && site <= knots.back();
        }
        // Outside the product hull the extended error is the l_p distance to
        // the nearest node, which separates over the axes.
        const double dual = in_hull ? inside : nearest;
        return std::array<double, 1>{config.functional == PierceFunctional::Envelope ? envelope : dual};
      };
    });
    PierceScanRow row;
    row.n = n;
    const double mean = stats[0].mean();
    row.error_p_root = std::pow(mean, 1.0 / config.p);
    row.std_error = mean > 0.0 ? stats[0].std_error() / (config.p * std::pow(mean, (config.p - 1.0) / config.p)) : 0.0;
    row.normalized = std::pow(static_cast<double>(n), 1.0 / static_cast<double>(d)) * row.error_p_root;
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace

double apply_splitting(SplittingKind kind, std::span<const double> knots, double site, RngStream& rng) {
  check_knots(knots);
  if (site <= knots.front()) return knots.front();
  if (site >= knots.back()) return knots.back();
  const std::size_t j = upper_index(knots, site);
  const double a = knots[j - 1];
  const double b = knots[j];
  if (kind == SplittingKind::Voronoi) return site - a <= b - site ? a : b;
  const double weight_left = (b - site) / (b - a);
  return rng.uniform() < weight_left ? a : b;
}

double a_pn(std::span<const double> knots, double site) {
  check_knots(knots);
  if (site < knots.front()) return knots.front() - site;
  if (site >= knots.back()) return site - knots.back();
  const std::size_t j = upper_index(knots, site);
  return knots[j] - knots[j - 1];
}

std::vector<double> pareto_order_statistics(std::size_t n, double index, RngStream& rng) {
  require(n >= 1, ErrorKind::InvalidArgument, "need at least one draw");
  require(std::isfinite(index) && index > 0.0, ErrorKind::InvalidArgument, "Pareto index must be > 0");
  std::vector<double> draws(n);
  for (double& y : draws) y = std::pow(rng.uniform_open_left(), -1.0 / index);
  std::sort(draws.begin(), draws.end());
  return draws;
}

std::size_t integer_root(std::size_t n, std::size_t d) {
  require(d >= 1, ErrorKind::InvalidArgument, "root degree must be >= 1");
  auto m = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(d))));
  auto power = [d](std::size_t base) {
    double v = 1.0;
    for (std::size_t i = 0; i < d; ++i) v *= static_cast<double>(base);
    return v;
  };
  while (m > 0 && power(m) > static_cast<double>(n)) --m;
  while (power(m + 1) <= static_cast<double>(n)) ++m;
  return m;
}

namespace {
std::vector<double> half_line_knots(std::size_t count, double p, double delta, RngStream& rng) {
  std::vector<double> knots{0.0};
  if (count <= 1) return knots;
  const auto lag = static_cast<std::size_t>(std::ceil(p / delta - 1e-12));
  const std::size_t keep = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(count) - static_cast<std::ptrdiff_t>(lag) + 1,
                                                      1, static_cast<std::ptrdiff_t>(count) - 1);
  const std::vector<double> order = pareto_order_statistics(count, delta, rng);
  for (std::size_t i = 0; i < keep; ++i) knots.push_back(order[i] - 1.0);
  return knots;
}
}  // namespace

std::vector<double> pierce_random_knots(std::size_t n, double p, double delta, bool one_sided, RngStream& rng) {
  require(n >= 1, ErrorKind::InvalidArgument, "need at least one knot");
  if (one_sided) return half_line_knots(n, p, delta, rng);
  const std::size_t per_side = std::max<std::size_t>((n - 1) / 2, 1);
  const std::vector<double> positive = half_line_knots(per_side, p, delta, rng);
  const std::vector<double> negative = half_line_knots(per_side, p, delta, rng);
  std::vector<double> knots;
  knots.reserve(positive.size() + negative.size());
  for (auto it = negative.rbegin(); it != negative.rend(); ++it) knots.push_back(-*it);
  knots.insert(knots.end(), positive.begin() + 1, positive.end());
  return knots;
}

PierceScanResult pierce_scan_1d(const Distribution& dist, const PierceScanConfig& config, const RngStream& rng) {
  require(dist.dim() == 1, ErrorKind::InvalidArgument, "pierce_scan_1d needs a one-dimensional law");
  return run_scan(dist, config, rng, 1);
}

PierceScanResult pierce_scan_product(const Distribution& dist, const PierceScanConfig& config, const RngStream& rng) {
  return run_scan(dist, config, rng, static_cast<std::size_t>(dist.dim()));
}

}  // namespace dualquant
