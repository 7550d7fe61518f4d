#include "dualquant/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "dualquant/montecarlo.hpp"
#include "dualquant/structured.hpp"

namespace dualquant {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ProductGrid lattice_for(const Distribution& dist, std::size_t n) {
  const auto box = dist.support_box();
  require(box.has_value(), ErrorKind::ConfigError, "lattice grids need a law with bounded support");
  const auto d = static_cast<std::size_t>(dist.dim());
  const std::size_t k = integer_root(n, d);
  std::size_t power = 1;
  for (std::size_t j = 0; j < d; ++j) power *= k;
  require(power == n, ErrorKind::ConfigError,
          "lattice grid size " + std::to_string(n) + " is not a perfect " + std::to_string(d) + "-th power");
  std::vector<OrderedGrid1D> axes;
  for (std::size_t j = 0; j < d; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    require(k == 1 || box->upper(jj) > box->lower(jj), ErrorKind::ConfigError,
            "support is flat along an axis; only n = 1 lattices are possible");
    axes.push_back(OrderedGrid1D::uniform(box->lower(jj), box->upper(jj), k));
  }
  return ProductGrid(std::move(axes));
}

bool use_product_path(const ExperimentConfig& config) {
  return config.grid_source == GridSource::Lattice && !config.extended && config.norm.is_lr(config.p);
}

RateScanRow failed_row(const ExperimentConfig& config, std::size_t n, const std::string& why) {
  RateScanRow row;
  row.n = n;
  row.d = config.distribution.dim();
  row.p = config.p;
  row.estimate = row.std_error = row.normalized = kNaN;
  row.grid_source = to_string(config.grid_source);
  row.seed = config.seed;
  row.failed = true;
  row.failure = why;
  return row;
}

}  // namespace

RngStream row_stream(std::uint64_t seed, std::size_t n) { return RngStream(seed, 0).substream(n); }

Grid build_grid(const ExperimentConfig& config, std::size_t n) {
  const Distribution& dist = config.distribution;
  switch (config.grid_source) {
    case GridSource::Lattice:
      return lattice_for(dist, n).materialize();
    case GridSource::Staggered: {
      const auto box = dist.support_box();
      require(dist.dim() == 2 && box.has_value(), ErrorKind::ConfigError,
              "staggered grids need a two-dimensional law with bounded support");
      const double edge = box->upper(0) - box->lower(0);
      require(std::abs(box->upper(1) - box->lower(1) - edge) <= 1e-12 * (1.0 + std::abs(edge)),
              ErrorKind::ConfigError, "staggered grids need a square support box");
      return staggered_grid_2d(box->lower, edge, n);
    }
    case GridSource::Optimized:
      return optimize_grid(dist, n, config.p, config.norm, config.optimizer,
                           RngStream(config.optimizer.seed, 1).substream(n))
          .grid;
    case GridSource::ExplicitFile: {
      Grid grid = read_grid_file(config.grid_file);
      require(grid.dim() == dist.dim(), ErrorKind::ConfigError, "grid file dimension differs from the distribution");
      return grid;
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown grid source");
}

std::vector<RateScanRow> run_rate_scan(const ExperimentConfig& config) {
  std::vector<std::size_t> sizes = config.n_values;
  if (config.grid_source == GridSource::ExplicitFile) sizes = {0};
  require(!sizes.empty(), ErrorKind::ConfigError, "rate scan needs a list of grid sizes (n)");
  const Eigen::Index d = config.distribution.dim();

  std::vector<RateScanRow> rows;
  for (std::size_t requested : sizes) {
    try {
      double estimate_p = 0.0;
      double std_error_p = 0.0;
      std::size_t n = requested;
      const RngStream stream = row_stream(config.seed, requested);
      if (use_product_path(config)) {
        const ProductGrid grid = lattice_for(config.distribution, requested);
        const auto stats = run_sharded<1>(config.samples, stream, [&] {
          return [&](RngStream& s) {
            return std::array<double, 1>{
                product_local_error(config.distribution.draw(s), grid, config.p, config.norm)};
          };
        });
        estimate_p = stats[0].mean();
        std_error_p = stats[0].std_error();
      } else {
        const Grid grid = build_grid(config, requested);
        n = static_cast<std::size_t>(grid.size());
        const DistortionReport report =
            estimate_distortion(config.distribution, grid, config.p, config.norm, config.samples, stream, config.extended);
        estimate_p = report.estimate_p;
        std_error_p = report.std_error;
      }
      DistortionReport report;
      report.estimate_p = estimate_p;
      report.std_error = std_error_p;
      report.p = config.p;
      RateScanRow row;
      row.n = n;
      row.d = d;
      row.p = config.p;
      row.estimate = report.root();
      row.std_error = report.root_std_error();
      row.normalized = std::pow(static_cast<double>(n), 1.0 / static_cast<double>(d)) * row.estimate;
      row.grid_source = to_string(config.grid_source);
      row.seed = config.seed;
      rows.push_back(row);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::OutsideHull) throw;
      rows.push_back(failed_row(config, requested, e.what()));
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const RateScanRow& a, const RateScanRow& b) { return a.n < b.n; });
  return rows;
}

RateFit fit_rate(std::span<const double> n, std::span<const double> estimate) {
  require(n.size() == estimate.size(), ErrorKind::InvalidArgument, "n and estimate lengths differ");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] > 0.0 && estimate[i] > 0.0 && std::isfinite(estimate[i])) {
      xs.push_back(std::log(n[i]));
      ys.push_back(std::log(estimate[i]));
    }
  }
  require(xs.size() >= 3, ErrorKind::DegenerateInput, "a rate fit needs at least 3 rows with positive estimates");
  Eigen::MatrixXd design(static_cast<Eigen::Index>(xs.size()), 2);
  const Eigen::Map<const Eigen::VectorXd> x(xs.data(), design.rows());
  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), design.rows());
  design.col(0) = x;
  design.col(1).setOnes();
  require((x.array() - x.mean()).abs().maxCoeff() > 0.0, ErrorKind::DegenerateInput, "all rows share one n");
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(y);
  const double total = (y.array() - y.mean()).square().sum();
  const double residual = (y - design * beta).squaredNorm();
  RateFit fit;
  fit.slope = beta(0);
  fit.intercept = beta(1);
  fit.r_squared = total > 0.0 ? 1.0 - residual / total : 1.0;
  return fit;
}

RateFit fit_rate(std::span<const RateScanRow> rows) {
  std::vector<double> n;
  std::vector<double> estimate;
  for (const RateScanRow& row : rows) {
    n.push_back(static_cast<double>(row.n));
    estimate.push_back(row.estimate);
  }
  return fit_rate(n, estimate);
}

QdqBoundReport check_qdq_bound(Eigen::Index d, double r, double p, std::span<const RateScanRow> rows) {
  check_exponent(p);
  require(d >= 1, ErrorKind::InvalidArgument, "dimension must be >= 1");
  require(r >= 1.0, ErrorKind::InvalidArgument, "norm exponent r must be >= 1");
  require(r <= p, ErrorKind::HypothesisViolation, "the bound needs r <= p");
  QdqBoundReport report;
  report.bound = std::pow(static_cast<double>(d), 1.0 / r) * std::pow(2.0 / ((p + 1.0) * (p + 2.0)), 1.0 / p);
  report.empirical_q = std::numeric_limits<double>::infinity();
  for (const RateScanRow& row : rows) {
    if (row.failed || !std::isfinite(row.normalized)) continue;
    const double scale = std::pow(static_cast<double>(row.n), 1.0 / static_cast<double>(d));
    report.empirical_q = std::min(report.empirical_q, row.normalized - 3.0 * scale * row.std_error);
  }
  require(std::isfinite(report.empirical_q), ErrorKind::DegenerateInput, "no usable scan rows");
  report.pass = report.empirical_q <= report.bound;
  return report;
}

std::vector<ComparisonRow> run_comparison(const ExperimentConfig& config) {
  std::vector<std::size_t> sizes = config.n_values;
  if (config.grid_source == GridSource::ExplicitFile) sizes = {0};
  require(!sizes.empty(), ErrorKind::ConfigError, "comparison needs a list of grid sizes (n)");
  std::vector<ComparisonRow> rows;
  for (std::size_t requested : sizes) {
    const Grid grid = build_grid(config, requested);
    const auto stats = run_sharded<4>(config.samples, row_stream(config.seed, requested), [&] {
      return [evaluator = LocalErrorEvaluator(grid, config.p, config.norm), &config](RngStream& s) mutable {
        const Point x = config.distribution.draw(s);
        const LocalErrorResult r = evaluator.local_error_extended(x);
        const double nearest = std::pow(evaluator.nearest(x).distance, config.p);
        const bool inside = r.branch == Branch::Interior;
        return std::array<double, 4>{inside ? r.value_p : 0.0, r.value_p, nearest, inside ? 0.0 : 1.0};
      };
    });
    const double root = 1.0 / config.p;
    ComparisonRow row;
    row.n = static_cast<std::size_t>(grid.size());
    row.exterior_draws = static_cast<std::uint64_t>(std::llround(stats[3].mean() * static_cast<double>(config.samples)));
    row.dual_estimate = row.exterior_draws == 0 ? std::pow(stats[0].mean(), root) : kNaN;
    row.extended_estimate = std::pow(stats[1].mean(), root);
    row.voronoi_estimate = std::pow(stats[2].mean(), root);
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) { return a.n < b.n; });
  return rows;
}

PierceScanResult run_pierce_scan(const ExperimentConfig& config) {
  require(!config.n_values.empty(), ErrorKind::ConfigError, "pierce scan needs a list of grid sizes (n)");
  require(config.pierce_product || config.distribution.dim() == 1, ErrorKind::ConfigError,
          "multi-dimensional laws need the product construction");
  const RngStream rng(config.seed, 0);
  if (config.pierce_product) return pierce_scan_product(config.distribution, config.pierce, rng);
  return pierce_scan_1d(config.distribution, config.pierce, rng);
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

}  // namespace

void Table::write_csv(std::ostream& out) const {
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out << format_double(v);
            } else {
              out << v;
            }
          },
          row[c]);
    }
    out << '\n';
  }
}

void Table::write_json(std::ostream& out) const {
  nlohmann::json array = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json object = nlohmann::json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              object[columns[c]] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
            } else {
              object[columns[c]] = v;
            }
          },
          row[c]);
    }
    array.push_back(std::move(object));
  }
  out << array.dump(2) << '\n';
}

Table rate_scan_table(std::span<const RateScanRow> rows) {
  Table table;
  table.columns = {"n", "d", "p", "estimate", "std_error", "normalized", "grid_source", "seed"};
  for (const RateScanRow& r : rows) {
    table.rows.push_back({static_cast<std::uint64_t>(r.n), static_cast<std::int64_t>(r.d), r.p, r.estimate,
                          r.std_error, r.normalized, r.grid_source, r.seed});
  }
  return table;
}

Table comparison_table(std::span<const ComparisonRow> rows) {
  Table table;
  table.columns = {"n", "dual_estimate", "extended_estimate", "voronoi_estimate"};
  for (const ComparisonRow& r : rows) {
    table.rows.push_back({static_cast<std::uint64_t>(r.n), r.dual_estimate, r.extended_estimate, r.voronoi_estimate});
  }
  return table;
}

Table pierce_table(const PierceScanResult& result) {
  Table table;
  table.columns = {"n", "error", "normalized", "std_error"};
  for (const PierceScanRow& r : result.rows) {
    table.rows.push_back({static_cast<std::uint64_t>(r.n), r.error_p_root, r.normalized, r.std_error});
  }
  return table;
}

}  // namespace dualquant
