#include <doctest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dualquant/error.hpp"
#include "dualquant/experiments.hpp"

using namespace dualquant;

namespace {

ExperimentConfig from_text(const std::string& text) { return parse_experiment_config(ConfigFile::parse(text, "t.cfg")); }

std::string config_error(const std::string& text) {
  try {
    from_text(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
    return e.what();
  }
  return "";
}

const char* kUnitScan = R"(
kind = rate-scan
p = 2
n = 3, 5, 9, 17
samples = 40000
seed = 12
[distribution]
kind = uniform_cube
dim = 1
)";

}  // namespace

TEST_CASE("config parsing and diagnostics") {
  const auto c = from_text(kUnitScan);
  CHECK(c.n_values == std::vector<std::size_t>{3, 5, 9, 17});
  CHECK(c.samples == 40000);
  CHECK(c.distribution.dim() == 1);
  // the echo parses back to the same experiment
  const auto again = from_text(c.echo());
  CHECK(again.echo() == c.echo());
  CHECK(again.seed == 12);

  CHECK(config_error("p = 2\nbogus = 1\n").find("t.cfg:2") != std::string::npos);
  CHECK(config_error("p = 2\n\n[distribution]\nkind = banana\n").find("t.cfg:4") != std::string::npos);
  CHECK(config_error("n = 3, x\n").find("t.cfg:1") != std::string::npos);
  CHECK(config_error("p = 2\np = 3\n").find("t.cfg:2") != std::string::npos);
  CHECK(config_error("[nowhere]\n").find("t.cfg:1") != std::string::npos);
  CHECK(config_error("line without equals\n").find("t.cfg:1") != std::string::npos);
  CHECK(config_error("grid_source = explicit-file\n").find("grid_file") != std::string::npos);
  CHECK_FALSE(config_error("p = 0.5\n").empty());
}

TEST_CASE("grid files") {
  const Grid g = parse_grid_text("# two points\n0 1\n2.5 -1 # trailing\n\n");
  REQUIRE(g.size() == 2);
  CHECK(g.points()(0, 1) == 2.5);
  CHECK_THROWS_AS(parse_grid_text("0 1\n2\n"), Error);
  CHECK_THROWS_AS(parse_grid_text("# nothing\n"), Error);
}

TEST_CASE("rate scan rows, csv and json") {
  const auto config = from_text(kUnitScan);
  const auto rows = run_rate_scan(config);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK_FALSE(row.failed);
    CHECK(row.d == 1);
    CHECK(row.grid_source == "lattice");
    CHECK(row.seed == 12);
    CHECK(std::abs(row.normalized / row.estimate - static_cast<double>(row.n)) <= 1e-12 * static_cast<double>(row.n));
    const double exact = std::sqrt(2.0 / 12.0) / static_cast<double>(row.n - 1);
    CHECK(std::abs(row.estimate - exact) <= 4.0 * row.std_error);
  }
  // bit-for-bit reproducible
  const auto again = run_rate_scan(config);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(again[i].estimate == rows[i].estimate);

  const Table table = rate_scan_table(rows);
  std::ostringstream csv;
  table.write_csv(csv);
  const std::string text = csv.str();
  CHECK(text.substr(0, text.find('\n')) == "n,d,p,estimate,std_error,normalized,grid_source,seed");
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);

  std::ostringstream js;
  table.write_json(js);
  const auto parsed = nlohmann::json::parse(js.str());
  REQUIRE(parsed.size() == 4);
  CHECK(parsed[0]["n"] == 3);
  CHECK(parsed[0]["grid_source"] == "lattice");
  CHECK(parsed[3]["estimate"].get<double>() == rows[3].estimate);
}

TEST_CASE("rate scan failures and degenerate laws") {
  auto config = from_text("n = 1\nsamples = 100\n[distribution]\nkind = point_mass\natom = 0.5, 2\n");
  const auto rows = run_rate_scan(config);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].estimate == 0.0);

  // a grid file not covering the support gives a failed row, not an exception
  config = from_text("n = 4\nsamples = 200\n[distribution]\nkind = uniform_cube\ndim = 1\n");
  config.grid_source = GridSource::ExplicitFile;
  const std::string path = "harness_small_grid.txt";
  Eigen::MatrixXd narrow(1, 2);
  narrow << 0.2, 0.8;
  write_grid_file(path, Grid(narrow));
  config.grid_file = path;
  const auto failed = run_rate_scan(config);
  REQUIRE(failed.size() == 1);
  CHECK(failed[0].failed);
  CHECK(std::isnan(failed[0].estimate));
  std::ostringstream csv;
  rate_scan_table(failed).write_csv(csv);
  CHECK(csv.str().find("nan") != std::string::npos);
  std::remove(path.c_str());

  // lattice needs a perfect d-th power
  config = from_text("n = 10\n[distribution]\nkind = uniform_cube\ndim = 2\n");
  CHECK_THROWS_AS(run_rate_scan(config), Error);
}

TEST_CASE("fit_rate") {
  std::vector<double> n, est, flat;
  for (double v : {3.0, 10.0, 100.0, 1000.0}) {
    n.push_back(v);
    est.push_back(1.0 / v);
    flat.push_back(0.3);
  }
  const RateFit exact = fit_rate(n, est);
  CHECK(std::abs(exact.slope + 1.0) <= 1e-12);
  CHECK(std::abs(exact.r_squared - 1.0) <= 1e-12);
  CHECK(std::abs(fit_rate(n, flat).slope) <= 1e-12);
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(fit_rate(two, two), Error);
  const std::vector<double> with_zero{0.0, 0.5, 0.2};
  CHECK_THROWS_AS(fit_rate(std::span<const double>(n).first(3), with_zero), Error);

  auto config = from_text(kUnitScan);
  config.n_values = {17, 33, 65, 129};
  const RateFit fit = fit_rate(run_rate_scan(config));
  CHECK(fit.slope >= -1.05);
  CHECK(fit.slope <= -0.95);
}

TEST_CASE("check_qdq_bound") {
  CHECK_THROWS_AS(check_qdq_bound(2, 3.0, 2.0, {}), Error);
  const auto rows = run_rate_scan(from_text(kUnitScan));
  const auto report = check_qdq_bound(1, 2.0, 2.0, rows);
  CHECK(report.bound == doctest::Approx(std::sqrt(1.0 / 6.0)).epsilon(1e-15));
  CHECK(check_qdq_bound(2, 2.0, 2.0, rows).bound == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-15));
  // in d = 1 every lattice row sits above the infimum
  double smallest = INFINITY;
  for (const auto& row : rows) smallest = std::min(smallest, row.normalized - 3.0 * row.std_error * static_cast<double>(row.n));
  CHECK(report.empirical_q == doctest::Approx(smallest));
  CHECK(report.pass == (report.empirical_q <= report.bound));
}

TEST_CASE("comparison ordering") {
  auto config = from_text("kind = compare\np = 2\nn = 2, 5, 9\nsamples = 20000\nseed = 3\n"
                          "[distribution]\nkind = uniform_cube\ndim = 1\n");
  for (const auto& row : run_comparison(config)) {
    CHECK(row.voronoi_estimate <= row.extended_estimate);
    CHECK(row.extended_estimate <= row.dual_estimate);
    CHECK(row.exterior_draws == 0);
  }
  config = from_text("kind = compare\nn = 4\nsamples = 5000\n[distribution]\nkind = gaussian\ndim = 2\n"
                     "[optimizer]\niterations = 500\nsamples_per_eval = 500\nfinal_samples = 500\n");
  config.grid_source = GridSource::Optimized;
  config.extended = true;
  config.optimizer.extended = true;
  for (const auto& row : run_comparison(config)) {
    CHECK(row.exterior_draws > 0);
    CHECK(std::isnan(row.dual_estimate));
    CHECK(row.voronoi_estimate <= row.extended_estimate);
  }
  config = from_text("kind = compare\nn = 1\nsamples = 100\n[distribution]\nkind = point_mass\natom = 1\n");
  for (const auto& row : run_comparison(config)) {
    CHECK(row.dual_estimate == 0.0);
    CHECK(row.extended_estimate == 0.0);
    CHECK(row.voronoi_estimate == 0.0);
  }
  std::ostringstream csv;
  comparison_table(run_comparison(config)).write_csv(csv);
  CHECK(csv.str().substr(0, csv.str().find('\n')) == "n,dual_estimate,extended_estimate,voronoi_estimate");
}

TEST_CASE("pierce scan through the harness") {
  const auto config = from_text("kind = pierce-scan\np = 2\nn = 4, 16\nsamples = 2000\n"
                                "[distribution]\nkind = exponential\ndim = 1\nrate = 1\n[pierce]\neta = 1\n");
  const auto result = run_pierce_scan(config);
  REQUIRE(result.rows.size() == 2);
  std::ostringstream csv;
  pierce_table(result).write_csv(csv);
  CHECK(csv.str().substr(0, csv.str().find('\n')) == "n,error,normalized,std_error");
}
