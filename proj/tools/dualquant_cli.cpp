// Command-line front end: every subcommand reads an experiment config and
// writes CSV (or JSON with --json) to --out or stdout.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dualquant/config.hpp"
#include "dualquant/experiments.hpp"
#include "dualquant/optimize.hpp"

namespace dq = dualquant;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kCheckFailed = 4 };

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::string out;
  bool json = false;
  // fp-eval only
  std::string grid_path;
  std::string site;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "experiment config file");
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_option("--samples", o.samples, "override the Monte Carlo sample count");
  cmd->add_option("--out", o.out, "output path (default stdout)");
  cmd->add_flag("--json", o.json, "emit a JSON array instead of CSV");
}

dq::ExperimentConfig load(const CommonOptions& o, const std::string& kind) {
  dq::ConfigFile file = o.config_path.empty() ? dq::ConfigFile::parse("", "<defaults>") : dq::ConfigFile::load(o.config_path);
  dq::ExperimentConfig config = dq::parse_experiment_config(file);
  config.kind = kind;
  if (o.seed) {
    if (!file.has("optimizer", "seed")) config.optimizer.seed = *o.seed;
    config.seed = *o.seed;
  }
  if (o.samples) {
    if (*o.samples == 0) throw dq::Error(dq::ErrorKind::ConfigError, "--samples must be >= 1");
    config.samples = *o.samples;
    config.pierce.samples = *o.samples;
  }
  if (!o.out.empty()) config.output = o.out;
  return config;
}

// Runs `body` with the chosen output stream; the config echo goes next to
// a file output so the run can be repeated.
template <typename Body>
void with_output(const dq::ExperimentConfig& config, Body&& body) {
  if (config.output.empty()) {
    body(std::cout);
    return;
  }
  std::ofstream out(config.output);
  if (!out) throw dq::Error(dq::ErrorKind::ConfigError, "cannot write '" + config.output + "'");
  body(out);
  std::ofstream echo(config.output + ".config");
  echo << config.echo();
}

void emit(const dq::ExperimentConfig& config, const dq::Table& table, bool json) {
  with_output(config, [&](std::ostream& out) { json ? table.write_json(out) : table.write_csv(out); });
}

std::string join_indices(const std::vector<Eigen::Index>& v) {
  std::ostringstream out;
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
  return out.str();
}

std::string join_vector(const Eigen::VectorXd& v) {
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v(i);
  return out.str();
}

int fp_eval(const CommonOptions& o) {
  dq::ExperimentConfig config = load(o, "fp-eval");
  if (!o.grid_path.empty()) {
    config.grid_source = dq::GridSource::ExplicitFile;
    config.grid_file = o.grid_path;
  }
  if (!o.site.empty()) {
    config.site = dq::parse_grid_text(o.site, "--site").point(0);
  }
  if (!config.site) throw dq::Error(dq::ErrorKind::ConfigError, "fp-eval needs a site (--site or site = ...)");
  const std::size_t n = config.n_values.empty() ? 0 : config.n_values.front();
  const dq::Grid grid = dq::build_grid(config, n);
  const dq::LocalErrorResult r = config.extended ? dq::local_error_extended(*config.site, grid, config.p, config.norm)
                                                 : dq::local_error(*config.site, grid, config.p, config.norm);
  dq::Table table;
  table.columns = {"value_p", "value", "branch", "support", "weights", "dual_slope", "dual_offset", "nearest"};
  std::vector<dq::Table::Cell> row{r.value_p, std::pow(r.value_p, 1.0 / config.p),
                                   std::string(r.branch == dq::Branch::Interior ? "interior" : "exterior")};
  if (r.certificate) {
    row.insert(row.end(), {join_indices(r.certificate->support), join_vector(r.certificate->weights),
                           join_vector(r.certificate->dual_slope), r.certificate->dual_offset, std::string()});
  } else {
    row.insert(row.end(), {std::string(), std::string(), std::string(), std::nan(""),
                           std::to_string(*r.nearest_index)});
  }
  table.rows.push_back(std::move(row));
  emit(config, table, o.json);
  return kOk;
}

int distortion(const CommonOptions& o) {
  const dq::ExperimentConfig config = load(o, "distortion");
  std::vector<std::size_t> sizes = config.n_values;
  if (config.grid_source == dq::GridSource::ExplicitFile) sizes = {0};
  if (sizes.empty()) throw dq::Error(dq::ErrorKind::ConfigError, "distortion needs n or a grid file");
  dq::Table table;
  table.columns = {"n", "estimate_p", "std_error_p", "estimate", "std_error", "extended", "seed"};
  for (std::size_t n : sizes) {
    const dq::Grid grid = dq::build_grid(config, n);
    const dq::DistortionReport report =
        dq::estimate_distortion(config.distribution, grid, config.p, config.norm, config.samples,
                                dq::row_stream(config.seed, n), config.extended);
    table.rows.push_back({static_cast<std::uint64_t>(grid.size()), report.estimate_p, report.std_error, report.root(),
                          report.root_std_error(), std::string(config.extended ? "true" : "false"), config.seed});
  }
  emit(config, table, o.json);
  return kOk;
}

int rate_scan(const CommonOptions& o) {
  const dq::ExperimentConfig config = load(o, "rate-scan");
  const auto rows = dq::run_rate_scan(config);
  for (const auto& row : rows) {
    if (row.failed) std::cerr << "warning: row n=" << row.n << " failed: " << row.failure << '\n';
  }
  emit(config, dq::rate_scan_table(rows), o.json);
  return kOk;
}

int compare(const CommonOptions& o) {
  const dq::ExperimentConfig config = load(o, "compare");
  emit(config, dq::comparison_table(dq::run_comparison(config)), o.json);
  return kOk;
}

int pierce_scan(const CommonOptions& o) {
  const dq::ExperimentConfig config = load(o, "pierce-scan");
  const dq::PierceScanResult result = dq::run_pierce_scan(config);
  if (!result.moment_warning.empty()) std::cerr << "warning: " << result.moment_warning << '\n';
  emit(config, dq::pierce_table(result), o.json);
  return kOk;
}

int optimize(const CommonOptions& o) {
  const dq::ExperimentConfig config = load(o, "optimize");
  if (config.n_values.size() != 1) throw dq::Error(dq::ErrorKind::ConfigError, "optimize needs exactly one n");
  const dq::OptimizationResult result =
      dq::optimize_grid(config.distribution, config.n_values.front(), config.p, config.norm, config.optimizer,
                        dq::RngStream(config.optimizer.seed, 1).substream(config.n_values.front()));
  if (o.json) {
    nlohmann::json doc;
    doc["n"] = result.grid.size();
    doc["method"] = dq::to_string(result.config.method);
    doc["estimate_p"] = result.final_report.estimate_p;
    doc["std_error_p"] = result.final_report.std_error;
    doc["estimate"] = result.final_report.root();
    doc["seed"] = result.config.seed;
    for (Eigen::Index i = 0; i < result.grid.size(); ++i) {
      const Eigen::VectorXd x = result.grid.point(i);
      doc["grid"].push_back(std::vector<double>(x.data(), x.data() + x.size()));
    }
    for (const auto& t : result.trajectory) {
      doc["trajectory"].push_back({{"iteration", t.iteration}, {"estimate_p", t.estimate_p},
                                   {"running_best", t.running_best}});
    }
    with_output(config, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
    return kOk;
  }
  if (!config.output.empty()) {
    dq::write_grid_file(config.output, result.grid);
    std::ofstream(config.output + ".config") << config.echo();
  } else {
    std::cout.precision(17);
    for (Eigen::Index i = 0; i < result.grid.size(); ++i) std::cout << join_vector(result.grid.point(i)) << '\n';
  }
  std::cerr << "final estimate_p " << result.final_report.estimate_p << " +- " << result.final_report.std_error
            << " (" << result.final_report.samples << " samples)\n";
  return kOk;
}

int check_qdq_bound(const CommonOptions& o) {
  dq::ExperimentConfig config = load(o, "check-qdq-bound");
  const double r = config.norm.kind() == dq::NormSpec::Kind::LInfinity ? std::numeric_limits<double>::infinity()
                                                                        : config.norm.r();
  const auto rows = dq::run_rate_scan(config);
  const dq::QdqBoundReport report = dq::check_qdq_bound(config.distribution.dim(), r, config.p, rows);
  if (o.json) {
    std::ostringstream table;
    dq::rate_scan_table(rows).write_json(table);
    nlohmann::json doc;
    doc["rows"] = nlohmann::json::parse(table.str());
    doc["empirical_q"] = report.empirical_q;
    doc["bound"] = report.bound;
    doc["pass"] = report.pass;
    with_output(config, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
  } else {
    emit(config, dq::rate_scan_table(rows), false);
  }
  std::cerr << (report.pass ? "PASS" : "FAIL") << " empirical_q=" << report.empirical_q << " bound=" << report.bound
            << '\n';
  return report.pass ? kOk : kCheckFailed;
}

int exit_code_for(const dq::Error& e) {
  switch (e.kind()) {
    case dq::ErrorKind::ConfigError:
    case dq::ErrorKind::InvalidArgument:
    case dq::ErrorKind::HypothesisViolation:
    case dq::ErrorKind::NormMismatch:
    case dq::ErrorKind::SpanMismatch:
    case dq::ErrorKind::TooFewPoints:
      return kConfig;
    default:
      return kNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual quantization experiments"};
  app.require_subcommand(1);
  CommonOptions options;
  std::function<int(const CommonOptions&)> action;

  auto add = [&](const std::string& name, const std::string& help, int (*fn)(const CommonOptions&)) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, options);
    cmd->callback([&action, fn] { action = fn; });
    return cmd;
  };
  CLI::App* fp = add("fp-eval", "local dual error at one site, with its certificate", fp_eval);
  fp->add_option("--grid", options.grid_path, "grid file");
  fp->add_option("--site", options.site, "site coordinates, whitespace separated");
  add("distortion", "Monte Carlo distortion of a grid", distortion);
  add("rate-scan", "distortion against grid size", rate_scan);
  add("compare", "dual, extended and nearest-neighbour errors on paired draws", compare);
  add("pierce-scan", "random Pareto grids for unbounded laws", pierce_scan);
  add("optimize", "optimise a grid", optimize);
  add("check-qdq-bound", "rate scan checked against the product-norm constant bound", check_qdq_bound);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  try {
    return action(options);
  } catch (const dq::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
