#include "dualquant/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dualquant {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

std::optional<double> to_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    return std::nullopt;
  }
  return value;
}

std::vector<std::string> split_list(const std::string& text) {
  std::string spaced = text;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::vector<std::string> out;
  for (std::string token; in >> token;) out.push_back(token);
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string join(const std::vector<double>& values) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? " " : "") << values[i];
  return out.str();
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text, const std::string& source) {
  ConfigFile file;
  file.source_ = source;
  std::istringstream in(text);
  std::string section = "experiment";
  int number = 0;
  auto error = [&](const std::string& what) {
    throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(number) + ": " + what);
  };
  for (std::string raw; std::getline(in, raw);) {
    ++number;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') error("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) error("empty section name");
      if (file.section_lines_.count(section)) error("section [" + section + "] appears twice");
      file.section_lines_[section] = number;
      file.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) error("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) error("missing key before '='");
    auto& entries = file.sections_[section];
    if (entries.count(key)) error("key '" + key + "' repeated in [" + section + "]");
    entries[key] = {value, number};
  }
  return file;
}

ConfigFile ConfigFile::load(const std::string& path) { return parse(slurp(path), path); }

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

void ConfigFile::check_keys(const std::string& section, const std::vector<std::string>& allowed) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return;
  for (const auto& [key, entry] : s->second) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorKind::ConfigError, source_ + ":" + std::to_string(entry.line) + ": unknown key '" + key +
                                              "' in [" + section + "]");
    }
  }
}

void ConfigFile::check_sections(const std::vector<std::string>& allowed) const {
  for (const auto& [name, line] : section_lines_) {
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
      throw Error(ErrorKind::ConfigError, source_ + ":" + std::to_string(line) + ": unknown section [" + name + "]");
    }
  }
}

void ConfigFile::fail(const std::string& section, const std::string& key, const std::string& what) const {
  const Entry* entry = find(section, key);
  const std::string where = entry ? source_ + ":" + std::to_string(entry->line) : source_;
  throw Error(ErrorKind::ConfigError, where + ": [" + section + "] " + key + ": " + what);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  const Entry* entry = find(section, key);
  return entry ? entry->value : fallback;
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double fallback) const {
  const Entry* entry = find(section, key);
  if (!entry) return fallback;
  const auto value = to_double(entry->value);
  if (!value) fail(section, key, "expected a real number, got '" + entry->value + "'");
  return *value;
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const {
  const Entry* entry = find(section, key);
  if (!entry) return fallback;
  std::uint64_t value = 0;
  const char* last = entry->value.data() + entry->value.size();
  const auto [ptr, ec] = std::from_chars(entry->value.data(), last, value);
  if (ec != std::errc() || ptr != last || entry->value.empty()) {
    fail(section, key, "expected a non-negative integer, got '" + entry->value + "'");
  }
  return value;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* entry = find(section, key);
  if (!entry) return fallback;
  if (entry->value == "true" || entry->value == "yes" || entry->value == "1") return true;
  if (entry->value == "false" || entry->value == "no" || entry->value == "0") return false;
  fail(section, key, "expected true or false, got '" + entry->value + "'");
}

std::vector<double> ConfigFile::get_doubles(const std::string& section, const std::string& key) const {
  const Entry* entry = find(section, key);
  if (!entry) return {};
  std::vector<double> out;
  for (const std::string& token : split_list(entry->value)) {
    const auto value = to_double(token);
    if (!value) fail(section, key, "'" + token + "' is not a real number");
    out.push_back(*value);
  }
  return out;
}

std::string to_string(GridSource source) {
  switch (source) {
    case GridSource::Lattice: return "lattice";
    case GridSource::Staggered: return "staggered";
    case GridSource::Optimized: return "optimized";
    case GridSource::ExplicitFile: return "explicit-file";
  }
  return "unknown";
}

GridSource parse_grid_source(const std::string& text) {
  if (text == "lattice") return GridSource::Lattice;
  if (text == "staggered") return GridSource::Staggered;
  if (text == "optimized") return GridSource::Optimized;
  if (text == "explicit-file") return GridSource::ExplicitFile;
  throw Error(ErrorKind::ConfigError, "unknown grid source '" + text + "'");
}

namespace {

Point to_point(const std::vector<double>& values) {
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Distribution parse_distribution(const ConfigFile& file) {
  const std::string s = "distribution";
  const std::string kind = file.get_string(s, "kind", "uniform_cube");
  auto wrap = [&](auto&& build) -> Distribution {
    try {
      return build();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      file.fail(s, "kind", e.what());
    }
  };
  auto dim = [&] {
    const std::uint64_t d = file.get_u64(s, "dim", 1);
    if (d < 1) file.fail(s, "dim", "must be >= 1");
    return static_cast<Eigen::Index>(d);
  };
  if (kind == "uniform_cube") {
    file.check_keys(s, {"kind", "dim", "corner", "edge"});
    std::vector<double> corner = file.get_doubles(s, "corner");
    if (corner.empty()) corner.assign(static_cast<std::size_t>(dim()), 0.0);
    const double edge = file.get_double(s, "edge", 1.0);
    return wrap([&] { return Distribution::uniform_cube(to_point(corner), edge); });
  }
  if (kind == "uniform_cube_union") {
    file.check_keys(s, {"kind", "cubes", "weights"});
    std::vector<Cube> cubes;
    std::istringstream in(file.get_string(s, "cubes", ""));
    for (std::string item; std::getline(in, item, ';');) {
      std::vector<double> values;
      for (const std::string& token : split_list(item)) {
        const auto v = to_double(token);
        if (!v) file.fail(s, "cubes", "'" + token + "' is not a real number");
        values.push_back(*v);
      }
      if (values.size() < 2) file.fail(s, "cubes", "each cube is 'corner... edge'");
      cubes.push_back({to_point(std::vector<double>(values.begin(), values.end() - 1)), values.back()});
    }
    if (cubes.empty()) file.fail(s, "cubes", "at least one cube is required");
    std::vector<double> weights = file.get_doubles(s, "weights");
    if (weights.empty()) weights.assign(cubes.size(), 1.0 / static_cast<double>(cubes.size()));
    return wrap([&] { return Distribution::uniform_cube_union(cubes, weights); });
  }
  if (kind == "gaussian") {
    file.check_keys(s, {"kind", "dim"});
    return wrap([&] { return Distribution::gaussian(dim()); });
  }
  if (kind == "exponential") {
    file.check_keys(s, {"kind", "dim", "rate"});
    return wrap([&] { return Distribution::exponential(dim(), file.get_double(s, "rate", 1.0)); });
  }
  if (kind == "pareto") {
    file.check_keys(s, {"kind", "dim", "index"});
    return wrap([&] { return Distribution::pareto(dim(), file.get_double(s, "index", 3.0)); });
  }
  if (kind == "point_mass") {
    file.check_keys(s, {"kind", "atom"});
    const std::vector<double> atom = file.get_doubles(s, "atom");
    if (atom.empty()) file.fail(s, "atom", "coordinates are required");
    return wrap([&] { return Distribution::point_mass(to_point(atom)); });
  }
  if (kind == "empirical") {
    file.check_keys(s, {"kind", "file"});
    const std::string path = file.get_string(s, "file", "");
    if (path.empty()) file.fail(s, "file", "a sample file is required");
    return wrap([&] { return Distribution::empirical(read_grid_file(path).points()); });
  }
  file.fail(s, "kind", "unknown distribution '" + kind + "'");
}

}  // namespace

ExperimentConfig parse_experiment_config(const ConfigFile& file) {
  file.check_sections({"experiment", "distribution", "optimizer", "pierce"});
  const std::string e = "experiment";
  file.check_keys(e, {"kind", "p", "norm", "n", "samples", "seed", "grid_source", "grid_file", "output", "extended",
                      "site"});
  file.check_keys("optimizer", {"method", "iterations", "step_a", "step_b", "restarts", "samples_per_eval",
                                "final_samples", "seed"});
  file.check_keys("pierce", {"eta", "delta", "functional", "product"});

  ExperimentConfig config;
  config.kind = file.get_string(e, "kind", "rate-scan");
  static const std::vector<std::string> kinds = {"fp-eval",     "distortion", "rate-scan",      "compare",
                                                 "pierce-scan", "optimize",   "check-qdq-bound"};
  if (std::find(kinds.begin(), kinds.end(), config.kind) == kinds.end()) {
    file.fail(e, "kind", "unknown experiment kind '" + config.kind + "'");
  }
  config.p = file.get_double(e, "p", 2.0);
  if (!(std::isfinite(config.p) && config.p >= 1.0)) file.fail(e, "p", "must be a finite real >= 1");
  try {
    config.norm = NormSpec::parse(file.get_string(e, "norm", "l2"));
  } catch (const Error& err) {
    file.fail(e, "norm", err.what());
  }
  for (double v : file.get_doubles(e, "n")) {
    if (!(v >= 1.0) || v != std::floor(v)) file.fail(e, "n", "grid sizes must be positive integers");
    config.n_values.push_back(static_cast<std::size_t>(v));
  }
  std::sort(config.n_values.begin(), config.n_values.end());
  config.n_values.erase(std::unique(config.n_values.begin(), config.n_values.end()), config.n_values.end());
  config.samples = file.get_u64(e, "samples", 100000);
  if (config.samples == 0) file.fail(e, "samples", "must be >= 1");
  config.seed = file.get_u64(e, "seed", 0);
  try {
    config.grid_source = parse_grid_source(file.get_string(e, "grid_source", "lattice"));
  } catch (const Error& err) {
    file.fail(e, "grid_source", err.what());
  }
  config.grid_file = file.get_string(e, "grid_file", "");
  if (config.grid_source == GridSource::ExplicitFile && config.grid_file.empty()) {
    file.fail(e, "grid_file", "required when grid_source = explicit-file");
  }
  config.output = file.get_string(e, "output", "");
  config.extended = file.get_bool(e, "extended", false);
  if (file.has(e, "site")) config.site = to_point(file.get_doubles(e, "site"));

  std::ostringstream dist_text;
  if (const ConfigFile::Entry* kind = file.find("distribution", "kind")) dist_text << "kind = " << kind->value << '\n';
  for (const char* key : {"dim", "corner", "edge", "cubes", "weights", "rate", "index", "atom", "file"}) {
    if (const ConfigFile::Entry* entry = file.find("distribution", key)) {
      dist_text << key << " = " << entry->value << '\n';
    }
  }
  config.distribution_text = dist_text.str();
  config.distribution = parse_distribution(file);
  if (config.site && config.site->size() != config.distribution.dim()) {
    file.fail(e, "site", "dimension differs from the distribution");
  }

  const std::string o = "optimizer";
  try {
    config.optimizer.method = parse_optimizer_method(file.get_string(o, "method", "sgd"));
  } catch (const Error& err) {
    file.fail(o, "method", err.what());
  }
  config.optimizer.iterations = file.get_u64(o, "iterations", config.optimizer.iterations);
  config.optimizer.step_a = file.get_double(o, "step_a", config.optimizer.step_a);
  config.optimizer.step_b = file.get_double(o, "step_b", config.optimizer.step_b);
  config.optimizer.restarts = static_cast<int>(file.get_u64(o, "restarts", 1));
  config.optimizer.samples_per_eval = file.get_u64(o, "samples_per_eval", config.optimizer.samples_per_eval);
  config.optimizer.final_samples = file.get_u64(o, "final_samples", config.optimizer.final_samples);
  config.optimizer.seed = file.get_u64(o, "seed", config.seed);
  config.optimizer.extended = config.extended;
  try {
    config.optimizer.validate();
  } catch (const Error& err) {
    throw Error(ErrorKind::ConfigError, file.source() + ": [optimizer] " + err.what());
  }

  const std::string pc = "pierce";
  config.pierce.p = config.p;
  config.pierce.eta = file.get_double(pc, "eta", 1.0);
  if (!(config.pierce.eta > 0.0)) file.fail(pc, "eta", "must be > 0");
  config.pierce.delta = file.get_double(pc, "delta", 0.0);
  if (config.pierce.delta < 0.0) file.fail(pc, "delta", "must be >= 0 (0 selects the default)");
  const std::string functional = file.get_string(pc, "functional", "");
  config.pierce_product = file.get_bool(pc, "product", config.distribution.dim() > 1);
  if (functional.empty()) {
    config.pierce.functional = config.pierce_product ? PierceFunctional::Dual : PierceFunctional::Envelope;
  } else if (functional == "envelope") {
    config.pierce.functional = PierceFunctional::Envelope;
  } else if (functional == "dual") {
    config.pierce.functional = PierceFunctional::Dual;
  } else {
    file.fail(pc, "functional", "expected envelope or dual");
  }
  config.pierce.n_values = config.n_values;
  config.pierce.samples = config.samples;
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(ConfigFile::load(path));
}

std::string ExperimentConfig::echo() const {
  std::ostringstream out;
  out.precision(17);
  out << "[experiment]\n";
  out << "kind = " << kind << '\n';
  out << "p = " << p << '\n';
  out << "norm = " << norm.name() << '\n';
  out << "n =";
  for (std::size_t n : n_values) out << ' ' << n;
  out << '\n';
  out << "samples = " << samples << '\n';
  out << "seed = " << seed << '\n';
  out << "grid_source = " << to_string(grid_source) << '\n';
  if (!grid_file.empty()) out << "grid_file = " << grid_file << '\n';
  if (!output.empty()) out << "output = " << output << '\n';
  out << "extended = " << (extended ? "true" : "false") << '\n';
  if (site) out << "site = " << join(std::vector<double>(site->data(), site->data() + site->size())) << '\n';
  out << "\n[distribution]\n" << distribution_text;
  out << "\n[optimizer]\n";
  out << "method = " << to_string(optimizer.method) << '\n';
  out << "iterations = " << optimizer.iterations << '\n';
  out << "step_a = " << optimizer.step_a << '\n';
  out << "step_b = " << optimizer.step_b << '\n';
  out << "restarts = " << optimizer.restarts << '\n';
  out << "samples_per_eval = " << optimizer.samples_per_eval << '\n';
  out << "final_samples = " << optimizer.final_samples << '\n';
  out << "seed = " << optimizer.seed << '\n';
  out << "\n[pierce]\n";
  out << "eta = " << pierce.eta << '\n';
  out << "delta = " << pierce.delta << '\n';
  out << "functional = " << (pierce.functional == PierceFunctional::Dual ? "dual" : "envelope") << '\n';
  out << "product = " << (pierce_product ? "true" : "false") << '\n';
  return out.str();
}

Grid parse_grid_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::vector<std::vector<double>> rows;
  int number = 0;
  for (std::string raw; std::getline(in, raw);) {
    ++number;
    std::istringstream fields(strip_comment(raw));
    std::vector<double> row;
    for (std::string token; fields >> token;) {
      const auto v = to_double(token);
      if (!v || !std::isfinite(*v)) {
        throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(number) + ": bad coordinate '" + token + "'");
      }
      row.push_back(*v);
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorKind::ConfigError, source + ":" + std::to_string(number) + ": expected " +
                                              std::to_string(rows.front().size()) + " coordinates");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::ConfigError, source + ": no points");
  Eigen::MatrixXd points(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) points.col(static_cast<Eigen::Index>(i)) = to_point(rows[i]);
  try {
    return Grid(std::move(points));
  } catch (const Error& err) {
    throw Error(ErrorKind::ConfigError, source + ": " + err.what());
  }
}

Grid read_grid_file(const std::string& path) { return parse_grid_text(slurp(path), path); }

void write_grid_file(const std::string& path, const Grid& grid) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ConfigError, "cannot write '" + path + "'");
  out.precision(17);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    for (Eigen::Index j = 0; j < grid.dim(); ++j) out << (j ? " " : "") << grid.points()(j, i);
    out << '\n';
  }
}

}  // namespace dualquant
