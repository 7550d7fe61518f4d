#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualquant/distribution.hpp"
#include "dualquant/norm.hpp"
#include "dualquant/optimize.hpp"
#include "dualquant/pierce.hpp"

namespace dualquant {

/// Parsed key=value text with [sections].
///
///   # comment (also after a value)
///   [section]
///   key = value
///
/// Keys before the first header belong to section "experiment". Repeated
/// keys and sections are errors. Diagnostics carry "source:line".
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static ConfigFile parse(const std::string& text, const std::string& source = "<config>");
  static ConfigFile load(const std::string& path);

  const std::string& source() const { return source_; }
  bool has(const std::string& section, const std::string& key) const;
  const Entry* find(const std::string& section, const std::string& key) const;
  /// Throws ConfigError naming every key of `section` not in `allowed`.
  void check_keys(const std::string& section, const std::vector<std::string>& allowed) const;
  void check_sections(const std::vector<std::string>& allowed) const;

  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  /// Comma or whitespace separated reals.
  std::vector<double> get_doubles(const std::string& section, const std::string& key) const;

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const;

 private:
  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
  std::map<std::string, int> section_lines_;
};

enum class GridSource { Lattice, Staggered, Optimized, ExplicitFile };

std::string to_string(GridSource source);
GridSource parse_grid_source(const std::string& text);

struct ExperimentConfig {
  std::string kind = "rate-scan";
  std::string distribution_text;  // canonical echo of [distribution]
  Distribution distribution = Distribution::uniform_cube(Point::Zero(1), 1.0);
  double p = 2.0;
  NormSpec norm = NormSpec::l2();
  std::vector<std::size_t> n_values;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  GridSource grid_source = GridSource::Lattice;
  std::string grid_file;
  std::string output;
  bool extended = false;
  std::optional<Point> site;  // fp-eval
  OptimizerConfig optimizer;
  PierceScanConfig pierce;
  bool pierce_product = false;

  /// Re-parseable text form of every field.
  std::string echo() const;
};

ExperimentConfig parse_experiment_config(const ConfigFile& file);
ExperimentConfig load_experiment_config(const std::string& path);

/// Plain-text grid: one point per line, whitespace-separated coordinates,
/// '#' starts a comment.
Grid read_grid_file(const std::string& path);
Grid parse_grid_text(const std::string& text, const std::string& source = "<grid>");
void write_grid_file(const std::string& path, const Grid& grid);

}  // namespace dualquant
