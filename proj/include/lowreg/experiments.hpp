#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace lowreg {

/// Flat INI configuration (`[section]` then `key = value`). Every value an
/// experiment reads is recorded, defaults included, so the resolved
/// configuration echoes exactly what the run used.
class ExperimentConfig {
 public:
  static ExperimentConfig from_file(const std::filesystem::path& path);
  static ExperimentConfig from_string(const std::string& text);

  /// `experiment.name`.
  const std::string& experiment() const { return name_; }
  /// `output.dir` when present; not part of the resolved configuration.
  const std::optional<std::string>& output_dir() const { return output_dir_; }

  double number(const std::string& key);
  double number(const std::string& key, double fallback);
  int integer(const std::string& key, int fallback);
  std::string text(const std::string& key);
  std::string text(const std::string& key, const std::string& fallback);
  std::vector<double> numbers(const std::string& key);
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);

  /// Config error when the file holds keys no one read.
  void finish() const;

  /// Sorted INI text of every value read, defaults included.
  std::string resolved() const;
  /// FNV-1a 64 of resolved().
  std::uint64_t hash() const;

 private:
  std::optional<std::string> raw(const std::string& key) const;
  void record(const std::string& key, std::string value);

  std::string name_;
  std::optional<std::string> output_dir_;
  std::map<std::string, std::string> values_;    // "section.key" from the file
  std::map<std::string, std::string> resolved_;  // "section.key" as used
};

struct Check {
  std::string name;
  double value = 0.0;
  std::string op;  // "<=", ">=", "==" or "in"
  double threshold = 0.0;
  double upper = 0.0;  // second bound for "in"
  bool pass = false;
};

struct Curve {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, double>> summary;
  std::vector<Check> checks;
  std::vector<Curve> curves;

  bool pass() const;
};

struct ExperimentInfo {
  std::string name;
  std::string claim;
  std::vector<std::string> keys;
};

const std::vector<ExperimentInfo>& experiment_catalog();

/// Runs the configured experiment. Config error for unknown experiments or
/// invalid keys; module errors carry the failing stage in their message.
ExperimentResult run_experiment(ExperimentConfig& config);

/// Shortest round-trip decimal text, locale independent.
std::string format_number(double v);

std::string results_csv(const ExperimentResult& r);
std::string summary_csv(const ExperimentResult& r);
std::string checks_csv(const ExperimentResult& r);
std::string curve_dat(const Curve& c);

/// Writes results.csv, summary.csv, checks.csv, resolved_config.ini and one
/// <curve>.dat per curve into `dir`, each through a temporary file and a
/// rename. Returns the written paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& r,
                                                 const ExperimentConfig& config,
                                                 const std::filesystem::path& dir);

}  // namespace lowreg
