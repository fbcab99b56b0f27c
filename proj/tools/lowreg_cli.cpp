#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <json.hpp>

#include "lowreg/corpus.hpp"
#include "lowreg/error.hpp"
#include "lowreg/experiments.hpp"

namespace {

using nlohmann::ordered_json;
using namespace lowreg;

ordered_json check_json(const Check& c) {
  ordered_json j = {{"name", c.name}, {"value", c.value}, {"op", c.op}, {"threshold", c.threshold}};
  if (c.op == "in") j["upper"] = c.upper;
  j["pass"] = c.pass;
  return j;
}

void print_list(bool machine) {
  if (machine) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : experiment_catalog()) {
      arr.push_back({{"name", e.name}, {"claim", e.claim}, {"keys", e.keys}});
    }
    std::cout << arr.dump(2) << "\n";
    return;
  }
  for (const auto& e : experiment_catalog()) {
    std::cout << e.name << "\n  claim: " << e.claim << "\n  keys:";
    for (const auto& k : e.keys) std::cout << " " << k;
    std::cout << "\n";
  }
}

int run(const std::string& config_path, const std::string& out_flag, bool machine) {
  ExperimentConfig config = ExperimentConfig::from_file(config_path);
  std::string dir = "out/" + config.experiment();
  if (config.output_dir()) dir = *config.output_dir();
  if (!out_flag.empty()) dir = out_flag;

  const ExperimentResult result = run_experiment(config);
  const auto files = write_outputs(result, config, dir);
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(config.hash()));

  if (machine) {
    ordered_json j = {{"experiment", result.experiment},
                      {"config_hash", hash},
                      {"verdict", result.pass() ? "pass" : "fail"}};
    ordered_json checks = ordered_json::array();
    for (const auto& c : result.checks) checks.push_back(check_json(c));
    j["checks"] = checks;
    ordered_json summary = ordered_json::object();
    for (const auto& [k, v] : result.summary) summary[k] = v;
    j["summary"] = summary;
    ordered_json written = ordered_json::array();
    for (const auto& f : files) written.push_back(f.string());
    j["files"] = written;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << result.experiment << " (config " << hash << ")\n";
    std::cout << results_csv(result);
    for (const auto& c : result.checks) {
      std::cout << (c.pass ? "  pass  " : "  FAIL  ") << c.name << " = " << format_number(c.value)
                << " " << c.op << " " << format_number(c.threshold);
      if (c.op == "in") std::cout << " .. " << format_number(c.upper);
      std::cout << "\n";
    }
    std::cout << "verdict: " << (result.pass() ? "pass" : "fail") << "\n";
    std::cout << "outputs: " << dir << "\n";
  }
  return result.pass() ? 0 : 1;
}

int report_error(const std::exception& e, bool machine, int code) {
  if (machine) {
    std::cout << ordered_json{{"verdict", "error"}, {"exit_code", code}, {"message", e.what()}}.dump(2)
              << "\n";
  }
  std::cerr << e.what() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-regularity positive mass experiments"};
  app.require_subcommand(1);
  bool machine = false;
  app.add_flag("--machine", machine, "Emit JSON instead of text");

  auto* run_cmd = app.add_subcommand("run", "Run the experiment described by a config file");
  std::string config_path;
  std::string out_dir;
  run_cmd->add_option("config", config_path, "INI config file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  run_cmd->add_flag("--machine", machine, "Emit JSON instead of text");

  auto* list_cmd = app.add_subcommand("list", "List experiments, their keys and claims");
  list_cmd->add_flag("--machine", machine, "Emit JSON instead of text");

  app.add_subcommand("corpus", "Print the corpus manifest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*list_cmd) {
    print_list(machine);
    return 0;
  }
  if (!*run_cmd) {
    std::cout << corpus_manifest(default_corpus()) << "\n";
    return 0;
  }
  try {
    return run(config_path, out_dir, machine);
  } catch (const Error& e) {
    return report_error(e, machine, e.kind() == ErrorKind::Config ? 2 : 1);
  } catch (const std::exception& e) {
    return report_error(e, machine, 1);
  }
}
