#include <cstdio>
#include <exception>
#include <functional>
#include <initializer_list>
#include <map>
#include <string>
#include <vector>

#include "lowreg/experiments.hpp"

namespace {

using namespace lowreg;

struct Run {
  ExperimentResult result;
  std::string csv;
  std::string error;
};

std::string config_path(const std::string& name) {
  return std::string(LOWREG_CONFIG_DIR) + "/" + name + ".ini";
}

Run execute(const std::string& name) {
  Run run;
  try {
    ExperimentConfig config = ExperimentConfig::from_file(config_path(name));
    run.result = run_experiment(config);
    run.csv = results_csv(run.result) + summary_csv(run.result) + checks_csv(run.result);
    for (const auto& c : run.result.curves) run.csv += curve_dat(c);
  } catch (const std::exception& e) {
    run.error = e.what();
  }
  return run;
}

struct Verdict {
  bool pass = true;
  std::string detail;
};

Verdict checks_of(const Run& run, std::initializer_list<const char*> names) {
  Verdict v;
  if (!run.error.empty()) return {false, run.error};
  for (const char* name : names) {
    bool found = false;
    for (const auto& c : run.result.checks) {
      if (c.name != name) continue;
      found = true;
      v.pass = v.pass && c.pass;
      if (!v.detail.empty()) v.detail += "; ";
      v.detail += c.name + " = " + format_number(c.value) + " " + c.op + " " +
                  format_number(c.threshold);
      if (c.op == "in") v.detail += " .. " + format_number(c.upper);
    }
    if (!found) {
      v.pass = false;
      v.detail += std::string(v.detail.empty() ? "" : "; ") + "missing check " + name;
    }
  }
  return v;
}

Verdict both(const Verdict& a, const Verdict& b) {
  return {a.pass && b.pass, a.detail + "; " + b.detail};
}

}  // namespace

int main() {
  const std::vector<std::string> configs = {
      "adm_schwarzschild", "adm_euclidean",   "adm_conformal_tail", "friedrichs_rate",
      "friedrichs_constant", "scalar_commutator", "scalar_negpart",   "conformal_mass",
      "sobolev_sandwich",  "mollify_convergence"};
  std::map<std::string, Run> runs;
  for (const auto& name : configs) {
    std::fprintf(stderr, "running %s\n", name.c_str());
    runs[name] = execute(name);
  }

  std::vector<std::pair<std::string, Verdict>> criteria;
  criteria.emplace_back("ADM oracle (Schwarzschild m = 1, Euclidean)",
                        both(checks_of(runs["adm_schwarzschild"], {"mass_error"}),
                             checks_of(runs["adm_euclidean"], {"mass_error"})));
  criteria.emplace_back("conformal-tail mass (A = 0.5 -> m = 1)",
                        checks_of(runs["adm_conformal_tail"], {"mass_error"}));
  criteria.emplace_back("Friedrichs commutator rate",
                        checks_of(runs["friedrichs_rate"],
                                  {"lr_slope", "w1r_decreasing", "w1r_last_over_first"}));
  criteria.emplace_back("eps-derivative decay slope",
                        checks_of(runs["friedrichs_rate"], {"eps_derivative_slope"}));
  criteria.emplace_back("scalar commutator decreasing",
                        checks_of(runs["scalar_commutator"], {"norm_decreasing"}));
  criteria.emplace_back("negative part vanishing",
                        checks_of(runs["scalar_negpart"],
                                  {"norm_K_decreasing", "norm_K_last_over_first"}));
  criteria.emplace_back("conformal solve (order, maximum principle, residual)",
                        checks_of(runs["conformal_mass"],
                                  {"mms_order", "u_min", "u_max_minus_one", "residual"}));
  criteria.emplace_back("two-path A and mass agreement",
                        checks_of(runs["conformal_mass"], {"A_relative_gap", "mass_relative_gap"}));
  criteria.emplace_back("mass chain convergence",
                        checks_of(runs["conformal_mass"], {"mass_error_decreasing"}));
  criteria.emplace_back("metric and Sobolev sandwiches",
                        checks_of(runs["sobolev_sandwich"],
                                  {"rho_decreasing", "rho_min", "violations"}));
  criteria.emplace_back("positivity of the distributional scalar curvature",
                        checks_of(runs["scalar_negpart"], {"pairing_min"}));

  Verdict det;
  for (const auto& name : configs) {
    std::fprintf(stderr, "rerunning %s\n", name.c_str());
    const Run again = execute(name);
    const bool same = again.error.empty() && runs[name].error.empty() && again.csv == runs[name].csv;
    det.pass = det.pass && same;
    if (!same) det.detail += (det.detail.empty() ? "" : ", ") + name;
  }
  det.detail = det.pass ? std::to_string(configs.size()) + " configs byte-identical"
                        : "differs: " + det.detail;
  criteria.emplace_back("determinism", det);

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, v] = criteria[i];
    std::printf("criterion %2zu %s  %s  [%s]\n", i + 1, v.pass ? "PASS" : "FAIL", name.c_str(),
                v.detail.c_str());
    if (!v.pass) ++failed;
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
