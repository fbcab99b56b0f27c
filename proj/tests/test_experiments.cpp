#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "lowreg/error.hpp"
#include "lowreg/experiments.hpp"

using namespace lowreg;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Data;
}

const char* kEuclidean = R"(
[experiment]
name = adm-mass

[corpus]
entry = euclidean

[thresholds]
expected = 0
tolerance = 1e-10

[output]
dir = somewhere
)";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing records defaults and rejects unread keys") {
  ExperimentConfig c = ExperimentConfig::from_string(kEuclidean);
  CHECK(c.experiment() == "adm-mass");
  REQUIRE(c.output_dir().has_value());
  CHECK(*c.output_dir() == "somewhere");
  const ExperimentResult r = run_experiment(c);
  CHECK(r.pass());
  const std::string resolved = c.resolved();
  CHECK(resolved.find("radii = 8, 16, 32") != std::string::npos);
  CHECK(resolved.find("quadrature_order = 16") != std::string::npos);
  CHECK(resolved.find("tolerance = 1e-10") != std::string::npos);
  CHECK(resolved.find("somewhere") == std::string::npos);

  const std::string extra = std::string(kEuclidean) + "\n[grid]\nh = 0.1\n";
  ExperimentConfig bad = ExperimentConfig::from_string(extra);
  CHECK(kind_of([&] { run_experiment(bad); }) == ErrorKind::Config);
}

TEST_CASE("hash depends on resolved values only") {
  ExperimentConfig a = ExperimentConfig::from_string(kEuclidean);
  run_experiment(a);
  std::string moved = kEuclidean;
  moved.replace(moved.find("somewhere"), 9, "elsewhere");
  ExperimentConfig b = ExperimentConfig::from_string(moved);
  run_experiment(b);
  CHECK(a.hash() == b.hash());

  std::string tighter = kEuclidean;
  tighter.replace(tighter.find("1e-10"), 5, "1e-12");
  ExperimentConfig c = ExperimentConfig::from_string(tighter);
  run_experiment(c);
  CHECK(a.hash() != c.hash());
}

TEST_CASE("config errors") {
  CHECK(kind_of([] { ExperimentConfig::from_string("[experiment]\nname = nope\n"); }) ==
        ErrorKind::Config);
  CHECK(kind_of([] { ExperimentConfig::from_string("[corpus]\nentry = euclidean\n"); }) ==
        ErrorKind::Config);
  CHECK(kind_of([] { ExperimentConfig::from_string("not an ini [["); }) == ErrorKind::Config);
  CHECK(kind_of([] { ExperimentConfig::from_file("/nonexistent/config.ini"); }) ==
        ErrorKind::Config);

  auto run_text = [](const std::string& text) {
    ExperimentConfig c = ExperimentConfig::from_string(text);
    run_experiment(c);
  };
  CHECK(kind_of([&] {
          run_text("[experiment]\nname = adm-mass\n[corpus]\nentry = kerr\n");
        }) == ErrorKind::Config);
  CHECK(kind_of([&] {
          run_text("[experiment]\nname = adm-mass\n[corpus]\nentry = schwarzschild\nm = -1\n");
        }) == ErrorKind::Config);
  CHECK(kind_of([&] {
          run_text(
              "[experiment]\nname = adm-mass\n[corpus]\nentry = euclidean\n"
              "[thresholds]\nexpected = zero\n");
        }) == ErrorKind::Config);
  CHECK(kind_of([&] {
          run_text(
              "[experiment]\nname = friedrichs-rate\n[scales]\neps = 0.1, 0.05\n");
        }) == ErrorKind::Config);
  CHECK(kind_of([&] {
          run_text(
              "[experiment]\nname = friedrichs-rate\n[functions]\na = cubic\n");
        }) == ErrorKind::Config);
}

TEST_CASE("module errors carry the stage name") {
  ExperimentConfig c = ExperimentConfig::from_string(
      "[experiment]\nname = friedrichs-rate\n[grid]\nh = 0.05\n");
  try {
    run_experiment(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() != ErrorKind::Config);
    CHECK(std::string(e.what()).find("friedrichs_w1r: ") != std::string::npos);
  }
}

TEST_CASE("friedrichs-rate with constant profiles is identically zero and passes") {
  ExperimentConfig c = ExperimentConfig::from_string(
      "[experiment]\nname = friedrichs-rate\n[functions]\na = one\nf = one\n"
      "[grid]\nh = 0.0125\n[scales]\neps = 0.2, 0.1, 0.05\n");
  const ExperimentResult r = run_experiment(c);
  CHECK(r.pass());
  for (const auto& row : r.rows) {
    CHECK(row[1] == 0.0);
    CHECK(row[2] == 0.0);
  }
}

TEST_CASE("adm-mass reproduces Schwarzschild and fails a wrong expectation") {
  const std::string base =
      "[experiment]\nname = adm-mass\n[corpus]\nentry = schwarzschild\nm = 1\n[thresholds]\n";
  ExperimentConfig good = ExperimentConfig::from_string(base + "expected = 1\ntolerance = 1e-3\n");
  CHECK(run_experiment(good).pass());
  ExperimentConfig wrong = ExperimentConfig::from_string(base + "expected = 2\ntolerance = 1e-3\n");
  const ExperimentResult r = run_experiment(wrong);
  CHECK_FALSE(r.pass());
  REQUIRE(r.checks.size() == 1);
  CHECK(r.checks[0].name == "mass_error");
}

TEST_CASE("number formatting is shortest round trip") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-10) == "1e-10");
  CHECK(format_number(3.0) == "3");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(INFINITY) == "inf");
}

TEST_CASE("csv writers and atomic outputs") {
  ExperimentResult r;
  r.experiment = "adm-mass";
  r.columns = {"r", "m_of_r"};
  r.rows = {{8, 0.5}, {16, 0.25}};
  r.summary = {{"m_inf", 0.125}};
  r.checks = {{"a", 1.0, "<=", 2.0, 0.0, true}, {"b", 0.5, "in", 0.4, 0.6, true}};
  r.curves = {{"m_of_r", {{8, 0.5}, {16, 0.25}}}};
  CHECK(results_csv(r) == "r,m_of_r\n8,0.5\n16,0.25\n");
  CHECK(summary_csv(r) == "key,value\nm_inf,0.125\n");
  CHECK(checks_csv(r) ==
        "check,value,op,threshold,upper,pass\na,1,<=,2,,1\nb,0.5,in,0.4,0.6,1\n");
  CHECK(curve_dat(r.curves[0]) == "# m_of_r\n8 0.5\n16 0.25\n");

  ExperimentConfig c = ExperimentConfig::from_string(kEuclidean);
  run_experiment(c);
  const auto dir = std::filesystem::temp_directory_path() / "lowreg_test_outputs";
  std::filesystem::remove_all(dir);
  const auto files = write_outputs(r, c, dir);
  CHECK(files.size() == 5);
  CHECK(slurp(dir / "results.csv") == results_csv(r));
  CHECK(slurp(dir / "resolved_config.ini").find("[corpus]\nentry = euclidean") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "m_of_r.dat"));
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    CHECK(entry.path().extension() != ".tmp");
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("catalog lists every experiment with keys and a claim") {
  const auto& cat = experiment_catalog();
  CHECK(cat.size() == 7);
  for (const auto& e : cat) {
    CHECK_FALSE(e.claim.empty());
    CHECK_FALSE(e.keys.empty());
    ExperimentConfig c = ExperimentConfig::from_string("[experiment]\nname = " + e.name + "\n");
    CHECK(c.experiment() == e.name);
  }
}

TEST_CASE("shipped configs parse and name known experiments") {
  for (const auto& entry : std::filesystem::directory_iterator(LOWREG_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    CAPTURE(entry.path().string());
    const ExperimentConfig c = ExperimentConfig::from_file(entry.path());
    bool known = false;
    for (const auto& e : experiment_catalog()) known = known || e.name == c.experiment();
    CHECK(known);
  }
}
