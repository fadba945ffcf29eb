#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "lrcd/csv.hpp"
#include "lrcd/experiment.hpp"
#include "lrcd/ingest.hpp"

using Catch::Approx;
using namespace lrcd;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lrcd_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p);
  os << content;
}

std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() == "run.log") continue;
    std::ifstream is(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

ExperimentConfig small_config(const std::string& out_dir) {
  ExperimentConfig cfg;
  LmsdSpec lm;
  lm.gaussian = LongMemoryGaussianSpec::with_target_variance(0.3, 0.5);
  lm.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
  cfg.model = lm;
  cfg.regime = SamplingRegime::stationary();
  const double mu = lm.mean_duration();
  cfg.t_grid = {8 * mu, 16 * mu, 32 * mu, 64 * mu};
  cfg.horizon = 64 * mu;
  cfg.delta_t = mu;
  cfg.levels = {2, 4};
  cfg.reps = 48;
  cfg.seed = 7;
  cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("config round-trips through its canonical JSON", "[harness]") {
  const ExperimentConfig cfg = small_config("x");
  const ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  REQUIRE(back.canonical() == cfg.canonical());
  REQUIRE(back.hash() == cfg.hash());

  // sigma_h_sq input form resolves to sigma_e and round-trips stably
  nlohmann::json j = cfg.to_json();
  j["model"].erase("sigma_e");
  j["model"]["sigma_h_sq"] = 0.5;
  const ExperimentConfig c2 = ExperimentConfig::from_json(j);
  REQUIRE(variance_h(std::get<LmsdSpec>(c2.model).gaussian) == Approx(0.5).margin(1e-12));
}

TEST_CASE("config validation lists every violation", "[harness]") {
  nlohmann::json j = small_config("x").to_json();
  j["model"]["type"] = "acd";
  j["model"]["alpha"] = 0.5;
  j["model"]["beta"] = 0.6;     // alpha+beta >= 1
  j["model"]["omega"] = -1.0;   // nonpositive
  j["reps"] = 0;                // bad
  j["horizon"] = 4.0;           // below max(t_grid)
  try {
    ExperimentConfig::from_json(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    REQUIRE(e.violations.size() >= 4);
    bool saw_stationarity = false, saw_reps = false, saw_horizon = false;
    for (const auto& v : e.violations) {
      if (v.find("alpha + beta") != std::string::npos) saw_stationarity = true;
      if (v.find("reps") != std::string::npos) saw_reps = true;
      if (v.find("horizon") != std::string::npos) saw_horizon = true;
    }
    REQUIRE(saw_stationarity);
    REQUIRE(saw_reps);
    REQUIRE(saw_horizon);
  }
}

TEST_CASE("count series and variance-time CSVs round-trip", "[harness]") {
  CountSeries c;
  c.delta_t = 0.75;
  c.regime = SamplingRegime::Kind::StationaryP;
  c.counts = {3, 0, 1, 7, 2};
  std::ostringstream os;
  write_count_series_csv(os, c);
  std::istringstream is(os.str());
  const CountSeries back = parse_count_series_csv(is);
  REQUIRE(back.delta_t == c.delta_t);
  REQUIRE(back.regime == c.regime);
  REQUIRE(back.counts == c.counts);

  VarianceTimeCurve v;
  v.t_grid = {1.5, 3.0};
  v.var_hat = {0.123456789012345, 2.5e-7};
  v.se = {0.01, 0.002};
  v.reps = 17;
  std::ostringstream os2;
  write_variance_time_csv(os2, v);
  std::istringstream is2(os2.str());
  const VarianceTimeCurve vb = parse_variance_time_csv(is2);
  REQUIRE(vb.t_grid == v.t_grid);
  REQUIRE(vb.var_hat == v.var_hat);
  REQUIRE(vb.se == v.se);
  REQUIRE(vb.reps == v.reps);
}

TEST_CASE("ingest parses plain and two-column timestamps", "[harness]") {
  const fs::path dir = temp_dir("ingest");
  write_file(dir / "plain.txt", "1.0\n3.0\n6.0\n");
  const IngestResult r = ingest_timestamps((dir / "plain.txt").string());
  REQUIRE(r.durations.durations == std::vector<double>{2.0, 3.0});
  REQUIRE(r.events.times == std::vector<double>{2.0, 5.0});
  REQUIRE(r.ticks_read == 3);
  REQUIRE(r.out_of_order == 0);
  REQUIRE(r.span == Approx(5.0));

  write_file(dir / "two.csv", "a,1.5\nb,2.0\nc,4.5\n");
  const IngestResult r2 = ingest_timestamps((dir / "two.csv").string());
  REQUIRE(r2.durations.durations == std::vector<double>{0.5, 2.5});
}

TEST_CASE("ingest sorts unsorted input and reports it", "[harness]") {
  const fs::path dir = temp_dir("ingest_sort");
  write_file(dir / "ticks.txt", "3.0\n1.0\n6.0\n2.0\n");
  const IngestResult r = ingest_timestamps((dir / "ticks.txt").string());
  REQUIRE(r.out_of_order == 2);
  REQUIRE(r.durations.durations == std::vector<double>{1.0, 1.0, 3.0});
}

TEST_CASE("ingest zero-duration policies", "[harness]") {
  const fs::path dir = temp_dir("ingest_dupe");
  write_file(dir / "dupe.txt", "1.0\n2.0\n2.0\n5.0\n");

  const IngestResult drop = ingest_timestamps((dir / "dupe.txt").string(),
                                              {DedupePolicy::Drop, 1e-9, 1});
  REQUIRE(drop.durations.durations == std::vector<double>{1.0, 3.0});  // one event retained
  REQUIRE(drop.zero_durations == 1);

  const IngestResult jit = ingest_timestamps((dir / "dupe.txt").string(),
                                             {DedupePolicy::Jitter, 1e-6, 1});
  REQUIRE(jit.durations.durations.size() == 3);
  for (double d : jit.durations.durations) REQUIRE(d > 0.0);

  REQUIRE_THROWS_WITH(
      ingest_timestamps((dir / "dupe.txt").string(), {DedupePolicy::Error, 1e-9, 1}),
      Catch::Matchers::ContainsSubstring("zero duration"));
}

TEST_CASE("ingest error paths carry line numbers", "[harness]") {
  const fs::path dir = temp_dir("ingest_err");
  write_file(dir / "bad.txt", "1.0\nnot_a_number\n3.0\n");
  REQUIRE_THROWS_WITH(ingest_timestamps((dir / "bad.txt").string()),
                      Catch::Matchers::ContainsSubstring("line 2"));
  write_file(dir / "empty.txt", "");
  REQUIRE_THROWS_WITH(ingest_timestamps((dir / "empty.txt").string()),
                      Catch::Matchers::ContainsSubstring("no timestamps"));
}

TEST_CASE("run_experiment produces the declared files", "[harness]") {
  const fs::path dir = temp_dir("exp_smoke");
  ExperimentConfig cfg = small_config((dir / "run").string());
  cfg.reps = 30;  // variance_time minimum
  const ReportRecord rep = run_experiment(cfg, 1);
  REQUIRE(rep.experiment_id.size() == 16);
  for (const char* f : {"config.json", "variance_time.csv", "counts.csv", "aggregated_acf.csv",
                        "report.json", "run.log"})
    REQUIRE(fs::exists(dir / "run" / f));
  // the CSVs parse back
  std::ifstream is(dir / "run" / "variance_time.csv");
  const VarianceTimeCurve curve = parse_variance_time_csv(is);
  REQUIRE(curve.t_grid.size() == cfg.t_grid.size());
  std::ifstream is2(dir / "run" / "counts.csv");
  const CountSeries counts = parse_count_series_csv(is2);
  REQUIRE(counts.counts.size() == 64);
}

TEST_CASE("run_experiment output bytes are reproducible and worker-independent", "[harness]") {
  const fs::path dir = temp_dir("exp_det");
  const ExperimentConfig cfg = small_config((dir / "run").string());

  run_experiment(cfg, 1);
  const auto bytes1 = dir_bytes(dir / "run");
  fs::remove_all(dir / "run");
  run_experiment(cfg, 1);
  const auto bytes2 = dir_bytes(dir / "run");
  fs::remove_all(dir / "run");
  run_experiment(cfg, 2);
  const auto bytes3 = dir_bytes(dir / "run");

  REQUIRE(bytes1 == bytes2);
  REQUIRE(bytes1 == bytes3);
  REQUIRE(bytes1.count("report.json") == 1);
}

TEST_CASE("report record excludes wall clock from canonical bytes", "[harness]") {
  ReportRecord r;
  r.experiment_id = "abc";
  r.wall_clock_seconds = 1.25;
  REQUIRE(r.to_json(false).contains("wall_clock_seconds") == false);
  REQUIRE(r.to_json(true).contains("wall_clock_seconds") == true);
}
