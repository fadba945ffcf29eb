#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrcd/config.hpp"
#include "lrcd/csv.hpp"
#include "lrcd/estimators.hpp"

namespace lrcd {

struct ReportRecord {
  std::string experiment_id;  // hex of the config hash
  std::uint64_t config_hash = 0;
  std::vector<MemoryEstimate> estimates;
  std::vector<std::string> acceptance;  // verdict lines when run through `verify`
  double wall_clock_seconds = 0.0;      // volatile; kept out of the canonical report bytes
  std::string tool_version = kToolVersion;

  // include_volatile=false gives the deterministic on-disk form.
  nlohmann::json to_json(bool include_volatile) const {
    nlohmann::json j;
    j["experiment_id"] = experiment_id;
    j["config_hash"] = config_hash;
    j["tool_version"] = tool_version;
    j["acceptance"] = acceptance;
    nlohmann::json ests = nlohmann::json::array();
    for (const auto& e : estimates) {
      nlohmann::json je;
      je["method"] = e.method;
      je["d_hat"] = e.d_hat;
      je["se"] = e.se;
      je["diagnostics"] = e.diagnostics;
      ests.push_back(je);
    }
    j["estimates"] = ests;
    if (include_volatile) j["wall_clock_seconds"] = wall_clock_seconds;
    return j;
  }
};

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Full pipeline: simulate -> events -> counts -> estimators, replication
// seeds derived as hash(master, index). Data outputs are byte-identical
// across reruns and worker counts; timing goes to run.log only.
inline ReportRecord run_experiment(const ExperimentConfig& config, std::size_t workers = 0) {
  config.validate();
  const auto t_start = std::chrono::steady_clock::now();
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);

  ReportRecord report;
  report.config_hash = config.hash();
  report.experiment_id = hash_hex(report.config_hash);

  {
    std::ofstream os(fs::path(config.out_dir) / "config.json");
    os << config.to_json().dump(2) << "\n";
  }

  // variance-time curve across replications
  const VarianceTimeCurve curve =
      variance_time(config.model, config.regime, config.t_grid, config.reps, config.seed, workers);
  {
    std::ofstream os(fs::path(config.out_dir) / "variance_time.csv");
    write_variance_time_csv(os, curve);
  }
  {
    const PowerLawFit fit = fit_power_law(curve);
    MemoryEstimate e;
    e.method = "variance_time";
    e.d_hat = fit.d_hat;
    e.se = fit.slope_se / 2.0;
    e.diagnostics["slope"] = fit.slope;
    e.diagnostics["r2"] = fit.r2;
    e.diagnostics["points"] = static_cast<double>(curve.t_grid.size());
    report.estimates.push_back(e);
  }

  // one long realization for the count-based estimators
  const std::uint64_t count_seed = derive_seed(config.seed, 0xC0117ULL);
  DurationSeries series = detail::simulate_covering(
      config.model, detail::required_span(config.regime, config.horizon), count_seed);
  const EventTimes events = events_from_durations(series, config.regime, derive_seed(count_seed, 0x0e7));
  const auto num_bins = static_cast<std::size_t>(std::floor(config.horizon / config.delta_t));
  const CountSeries counts = bin_counts(events, config.delta_t, num_bins);
  {
    std::ofstream os(fs::path(config.out_dir) / "counts.csv");
    write_count_series_csv(os, counts);
  }

  if (!config.levels.empty()) {
    const std::vector<LevelCorrelation> ladder = aggregated_lag1_corr(counts, config.levels);
    std::ofstream os(fs::path(config.out_dir) / "aggregated_acf.csv");
    os << "level,corr,blocks,skipped\n";
    for (const auto& lc : ladder)
      os << lc.level << "," << format_double(lc.corr) << "," << lc.blocks << ","
         << (lc.skipped ? 1 : 0) << "\n";
    bool usable = false;
    for (const auto& lc : ladder) usable = usable || !lc.skipped;
    if (usable) report.estimates.push_back(aggregated_acf_estimate(ladder));
  }

  if (counts.counts.size() >= 128) {
    std::vector<double> x(counts.counts.begin(), counts.counts.end());
    report.estimates.push_back(log_periodogram_d(x, default_gph_bandwidth(x.size())));
  }

  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  {
    std::ofstream os(fs::path(config.out_dir) / "report.json");
    os << report.to_json(false).dump(2) << "\n";
  }
  {
    std::ofstream os(fs::path(config.out_dir) / "run.log");
    os << "experiment " << report.experiment_id << " wall_clock_s=" << report.wall_clock_seconds
       << " workers=" << resolve_workers(workers) << " version=" << kToolVersion << "\n";
  }
  return report;
}

}  // namespace lrcd
