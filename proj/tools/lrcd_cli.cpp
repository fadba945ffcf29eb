// Command-line front end: simulate durations, bin counts, estimate memory,
// run the appendix combinatorics tables, the acceptance suite, and full
// config-driven experiments.
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lrcd/csv.hpp"
#include "lrcd/experiment.hpp"
#include "lrcd/ingest.hpp"
#include "lrcd/verify.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw lrcd::UsageError("cannot open config file " + path);
  nlohmann::json j;
  is >> j;
  return j;
}

lrcd::ModelSpec load_model(const std::string& config_path) {
  const nlohmann::json j = load_json(config_path);
  std::vector<std::string> errs;
  const nlohmann::json& mj = j.contains("model") ? j["model"] : j;
  lrcd::ModelSpec model = lrcd::model_from_json(mj, errs);
  if (!errs.empty()) throw lrcd::ConfigError(std::move(errs));
  return model;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"duration/count simulation and memory-propagation toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path = "-", in_path, suite = "all", regime_name = "palm";
  std::string dedupe = "drop";
  std::uint64_t seed = 1;
  std::size_t workers = 0, n = 10000, bins = 0, bandwidth = 0;
  double delta_t = 1.0;
  std::vector<std::size_t> levels;
  double d_param = 0.3, sigma_h_sq = 0.5;

  auto* sim = app.add_subcommand("simulate", "model -> durations CSV");
  sim->add_option("--config", config_path, "model config (JSON)")->required();
  sim->add_option("--n", n, "number of durations");
  sim->add_option("--seed", seed, "RNG seed");
  sim->add_option("--out", out_path, "output CSV path ('-' for stdout)");

  auto* cnt = app.add_subcommand("counts", "durations/ticks -> binned counts CSV");
  auto* cnt_dur = cnt->add_option("--durations", in_path, "durations CSV (from simulate)");
  std::string ticks_path;
  auto* cnt_ticks = cnt->add_option("--ticks", ticks_path, "timestamp file (one per line or id,ts)");
  cnt_dur->excludes(cnt_ticks);
  cnt->add_option("--delta-t", delta_t, "bin width")->required();
  cnt->add_option("--bins", bins, "number of bins (default: as many as the span allows)");
  cnt->add_option("--regime", regime_name, "palm | stationary");
  cnt->add_option("--seed", seed, "origin seed for the stationary regime");
  cnt->add_option("--dedupe", dedupe, "tick policy for zero durations: drop | jitter | error");
  cnt->add_option("--out", out_path, "output CSV path ('-' for stdout)");

  auto* est = app.add_subcommand("estimate", "counts CSV -> memory estimates JSON");
  est->add_option("--counts", in_path, "counts CSV")->required();
  est->add_option("--bandwidth", bandwidth, "GPH bandwidth (default floor(sqrt(n)))");
  est->add_option("--levels", levels, "aggregation levels for the ACF ladder");
  est->add_option("--out", out_path, "output JSON path ('-' for stdout)");

  auto* cum = app.add_subcommand("cumulants", "appendix lab tables -> CSV");
  cum->add_option("--d", d_param, "memory parameter of the Gaussian driver");
  cum->add_option("--sigma-h-sq", sigma_h_sq, "variance of the Gaussian driver");
  std::string out_dir = "cumulant_tables";
  cum->add_option("--out", out_dir, "output directory");

  auto* ver = app.add_subcommand("verify", "acceptance suite");
  ver->add_option("--suite", suite, "all | A1..A10 | I1 | group name");
  ver->add_option("--workers", workers, "worker threads (0 = hardware)");

  auto* run = app.add_subcommand("run", "full experiment from config");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  auto* run_seed = run->add_option("--seed", seed, "override config seed");
  run->add_option("--workers", workers, "worker threads (0 = hardware)");
  std::string run_out;
  run->add_option("--out", run_out, "override output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  auto open_out = [&](std::ofstream& file) -> std::ostream& {
    if (out_path == "-") return std::cout;
    file.open(out_path);
    if (!file) throw lrcd::UsageError("cannot write " + out_path);
    return file;
  };

  try {
    if (sim->parsed()) {
      const lrcd::ModelSpec model = load_model(config_path);
      const lrcd::DurationSeries series = lrcd::simulate(model, n, seed);
      std::ofstream file;
      lrcd::write_durations_csv(open_out(file), series);
      return 0;
    }

    if (cnt->parsed()) {
      lrcd::EventTimes events;
      if (!ticks_path.empty()) {
        lrcd::IngestOptions opts;
        if (dedupe == "drop") opts.policy = lrcd::DedupePolicy::Drop;
        else if (dedupe == "jitter") opts.policy = lrcd::DedupePolicy::Jitter;
        else if (dedupe == "error") opts.policy = lrcd::DedupePolicy::Error;
        else throw lrcd::UsageError("unknown dedupe policy '" + dedupe + "'");
        opts.seed = seed;
        const lrcd::IngestResult res = lrcd::ingest_timestamps(ticks_path, opts);
        if (res.out_of_order > 0)
          std::cerr << "warning: " << res.out_of_order << " out-of-order timestamps sorted\n";
        if (res.zero_durations > 0)
          std::cerr << "warning: " << res.zero_durations << " zero durations handled by policy "
                    << dedupe << "\n";
        std::cerr << "ingested " << res.ticks_read << " ticks, span " << res.span
                  << ", durations in [" << res.min_duration << ", " << res.max_duration << "]\n";
        events = res.events;
      } else if (!in_path.empty()) {
        std::ifstream is(in_path);
        if (!is) throw lrcd::UsageError("cannot open " + in_path);
        lrcd::DurationSeries s;
        s.durations = lrcd::parse_durations_csv(is);
        lrcd::SamplingRegime regime = regime_name == "stationary"
                                          ? lrcd::SamplingRegime::stationary()
                                          : lrcd::SamplingRegime::palm();
        events = lrcd::events_from_durations(s, regime, seed);
      } else {
        throw lrcd::UsageError("counts: give --durations or --ticks");
      }
      std::size_t nb = bins;
      if (nb == 0) {
        const double span = std::max(events.span, events.times.empty() ? 0.0 : events.times.back());
        nb = static_cast<std::size_t>(std::ceil(span / delta_t - 1e-12));
      }
      const lrcd::CountSeries counts = lrcd::bin_counts(events, delta_t, nb);
      std::ofstream file;
      lrcd::write_count_series_csv(open_out(file), counts);
      return 0;
    }

    if (est->parsed()) {
      std::ifstream is(in_path);
      if (!is) throw lrcd::UsageError("cannot open " + in_path);
      const lrcd::CountSeries counts = lrcd::parse_count_series_csv(is);
      std::vector<double> x(counts.counts.begin(), counts.counts.end());
      nlohmann::json out = nlohmann::json::array();
      auto push = [&](const lrcd::MemoryEstimate& e) {
        nlohmann::json je;
        je["method"] = e.method;
        je["d_hat"] = e.d_hat;
        je["se"] = e.se;
        je["diagnostics"] = e.diagnostics;
        out.push_back(je);
      };
      push(lrcd::log_periodogram_d(x, bandwidth == 0 ? lrcd::default_gph_bandwidth(x.size())
                                                     : bandwidth));
      if (!levels.empty())
        push(lrcd::aggregated_acf_estimate(lrcd::aggregated_lag1_corr(counts, levels)));
      std::ofstream file;
      open_out(file) << out.dump(2) << "\n";
      return 0;
    }

    if (cum->parsed()) {
      namespace fs = std::filesystem;
      fs::create_directories(out_dir);
      const auto spec = lrcd::LongMemoryGaussianSpec::with_target_variance(d_param, sigma_h_sq);
      {
        std::ofstream os(fs::path(out_dir) / "partition_tallies.csv");
        os << "m,group,count\n";
        for (int m = 2; m <= 4; ++m) {
          const lrcd::AdmissibleGroups g = lrcd::admissible_partitions(m);
          for (const auto& [L, ps] : g.by_group) os << m << "," << L << "," << ps.size() << "\n";
        }
      }
      {
        std::ofstream os(fs::path(out_dir) / "tree_sums.csv");
        os << "tree_id,vertices,n,s_n\n";
        for (int m = 2; m <= 3; ++m) {
          const auto trees = lrcd::enumerate_trees(m);
          for (std::size_t ti = 0; ti < trees.size(); ++ti)
            for (int k = 6; k <= 12; ++k) {
              const auto nn = static_cast<std::size_t>(1) << k;
              os << m << "." << ti << "," << m << "," << nn << ","
                 << lrcd::format_double(lrcd::tree_sum(spec, trees[ti], nn)) << "\n";
            }
        }
      }
      std::cout << "wrote " << out_dir << "/partition_tallies.csv and tree_sums.csv\n";
      return 0;
    }

    if (ver->parsed()) {
      const std::vector<lrcd::CriterionResult> rs = lrcd::run_acceptance(suite, workers, std::cout);
      return lrcd::all_passed(rs) ? 0 : 1;
    }

    if (run->parsed()) {
      lrcd::ExperimentConfig cfg = lrcd::ExperimentConfig::from_json(load_json(config_path));
      if (!run_seed->empty()) cfg.seed = seed;
      if (!run_out.empty()) cfg.out_dir = run_out;
      const lrcd::ReportRecord rep = lrcd::run_experiment(cfg, workers);
      std::cout << "experiment " << rep.experiment_id << " -> " << cfg.out_dir << " ("
                << rep.estimates.size() << " estimates, " << rep.wall_clock_seconds << "s)\n";
      return 0;
    }
  } catch (const lrcd::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lrcd::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
