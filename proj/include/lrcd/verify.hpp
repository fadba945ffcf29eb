#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "lrcd/cumulant_lab.hpp"
#include "lrcd/experiment.hpp"

namespace lrcd {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CriterionResult {
  std::string id;
  std::string name;
  double target = 0.0;
  double estimate = 0.0;
  std::string tolerance;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

namespace acceptance {

inline LmsdSpec lmsd_d03() {
  LmsdSpec s;
  s.gaussian = LongMemoryGaussianSpec::with_target_variance(0.3, 0.5);
  s.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
  return s;
}

// The aggregation experiment uses the degenerate multiplier: the limit in the
// criterion is innovation-free, and the exponential instance needs aggregation
// levels beyond 2^8 before its short-memory variance component stops biasing
// the level-256 correlation (pilot: 0.33 vs 0.40 here).
inline LmsdSpec lmsd_d025_degenerate() {
  LmsdSpec s;
  s.gaussian = LongMemoryGaussianSpec::with_target_variance(0.25, 0.5);
  s.innovation = InnovationSpec{InnovationFamily::Degenerate, 1.0};
  return s;
}

inline AcdSpec acd_ref() {
  AcdSpec s;
  s.omega = 0.1;
  s.alpha = 0.1;
  s.beta = 0.8;
  s.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
  return s;
}

inline std::vector<double> dyadic_grid(double unit, int lo, int hi) {
  std::vector<double> g;
  for (int k = lo; k <= hi; ++k) g.push_back(unit * std::pow(2.0, k));
  return g;
}

// ---- A1 / A2a: variance-time slope ----------------------------------------

inline CriterionResult slope_criterion(const std::string& id, const std::string& name,
                                       const ModelSpec& model, double lo, double hi, double target,
                                       std::uint64_t seed, std::size_t workers) {
  CriterionResult r;
  r.id = id;
  r.name = name;
  r.target = target;
  const double mu = mean_duration(model);
  const VarianceTimeCurve curve = variance_time(model, SamplingRegime::stationary(),
                                                dyadic_grid(mu, 4, 11), 2000, seed, workers);
  const PowerLawFit fit = fit_power_law(curve);
  r.estimate = fit.slope;
  std::ostringstream tol;
  tol << "[" << lo << "," << hi << "]";
  r.tolerance = tol.str();
  r.pass = fit.slope >= lo && fit.slope <= hi;
  std::ostringstream d;
  d << "d_hat=" << fit.d_hat << " r2=" << fit.r2;
  r.detail = d.str();
  return r;
}

// ---- GPH on binned counts ---------------------------------------------------

inline double mean_gph_on_counts(const ModelSpec& model, std::size_t bins, std::size_t reps,
                                 std::uint64_t seed, std::size_t workers, double delta_t) {
  const double horizon = static_cast<double>(bins) * delta_t;
  std::vector<double> ds = parallel_map<double>(reps, workers, [&](std::size_t rep) {
    DurationSeries s = detail::simulate_covering(model, horizon, derive_seed(seed, rep));
    const EventTimes ev = events_from_durations(s, SamplingRegime::palm(), 0);
    const CountSeries counts = bin_counts(ev, delta_t, bins);
    std::vector<double> x(counts.counts.begin(), counts.counts.end());
    return log_periodogram_d(x, default_gph_bandwidth(x.size())).d_hat;
  });
  double m = 0.0;
  for (double v : ds) m += v;
  return m / static_cast<double>(reps);
}

// ---- A3: aggregated lag-1 autocorrelation ----------------------------------

inline double ladder_top_corr(const ModelSpec& model, std::size_t bins, std::uint64_t seed,
                              double delta_t) {
  const double horizon = static_cast<double>(bins) * delta_t;
  DurationSeries s = detail::simulate_covering(model, horizon, seed);
  const EventTimes ev = events_from_durations(s, SamplingRegime::palm(), 0);
  const CountSeries counts = bin_counts(ev, delta_t, bins);
  const std::vector<std::size_t> levels = {4, 8, 16, 32, 64, 128, 256};
  const auto ladder = aggregated_lag1_corr(counts, levels);
  return ladder.back().corr;
}

// ---- A6: exact combinatorics ------------------------------------------------

inline CriterionResult combinatorics_criterion() {
  CriterionResult r;
  r.id = "A6";
  r.name = "partition/tree combinatorics (exact)";
  int checks = 0, passed = 0;
  std::ostringstream detail;

  auto expect = [&](bool ok, const char* what) {
    ++checks;
    if (ok) ++passed;
    else detail << " FAIL:" << what;
  };

  // m=2: exactly the three admissible partitions
  {
    const AdmissibleGroups g = admissible_partitions(2);
    expect(g.total() == 3, "m2-count");
    auto canon = [](Partition p) {
      for (auto& b : p.blocks) std::sort(b.begin(), b.end());
      std::sort(p.blocks.begin(), p.blocks.end());
      return p.blocks;
    };
    std::vector<std::vector<std::vector<int>>> got;
    for (const auto& [L, ps] : g.by_group)
      for (const auto& p : ps) got.push_back(canon(p));
    std::sort(got.begin(), got.end());
    // entry ids: row k -> {0:e_k, 1:eps_k}, row s -> {2:e_s, 3:eps_s}
    std::vector<std::vector<std::vector<int>>> want = {
        {{0, 2}, {1, 3}},          // {e_k,e_s},{eps_k,eps_s}
        {{0, 2}, {1}, {3}},        // {e_k,e_s},{eps_k},{eps_s}
        {{0}, {1, 3}, {2}},        // {e_k},{e_s},{eps_k,eps_s}
    };
    for (auto& p : want) std::sort(p.begin(), p.end());
    std::sort(want.begin(), want.end());
    expect(got == want, "m2-partitions");
  }

  // m=3: 15 partitions grouped 5 / 9 / 1
  {
    const AdmissibleGroups g = admissible_partitions(3);
    expect(g.total() == 15, "m3-count");
    auto size_of = [&](int L) {
      const auto it = g.by_group.find(L);
      return it == g.by_group.end() ? std::size_t{0} : it->second.size();
    };
    expect(size_of(1) == 5 && size_of(2) == 9 && size_of(3) == 1, "m3-groups");
  }

  // Cayley counts m^{m-2}
  for (int m = 2; m <= 7; ++m) {
    const auto trees = enumerate_trees(m);
    const auto want = static_cast<std::size_t>(std::llround(std::pow(m, m - 2)));
    expect(trees.size() == want, "cayley");
    bool all_valid = true;
    for (const auto& t : trees) {
      try {
        t.validate();
      } catch (...) {
        all_valid = false;
      }
    }
    expect(all_valid, "tree-invariant");
  }

  // leaf elimination == naive summation
  {
    const LongMemoryGaussianSpec spec = LongMemoryGaussianSpec::with_target_variance(0.3, 0.5);
    bool agree = true;
    for (int m = 2; m <= 3; ++m) {
      for (const auto& tree : enumerate_trees(m)) {
        for (std::size_t n : {16, 64}) {
          const double fast = tree_sum(spec, tree, n);
          const double slow = tree_sum_naive(spec, tree, n);
          if (std::abs(fast - slow) > 1e-10 * std::max(std::abs(fast), std::abs(slow))) agree = false;
        }
      }
    }
    expect(agree, "leaf-elim-vs-naive");
  }

  r.target = static_cast<double>(checks);
  r.estimate = static_cast<double>(passed);
  r.tolerance = "exact";
  r.pass = passed == checks;
  r.detail = detail.str().empty() ? "all exact checks passed" : detail.str();
  return r;
}

// ---- A10: determinism -------------------------------------------------------

inline std::map<std::string, std::string> read_dir_bytes(const std::string& dir) {
  namespace fs = std::filesystem;
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().filename() == "run.log") continue;  // timing; excluded from the contract
    std::ifstream is(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

inline CriterionResult determinism_criterion(std::uint64_t seed) {
  CriterionResult r;
  r.id = "A10";
  r.name = "run_experiment determinism (reruns, workers 1 vs 8)";
  namespace fs = std::filesystem;

  ExperimentConfig cfg;
  cfg.model = lmsd_d03();
  cfg.regime = SamplingRegime::stationary();
  const double mu = mean_duration(cfg.model);
  cfg.t_grid = dyadic_grid(mu, 3, 7);
  cfg.horizon = 128.0 * mu;
  cfg.delta_t = mu;
  cfg.levels = {2, 4};
  cfg.reps = 64;
  cfg.seed = seed;
  cfg.out_dir = (fs::temp_directory_path() / "lrcd_a10").string();

  std::vector<std::map<std::string, std::string>> runs;
  for (const std::size_t workers : {std::size_t{1}, std::size_t{1}, std::size_t{8}}) {
    fs::remove_all(cfg.out_dir);
    run_experiment(cfg, workers);
    runs.push_back(read_dir_bytes(cfg.out_dir));
  }
  fs::remove_all(cfg.out_dir);

  const bool rerun_same = runs[0] == runs[1];
  const bool workers_same = runs[0] == runs[2];
  r.target = 1.0;
  r.estimate = (rerun_same && workers_same) ? 1.0 : 0.0;
  r.tolerance = "byte-identical";
  r.pass = rerun_same && workers_same;
  std::ostringstream d;
  d << "rerun=" << (rerun_same ? "identical" : "DIFFERS")
    << " workers=" << (workers_same ? "identical" : "DIFFERS") << " files=" << runs[0].size();
  r.detail = d.str();
  return r;
}

}  // namespace acceptance

// Runs the selected acceptance criteria, printing one line per criterion.
inline std::vector<CriterionResult> run_acceptance(const std::string& selector, std::size_t workers,
                                                   std::ostream& os) {
  using namespace acceptance;
  const std::uint64_t base_seed = 0x5EED2024ULL;

  std::vector<std::pair<std::string, std::function<CriterionResult()>>> all;

  all.emplace_back("A1", [&] {
    return slope_criterion("A1", "Var N(t) slope, LMSD d=0.3 (target 2d+1)", lmsd_d03(), 1.45, 1.75,
                           1.6, derive_seed(base_seed, 1), workers);
  });

  all.emplace_back("A2", [&] {
    CriterionResult r = slope_criterion("A2", "Var N(t) slope, ACD(1,1) (target 1)", acd_ref(), 0.92,
                                        1.08, 1.0, derive_seed(base_seed, 2), workers);
    const double dhat =
        mean_gph_on_counts(acd_ref(), 1u << 16, 200, derive_seed(base_seed, 22), workers, 1.0);
    const bool gph_ok = std::abs(dhat) <= 0.05;
    r.pass = r.pass && gph_ok;
    std::ostringstream d;
    d << r.detail << " | gph mean d_hat=" << dhat << (gph_ok ? " in" : " OUT of") << " [-0.05,0.05]";
    r.detail = d.str();
    return r;
  });

  all.emplace_back("A3", [&] {
    CriterionResult r;
    r.id = "A3";
    r.name = "aggregated lag-1 ACF at level 2^8";
    const LmsdSpec lm = lmsd_d025_degenerate();
    const double mu = lm.mean_duration();
    const double rho_lm = ladder_top_corr(lm, 1u << 20, derive_seed(base_seed, 3), mu);
    const double rho_acd = ladder_top_corr(acd_ref(), 1u << 20, derive_seed(base_seed, 33), 1.0);
    const double target = std::pow(2.0, 0.5) - 1.0;  // 2^{2d}-1 at d=0.25
    r.target = target;
    r.estimate = rho_lm;
    r.tolerance = "+-0.07 (LMSD), +-0.05 (ACD)";
    const bool lm_ok = std::abs(rho_lm - target) <= 0.07;
    const bool acd_ok = std::abs(rho_acd) <= 0.05;
    r.pass = lm_ok && acd_ok;
    std::ostringstream d;
    d << "lmsd d=0.25 rho=" << rho_lm << " | acd rho=" << rho_acd;
    r.detail = d.str();
    return r;
  });

  all.emplace_back("A4", [&] {
    CriterionResult r;
    r.id = "A4";
    r.name = "GPH mean d_hat on LMSD d=0.3 counts";
    const LmsdSpec lm = lmsd_d03();
    r.estimate = mean_gph_on_counts(lm, 1u << 16, 200, derive_seed(base_seed, 4), workers,
                                    lm.mean_duration());
    r.target = 0.3;
    r.tolerance = "+-0.05";
    r.pass = std::abs(r.estimate - r.target) <= 0.05;
    return r;
  });

  all.emplace_back("A5", [&] {
    CriterionResult r;
    r.id = "A5";
    r.name = "Rosenthal p=4 moments bounded in n";
    const std::vector<std::size_t> n_grid = {256, 512, 1024, 2048, 4096, 8192, 16384};
    const PartialSumStats st =
        rosenthal_moments(lmsd_d03(), 4, n_grid, 5000, derive_seed(base_seed, 5), workers);
    double lo = st.moment_hat[0], hi = st.moment_hat[0], se_ratio = 0.0;
    for (std::size_t i = 0; i < st.moment_hat.size(); ++i) {
      lo = std::min(lo, st.moment_hat[i]);
      hi = std::max(hi, st.moment_hat[i]);
      se_ratio = std::max(se_ratio, st.se[i] / st.moment_hat[i]);
    }
    r.target = 0.0;
    r.estimate = st.trend_slope;
    r.tolerance = "slope <= 2 SE; max/min <= 3";
    r.pass = st.bounded && (hi / lo <= 3.0) && se_ratio < 0.2;
    std::ostringstream d;
    d << "slope=" << st.trend_slope << " (se " << st.trend_slope_se << ") max/min=" << hi / lo
      << " worst se/est=" << se_ratio;
    r.detail = d.str();
    return r;
  });

  all.emplace_back("A6", [&] { return combinatorics_criterion(); });

  all.emplace_back("A7", [&] {
    CriterionResult r;
    r.id = "A7";
    r.name = "lognormal pair cumulant vs k-statistics";
    const LongMemoryGaussianSpec spec = LongMemoryGaussianSpec::with_target_variance(0.3, 0.5);
    const std::size_t draws = 1000000;
    CirculantSampler sampler(spec, 11);
    std::vector<double> x0(draws), x1(draws), x10(draws);
    const std::uint64_t seed = derive_seed(base_seed, 7);
    parallel_map<int>(draws, workers, [&](std::size_t i) {
      const std::vector<double> h = sampler.sample(derive_seed(seed, i));
      x0[i] = std::exp(h[0]);
      x1[i] = std::exp(h[1]);
      x10[i] = std::exp(h[10]);
      return 0;
    });
    double worst = 0.0;
    bool ok = true;
    std::ostringstream d;
    const std::vector<std::pair<long, const std::vector<double>*>> lags = {
        {0, nullptr}, {1, &x1}, {10, &x10}};
    for (const auto& [lag, col] : lags) {
      CumulantEstimate est = col == nullptr
                                 ? mc_cumulant({x0}, 2)
                                 : mc_cumulant(std::vector<std::vector<double>>{x0, *col}, 2);
      const double truth = lognormal_pair_cumulant(spec, lag);
      const double z = std::abs(est.value - truth) / est.se;
      worst = std::max(worst, z);
      ok = ok && z <= 3.0;
      d << "lag" << lag << ": mc=" << est.value << " exact=" << truth << " z=" << z << "  ";
    }
    r.target = 0.0;
    r.estimate = worst;
    r.tolerance = "|z| <= 3";
    r.pass = ok;
    r.detail = d.str();
    return r;
  });

  all.emplace_back("A8", [&] {
    CriterionResult r;
    r.id = "A8";
    r.name = "tree-sum growth exponents 2d(M-1)+1";
    const LongMemoryGaussianSpec spec = LongMemoryGaussianSpec::with_target_variance(0.3, 0.5);
    std::vector<double> ln, ls;
    auto slope_for = [&](const TreeGraph& tree) {
      ln.clear();
      ls.clear();
      for (int k = 6; k <= 12; ++k) {
        const auto n = static_cast<std::size_t>(1) << k;
        ln.push_back(std::log(static_cast<double>(n)));
        ls.push_back(std::log(tree_sum(spec, tree, n)));
      }
      return ols(ln, ls).slope;
    };
    TreeGraph edge;
    edge.vertices = 2;
    edge.edges = {{0, 1}};
    TreeGraph path_mid;
    path_mid.vertices = 3;
    path_mid.edges = {{0, 1}, {1, 2}};
    TreeGraph path_end;
    path_end.vertices = 3;
    path_end.edges = {{1, 0}, {0, 2}};
    const double s2 = slope_for(edge);
    const double s3a = slope_for(path_mid);
    const double s3b = slope_for(path_end);
    const bool ok2 = std::abs(s2 - 1.6) <= 0.15;
    const bool ok3 = std::abs(s3a - 2.2) <= 0.15 && std::abs(s3b - 2.2) <= 0.15;
    r.target = 1.6;
    r.estimate = s2;
    r.tolerance = "+-0.15 (M=2 vs 1.6, M=3 vs 2.2)";
    r.pass = ok2 && ok3;
    std::ostringstream d;
    d << "M=2 slope=" << s2 << " | M=3 slopes=" << s3a << ", " << s3b;
    r.detail = d.str();
    return r;
  });

  all.emplace_back("A9", [&] {
    CriterionResult r;
    r.id = "A9";
    r.name = "Palm length-bias identity E[tau_1] = lambda E0[tau_1^2]";
    RenewalSpec poisson;
    poisson.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
    const LengthBiasCheck pois =
        length_bias_check(poisson, 100000, derive_seed(base_seed, 9), 512);
    const bool pois_ok = std::abs(pois.stationary_mean - 2.0) <= 0.05 &&
                         std::abs(pois.palm_size_biased - 2.0) <= 0.05;
    const LengthBiasCheck lm =
        length_bias_check(lmsd_d03(), 4000, derive_seed(base_seed, 99), 2048);
    const double gap = std::abs(lm.stationary_mean - lm.palm_size_biased);
    const double combined = std::sqrt(lm.stationary_se * lm.stationary_se + lm.palm_se * lm.palm_se);
    const bool lm_ok = gap <= 3.0 * combined;
    r.target = 2.0;
    r.estimate = pois.stationary_mean;
    r.tolerance = "+-0.05 (Poisson); 3 combined SE (LMSD)";
    r.pass = pois_ok && lm_ok;
    std::ostringstream d;
    d << "poisson sides=" << pois.stationary_mean << "/" << pois.palm_size_biased
      << " | lmsd sides=" << lm.stationary_mean << "/" << lm.palm_size_biased << " gap/se="
      << (combined > 0 ? gap / combined : 0.0);
    r.detail = d.str();
    return r;
  });

  all.emplace_back("A10", [&] { return determinism_criterion(derive_seed(base_seed, 10)); });

  // Spec invariant: the variance-time and aggregated-ACF routes to d agree
  // within 0.1 for the shipped model specs.
  all.emplace_back("I1", [&] {
    CriterionResult r;
    r.id = "I1";
    r.name = "estimator agreement |d_vt - d_acf| (shipped specs)";
    double worst = 0.0;
    std::ostringstream d;
    const std::vector<std::pair<std::string, ModelSpec>> shipped = {
        {"lmsd d=0.3", lmsd_d03()}, {"lmsd d=0.25", lmsd_d025_degenerate()}, {"acd", acd_ref()}};
    std::uint64_t k = 0;
    for (const auto& [label, model] : shipped) {
      const double mu = mean_duration(model);
      const VarianceTimeCurve curve =
          variance_time(model, SamplingRegime::stationary(), dyadic_grid(mu, 4, 11), 800,
                        derive_seed(base_seed, 100 + k), workers);
      const double d_vt = fit_power_law(curve).d_hat;
      const double horizon = std::pow(2.0, 19) * mu;
      DurationSeries s =
          detail::simulate_covering(model, horizon, derive_seed(base_seed, 200 + k));
      const EventTimes ev = events_from_durations(s, SamplingRegime::palm(), 0);
      const CountSeries counts = bin_counts(ev, mu, 1u << 19);
      const auto ladder = aggregated_lag1_corr(counts, {4, 8, 16, 32, 64, 128});
      const double d_acf = aggregated_acf_estimate(ladder).d_hat;
      const double gap = std::abs(d_vt - d_acf);
      worst = std::max(worst, gap);
      d << label << ": vt=" << d_vt << " acf=" << d_acf << "  ";
      ++k;
    }
    r.target = 0.0;
    r.estimate = worst;
    r.tolerance = "<= 0.1";
    r.pass = worst <= 0.1;
    r.detail = d.str();
    return r;
  });

  static const std::map<std::string, std::vector<std::string>> groups = {
      {"all", {"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "I1"}},
      {"variance-time", {"A1", "A2"}},
      {"aggregation", {"A3"}},
      {"spectral", {"A4"}},
      {"rosenthal", {"A5"}},
      {"combinatorics", {"A6"}},
      {"cumulants", {"A7"}},
      {"trees", {"A8"}},
      {"palm", {"A9"}},
      {"engineering", {"A10"}},
      {"agreement", {"I1"}},
  };

  std::vector<std::string> wanted;
  if (const auto it = groups.find(selector); it != groups.end()) {
    wanted = it->second;
  } else {
    bool is_single = false;
    for (const auto& [id, fn] : all)
      if (id == selector) is_single = true;
    if (!is_single) throw UsageError("unknown acceptance selector '" + selector + "'");
    wanted = {selector};
  }

  std::vector<CriterionResult> results;
  for (const auto& [id, fn] : all) {
    if (std::find(wanted.begin(), wanted.end(), id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r = fn();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(r);
    char line[512];
    std::snprintf(line, sizeof(line), "%-4s %-46s target %-9.5g est %-10.5g tol %-28s %s (%.1fs)",
                  r.id.c_str(), r.name.c_str(), r.target, r.estimate, r.tolerance.c_str(),
                  r.pass ? "PASS" : "FAIL", r.seconds);
    os << line << "\n";
    if (!r.detail.empty()) os << "     " << r.detail << "\n";
  }
  return results;
}

inline bool all_passed(const std::vector<CriterionResult>& rs) {
  for (const auto& r : rs)
    if (!r.pass) return false;
  return true;
}

}  // namespace lrcd
