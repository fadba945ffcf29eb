#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrcd/fft.hpp"
#include "lrcd/parallel.hpp"
#include "lrcd/point_process.hpp"
#include "lrcd/stats.hpp"

namespace lrcd {

struct VarianceTimeCurve {
  std::vector<double> t_grid;
  std::vector<double> var_hat;
  std::vector<double> se;
  std::size_t reps = 0;
};

struct MemoryEstimate {
  std::string method;  // variance_time | aggregated_acf | log_periodogram
  double d_hat = 0.0;
  double se = 0.0;
  std::map<std::string, double> diagnostics;
};

struct PartialSumStats {
  std::vector<std::size_t> n_grid;
  int p = 2;
  std::vector<double> moment_hat;  // E0 |y_n - E0 y_n|^p per n
  std::vector<double> se;
  double trend_slope = 0.0;     // OLS slope of log moment on log n
  double trend_slope_se = 0.0;
  bool bounded = false;         // slope <= 0 within 2 SE
};

namespace detail {

// Enough durations to cover `horizon` with a retry margin. Generation is
// deterministic in the seed even across retries: each attempt regenerates the
// whole series at 1.5x the length.
inline DurationSeries simulate_covering(const ModelSpec& model, double horizon, std::uint64_t seed) {
  const double mu = mean_duration(model);
  auto n0 = static_cast<std::size_t>(std::ceil(1.3 * horizon / mu)) + 16;
  for (int attempt = 0; attempt < 4; ++attempt) {
    DurationSeries s = simulate(model, n0, seed);
    if (s.total() >= horizon) return s;
    n0 = n0 + n0 / 2;
  }
  throw std::runtime_error("simulate_covering: span kept falling short of the horizon");
}

inline double required_span(const SamplingRegime& regime, double max_t) {
  if (regime.kind == SamplingRegime::Kind::PalmP0) return max_t;
  // origin can land at the top of the central window; what remains must cover max_t
  return max_t / (0.5 - regime.origin_window / 2.0 + 1e-9) + max_t * 1e-6;
}

}  // namespace detail

// Var N(t) across independent replications under the given regime; SEs via the
// fourth-moment formula for the variance of a sample variance.
inline VarianceTimeCurve variance_time(const ModelSpec& model, SamplingRegime regime,
                                       const std::vector<double>& t_grid, std::size_t reps,
                                       std::uint64_t seed, std::size_t workers = 1) {
  regime.validate();
  if (reps < 30) throw std::invalid_argument("variance_time: need reps >= 30");
  if (t_grid.empty()) throw std::invalid_argument("variance_time: empty t grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw std::invalid_argument("variance_time: t grid must increase");
  const double max_t = t_grid.back();
  const double span_needed = detail::required_span(regime, max_t);
  const double mu = mean_duration(model);
  // floor of 128 keeps the stationary origin draw well-defined on tiny grids
  const auto n_base = std::max<std::size_t>(
      128, static_cast<std::size_t>(std::ceil(1.3 * span_needed / mu)) + 16);
  DurationSimulator sim(model, n_base);

  std::vector<std::vector<double>> counts = parallel_map<std::vector<double>>(
      reps, workers, [&](std::size_t r) {
        const std::uint64_t rs = derive_seed(seed, r);
        DurationSeries s = sim.draw(rs);
        if (s.total() < span_needed) s = detail::simulate_covering(model, span_needed, rs);
        const EventTimes ev = events_from_durations(s, regime, derive_seed(rs, 0x0e7));
        std::vector<double> row(t_grid.size());
        for (std::size_t i = 0; i < t_grid.size(); ++i)
          row[i] = static_cast<double>(count(ev, t_grid[i]));
        return row;
      });

  VarianceTimeCurve curve;
  curve.t_grid = t_grid;
  curve.reps = reps;
  curve.var_hat.resize(t_grid.size());
  curve.se.resize(t_grid.size());
  std::vector<double> col(reps);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    for (std::size_t r = 0; r < reps; ++r) col[r] = counts[r][i];
    curve.var_hat[i] = sample_variance(col);
    curve.se[i] = sample_variance_se(col);
  }
  return curve;
}

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;  // log-scale intercept
  double r2 = 0.0;
  double d_hat = 0.0;      // (slope - 1) / 2
  double slope_se = 0.0;
};

inline PowerLawFit fit_power_law(const VarianceTimeCurve& curve) {
  if (curve.t_grid.size() < 3) throw std::invalid_argument("fit_power_law: need at least 3 grid points");
  std::vector<double> lx(curve.t_grid.size()), ly(curve.t_grid.size());
  for (std::size_t i = 0; i < curve.t_grid.size(); ++i) {
    if (!(curve.var_hat[i] > 0.0))
      throw std::invalid_argument("fit_power_law: nonpositive variance at grid point " + std::to_string(i));
    lx[i] = std::log(curve.t_grid[i]);
    ly[i] = std::log(curve.var_hat[i]);
  }
  const OlsFit f = ols(lx, ly);
  return PowerLawFit{f.slope, f.intercept, f.r2, (f.slope - 1.0) / 2.0, f.slope_se};
}

struct LevelCorrelation {
  std::size_t level = 1;
  double corr = 0.0;
  std::size_t blocks = 0;
  bool skipped = false;  // fewer than 100 aggregated blocks
};

// Lag-1 sample autocorrelation of non-overlapping block sums, one entry per
// aggregation level. Levels that leave fewer than 100 blocks are skipped.
inline std::vector<LevelCorrelation> aggregated_lag1_corr(const CountSeries& counts,
                                                          const std::vector<std::size_t>& levels) {
  std::vector<LevelCorrelation> out;
  out.reserve(levels.size());
  for (std::size_t level : levels) {
    LevelCorrelation lc;
    lc.level = level;
    const CountSeries agg = aggregate(counts, level);
    lc.blocks = agg.counts.size();
    if (lc.blocks < 100) {
      lc.skipped = true;
      out.push_back(lc);
      continue;
    }
    std::vector<double> x(agg.counts.begin(), agg.counts.end());
    const double c0 = autocovariance(x, 0);
    if (c0 <= 0.0) throw std::runtime_error("aggregated_lag1_corr: zero-variance aggregated series");
    lc.corr = autocovariance(x, 1) / c0;
    out.push_back(lc);
  }
  return out;
}

// d-hat from the largest usable level by inverting 2^{2d} - 1.
inline MemoryEstimate aggregated_acf_estimate(const std::vector<LevelCorrelation>& ladder) {
  const LevelCorrelation* best = nullptr;
  for (const auto& lc : ladder)
    if (!lc.skipped) best = &lc;
  if (!best) throw std::invalid_argument("aggregated_acf_estimate: no usable level");
  MemoryEstimate e;
  e.method = "aggregated_acf";
  const double rho = std::max(best->corr, -0.999);
  e.d_hat = 0.5 * std::log2(1.0 + rho);
  e.se = 1.0 / std::sqrt(static_cast<double>(best->blocks));  // rough, for diagnostics only
  e.diagnostics["level"] = static_cast<double>(best->level);
  e.diagnostics["blocks"] = static_cast<double>(best->blocks);
  e.diagnostics["rho"] = best->corr;
  return e;
}

namespace detail {

// Periodogram ordinates at Fourier frequencies j = 1..m (mean removed).
inline std::vector<double> periodogram_head(const std::vector<double>& x, std::size_t m) {
  const std::size_t n = x.size();
  const double mu = mean(x);
  std::vector<double> out(m);
  if (is_power_of_two(n)) {
    std::vector<std::complex<double>> a(n);
    for (std::size_t t = 0; t < n; ++t) a[t] = x[t] - mu;
    fft_radix2(a, -1);
    for (std::size_t j = 1; j <= m; ++j)
      out[j - 1] = std::norm(a[j]) / (2.0 * 3.14159265358979323846 * static_cast<double>(n));
  } else {
    for (std::size_t j = 1; j <= m; ++j) {
      const double w = 2.0 * 3.14159265358979323846 * static_cast<double>(j) / static_cast<double>(n);
      double re = 0.0, im = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const double c = x[t] - mu;
        re += c * std::cos(w * static_cast<double>(t));
        im -= c * std::sin(w * static_cast<double>(t));
      }
      out[j - 1] = (re * re + im * im) / (2.0 * 3.14159265358979323846 * static_cast<double>(n));
    }
  }
  return out;
}

}  // namespace detail

inline std::size_t default_gph_bandwidth(std::size_t n) {
  return static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
}

// Log-periodogram regression: log I(lambda_j) on -2 log lambda_j, j = 1..m.
// Asymptotic SE pi / sqrt(24 m).
inline MemoryEstimate log_periodogram_d(const std::vector<double>& series, std::size_t bandwidth) {
  const std::size_t n = series.size();
  if (n < 128) throw std::invalid_argument("log_periodogram_d: need series length >= 128");
  if (bandwidth < 1 || bandwidth > n / 2)
    throw std::invalid_argument("log_periodogram_d: bandwidth must be in [1, n/2]");
  const double x0 = series.front();
  bool constant = true;
  for (double v : series)
    if (v != x0) {
      constant = false;
      break;
    }
  if (constant) throw std::invalid_argument("log_periodogram_d: constant series");

  const std::vector<double> I = detail::periodogram_head(series, bandwidth);
  std::vector<double> xs, ys;
  xs.reserve(bandwidth);
  ys.reserve(bandwidth);
  for (std::size_t j = 1; j <= bandwidth; ++j) {
    if (!(I[j - 1] > 0.0)) continue;  // exact zeros carry no information
    const double lam = 2.0 * 3.14159265358979323846 * static_cast<double>(j) / static_cast<double>(n);
    xs.push_back(-2.0 * std::log(lam));
    ys.push_back(std::log(I[j - 1]));
  }
  if (xs.size() < 2) throw std::invalid_argument("log_periodogram_d: too few usable ordinates");
  const OlsFit f = ols(xs, ys);
  MemoryEstimate e;
  e.method = "log_periodogram";
  e.d_hat = f.slope;
  e.se = 3.14159265358979323846 / std::sqrt(24.0 * static_cast<double>(xs.size()));
  e.diagnostics["bandwidth"] = static_cast<double>(bandwidth);
  e.diagnostics["r2"] = f.r2;
  e.diagnostics["n"] = static_cast<double>(n);
  return e;
}

// Normalized partial-sum path Y_n(s) = sum_{k<=floor(ns)} (tau_k - mu) / n^{1/2+d}.
inline std::vector<double> partial_sum_path(const DurationSeries& series, double d,
                                            const std::vector<double>& s_grid,
                                            std::optional<double> mu = std::nullopt) {
  if (!(d >= 0.0 && d < 0.5)) throw std::invalid_argument("partial_sum_path: d must be in [0, 0.5)");
  const std::size_t n = series.size();
  if (n == 0) throw std::invalid_argument("partial_sum_path: empty series");
  double m = 0.0;
  if (mu) {
    m = *mu;
  } else if (series.model) {
    m = mean_duration(*series.model);
  } else {
    for (double v : series.durations) m += v;
    m /= static_cast<double>(n);
  }
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] + (series.durations[k] - m);
  const double norm = std::pow(static_cast<double>(n), 0.5 + d);
  std::vector<double> out(s_grid.size());
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("partial_sum_path: s must be in [0, 1]");
    const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * s));
    out[i] = prefix[std::min(k, n)] / norm;
  }
  return out;
}

// Monte Carlo moments of the standardized partial sum y_n = sum tau / n^{1/2+d},
// centered at the exact E0 y_n = n mu / n^{1/2+d}. The boundedness verdict is
// "no significant increasing trend": OLS slope of log moment on log n at most
// 2 slope-SEs above zero.
inline PartialSumStats rosenthal_moments(const ModelSpec& model, int p,
                                         const std::vector<std::size_t>& n_grid, std::size_t reps,
                                         std::uint64_t seed, std::size_t workers = 1) {
  if (p != 2 && p != 4 && p != 6 && p != 8)
    throw std::invalid_argument("rosenthal_moments: p must be one of {2, 4, 6, 8}");
  if (n_grid.empty()) throw std::invalid_argument("rosenthal_moments: empty n grid");
  if (reps < 100) throw std::invalid_argument("rosenthal_moments: need reps >= 100");
  const double d = memory_d(model);
  const double mu = mean_duration(model);

  PartialSumStats st;
  st.n_grid = n_grid;
  st.p = p;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const std::size_t n = n_grid[gi];
    DurationSimulator sim(model, n);
    const double norm = std::pow(static_cast<double>(n), 0.5 + d);
    const double center = static_cast<double>(n) * mu / norm;
    const std::uint64_t level_seed = derive_seed(seed, 0x1000 + gi);
    std::vector<double> vals = parallel_map<double>(reps, workers, [&](std::size_t r) {
      DurationSeries s = sim.draw(derive_seed(level_seed, r));
      double acc = 0.0;
      for (double t : s.durations) acc += t;
      const double y = acc / norm - center;
      return std::pow(std::abs(y), static_cast<double>(p));
    });
    double m = 0.0;
    for (double v : vals) m += v;
    m /= static_cast<double>(reps);
    double s2 = 0.0;
    for (double v : vals) s2 += (v - m) * (v - m);
    st.moment_hat.push_back(m);
    st.se.push_back(std::sqrt(s2 / static_cast<double>(reps - 1) / static_cast<double>(reps)));
  }

  if (n_grid.size() >= 3) {
    std::vector<double> lx(n_grid.size()), ly(n_grid.size());
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      lx[i] = std::log(static_cast<double>(n_grid[i]));
      ly[i] = std::log(st.moment_hat[i]);
    }
    const OlsFit f = ols(lx, ly);
    st.trend_slope = f.slope;
    // the per-level MC errors are independent, so propagate them through the
    // OLS weights; the residual-based SE is kept as a lower bound
    const double xb = mean(lx);
    double sxx = 0.0;
    for (double x : lx) sxx += (x - xb) * (x - xb);
    double var_prop = 0.0;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      const double w = (lx[i] - xb) / sxx;
      const double se_log = st.se[i] / st.moment_hat[i];
      var_prop += w * w * se_log * se_log;
    }
    st.trend_slope_se = std::max(f.slope_se, std::sqrt(var_prop));
    st.bounded = st.trend_slope <= 2.0 * st.trend_slope_se;
  } else {
    st.bounded = true;
  }
  return st;
}

// Z(t) = (N(t) - t/mu) / t^{1/2+d}.
inline double z_statistic(const EventTimes& events, double t, double mu, double d) {
  if (!(t > 0.0)) throw std::invalid_argument("z_statistic: t must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("z_statistic: mu must be positive");
  const double n = static_cast<double>(count(events, t));
  return (n - t / mu) / std::pow(t, 0.5 + d);
}

}  // namespace lrcd
