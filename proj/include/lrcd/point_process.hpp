#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lrcd/duration_models.hpp"
#include "lrcd/rng.hpp"

namespace lrcd {

// Observation regime. PalmP0 puts the origin at an event (durations are
// stationary); StationaryP drops the origin uniformly inside the central
// window of the simulated span, which makes the counts asymptotically
// stationary. There is no single measure under which both are stationary, so
// the tag travels with the data.
struct SamplingRegime {
  enum class Kind { PalmP0, StationaryP };
  Kind kind = Kind::PalmP0;
  double origin_window = 1.0 / 3.0;  // central fraction of the span for the origin draw

  static SamplingRegime palm() { return SamplingRegime{Kind::PalmP0, 1.0 / 3.0}; }
  static SamplingRegime stationary(double window = 1.0 / 3.0) {
    return SamplingRegime{Kind::StationaryP, window};
  }
  void validate() const {
    if (!(origin_window > 0.0 && origin_window <= 1.0))
      throw std::invalid_argument("SamplingRegime: origin window must be in (0, 1]");
  }
  const char* name() const { return kind == Kind::PalmP0 ? "palm" : "stationary"; }
};

// Event epochs 0 < t_1 < t_2 < ... . span is the observed horizon: the
// simulated time remaining after the origin, not just the last event.
struct EventTimes {
  std::vector<double> times;
  double span = 0.0;
  SamplingRegime::Kind regime = SamplingRegime::Kind::PalmP0;
};

// Counts per Delta-t bin, counts[i] = N(i dt) - N((i-1) dt).
struct CountSeries {
  double delta_t = 0.0;
  std::vector<std::uint64_t> counts;
  SamplingRegime::Kind regime = SamplingRegime::Kind::PalmP0;
};

// PalmP0: prefix sums of the durations. StationaryP: an origin is drawn
// uniformly in the central window of the total span and events re-indexed to
// it, so the first retained time is the residual of the straddling duration.
inline EventTimes events_from_durations(const DurationSeries& series, SamplingRegime regime,
                                        std::uint64_t seed) {
  regime.validate();
  const std::size_t n = series.size();
  if (n == 0) throw std::invalid_argument("events_from_durations: empty series");

  std::vector<double> prefix(n);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(series.durations[k] > 0.0))
      throw std::invalid_argument("events_from_durations: durations must be positive");
    acc += series.durations[k];
    prefix[k] = acc;
  }

  if (regime.kind == SamplingRegime::Kind::PalmP0)
    return EventTimes{std::move(prefix), acc, SamplingRegime::Kind::PalmP0};

  if (n < 100)
    throw std::invalid_argument("events_from_durations: StationaryP needs at least 100 events");
  Rng rng(seed);
  const double w = regime.origin_window;
  const double origin = acc * ((1.0 - w) / 2.0 + w * rng.uniform01());
  const auto first = std::upper_bound(prefix.begin(), prefix.end(), origin);
  if (first == prefix.end())
    throw std::runtime_error("events_from_durations: origin fell beyond the last event");
  std::vector<double> shifted;
  shifted.reserve(static_cast<std::size_t>(prefix.end() - first));
  for (auto it = first; it != prefix.end(); ++it) shifted.push_back(*it - origin);
  return EventTimes{std::move(shifted), acc - origin, SamplingRegime::Kind::StationaryP};
}

// N(t): events in (0, t], boundary included. O(log n).
inline std::size_t count(const EventTimes& events, double t) {
  if (t < 0.0) throw std::invalid_argument("count: t must be nonnegative");
  return static_cast<std::size_t>(
      std::upper_bound(events.times.begin(), events.times.end(), t) - events.times.begin());
}

// Bins may extend through the one containing the last event (ceil(span/dt));
// asking beyond that would fabricate empty bins the simulation never observed.
inline CountSeries bin_counts(const EventTimes& events, double delta_t, std::size_t num_bins) {
  if (!(delta_t > 0.0)) throw std::invalid_argument("bin_counts: delta_t must be positive");
  if (num_bins == 0) throw std::invalid_argument("bin_counts: need at least one bin");
  const double span = std::max(events.span, events.times.empty() ? 0.0 : events.times.back());
  const auto allowed = static_cast<std::size_t>(std::ceil(span / delta_t - 1e-12));
  if (num_bins > allowed)
    throw std::invalid_argument("bin_counts: requested horizon exceeds simulated span");
  CountSeries out;
  out.delta_t = delta_t;
  out.regime = events.regime;
  out.counts.resize(num_bins, 0);
  std::size_t prev = 0;
  for (std::size_t i = 1; i <= num_bins; ++i) {
    const std::size_t c = count(events, static_cast<double>(i) * delta_t);
    out.counts[i - 1] = static_cast<std::uint64_t>(c - prev);
    prev = c;
  }
  return out;
}

// Non-overlapping block sums; the trailing remainder is dropped and reported
// through `dropped` (padding would bias aggregated correlations).
inline CountSeries aggregate(const CountSeries& counts, std::size_t factor,
                             std::size_t* dropped = nullptr) {
  if (factor == 0) throw std::invalid_argument("aggregate: factor must be >= 1");
  const std::size_t blocks = counts.counts.size() / factor;
  if (dropped) *dropped = counts.counts.size() - blocks * factor;
  CountSeries out;
  out.delta_t = counts.delta_t * static_cast<double>(factor);
  out.regime = counts.regime;
  out.counts.resize(blocks, 0);
  for (std::size_t b = 0; b < blocks; ++b) {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < factor; ++j) s += counts.counts[b * factor + j];
    out.counts[b] = s;
  }
  return out;
}

struct LengthBiasCheck {
  double stationary_mean = 0.0;  // E_P[tau_1], origin-straddling duration
  double stationary_se = 0.0;
  double palm_size_biased = 0.0;  // lambda E0[tau_1^2]
  double palm_se = 0.0;
};

// Two-sided Monte Carlo check of the Palm identity E[h(tau_1)] = lambda
// E0[tau_1 h(tau_1)] with h(x) = x. Left side: the full duration straddling a
// uniform origin. Right side: the ratio E0[tau^2]/E0[tau] per independent P0
// series, averaged across replications.
inline LengthBiasCheck length_bias_check(const ModelSpec& model, std::size_t reps, std::uint64_t seed,
                                         std::size_t series_len = 2048) {
  if (reps < 100) throw std::invalid_argument("length_bias_check: need reps >= 100");
  DurationSimulator sim(model, series_len);

  std::vector<double> straddle(reps), ratio(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    DurationSeries s = sim.draw(derive_seed(seed, 2 * r));
    // straddling duration at a uniform origin in the central third
    double total = 0.0;
    for (double d : s.durations) total += d;
    Rng rng(derive_seed(seed, 2 * r + 1));
    const double origin = total * (1.0 / 3.0 + rng.uniform01() / 3.0);
    double acc = 0.0;
    double hit = s.durations.back();
    for (double d : s.durations) {
      acc += d;
      if (acc > origin) {
        hit = d;
        break;
      }
    }
    straddle[r] = hit;
    double m1 = 0.0, m2 = 0.0;
    for (double d : s.durations) {
      m1 += d;
      m2 += d * d;
    }
    ratio[r] = m2 / m1;  // lambda-hat * E0-hat[tau^2]
  }

  auto mean_se = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s2 = 0.0;
    for (double v : x) s2 += (v - m) * (v - m);
    const double se = std::sqrt(s2 / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
    return std::pair<double, double>(m, se);
  };
  const auto [sm, sse] = mean_se(straddle);
  const auto [pm, pse] = mean_se(ratio);
  return LengthBiasCheck{sm, sse, pm, pse};
}

}  // namespace lrcd
