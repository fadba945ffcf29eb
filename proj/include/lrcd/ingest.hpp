#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrcd/point_process.hpp"
#include "lrcd/rng.hpp"

namespace lrcd {

enum class DedupePolicy { Drop, Jitter, Error };

struct IngestOptions {
  DedupePolicy policy = DedupePolicy::Drop;
  double jitter_eps = 1e-9;
  std::uint64_t seed = 1;
};

struct IngestResult {
  EventTimes events;        // re-based so the first tick is the origin
  DurationSeries durations;
  std::size_t ticks_read = 0;
  std::size_t out_of_order = 0;  // adjacent inversions before sorting
  std::size_t zero_durations = 0;
  double span = 0.0;
  double min_duration = 0.0;
  double max_duration = 0.0;
};

// One timestamp per line (decimal seconds) or two-column CSV (id, timestamp).
// Unsorted inputs are sorted with a warning count; zero durations are handled
// per policy.
inline IngestResult ingest_timestamps(const std::string& path, const IngestOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ingest_timestamps: cannot open " + path);

  std::vector<double> ts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string field = line;
    const auto comma = line.find(',');
    if (comma != std::string::npos) {
      if (line.find(',', comma + 1) != std::string::npos)
        throw std::runtime_error("ingest_timestamps: line " + std::to_string(lineno) +
                                 ": expected at most two columns");
      field = line.substr(comma + 1);
    }
    try {
      std::size_t pos = 0;
      const double v = std::stod(field, &pos);
      while (pos < field.size() && (field[pos] == ' ' || field[pos] == '\t')) ++pos;
      if (pos != field.size()) throw std::invalid_argument("trailing junk");
      ts.push_back(v);
    } catch (const std::exception&) {
      throw std::runtime_error("ingest_timestamps: line " + std::to_string(lineno) +
                               ": cannot parse timestamp '" + field + "'");
    }
  }
  if (ts.empty()) throw std::runtime_error("ingest_timestamps: " + path + " has no timestamps");

  IngestResult res;
  res.ticks_read = ts.size();
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] < ts[i - 1]) ++res.out_of_order;
  std::stable_sort(ts.begin(), ts.end());

  Rng rng(opts.seed);
  std::vector<double> kept;
  kept.reserve(ts.size());
  kept.push_back(ts[0]);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    double tau = ts[i] - kept.back();
    if (tau > 0.0) {
      kept.push_back(ts[i]);
      continue;
    }
    ++res.zero_durations;
    switch (opts.policy) {
      case DedupePolicy::Drop:
        break;  // duplicate event dropped
      case DedupePolicy::Jitter:
        kept.push_back(kept.back() + opts.jitter_eps * (rng.uniform01() + 1e-6));
        break;
      case DedupePolicy::Error:
        throw std::runtime_error("ingest_timestamps: zero duration at timestamp " +
                                 std::to_string(ts[i]));
    }
  }
  if (kept.size() < 2)
    throw std::runtime_error("ingest_timestamps: fewer than two distinct events");

  const double t0 = kept.front();
  std::vector<double> times;
  times.reserve(kept.size() - 1);
  std::vector<double> durations;
  durations.reserve(kept.size() - 1);
  for (std::size_t i = 1; i < kept.size(); ++i) {
    times.push_back(kept[i] - t0);
    durations.push_back(kept[i] - kept[i - 1]);
  }
  res.span = kept.back() - t0;
  res.min_duration = *std::min_element(durations.begin(), durations.end());
  res.max_duration = *std::max_element(durations.begin(), durations.end());
  res.events = EventTimes{std::move(times), res.span, SamplingRegime::Kind::PalmP0};
  res.durations = DurationSeries{std::move(durations), std::nullopt, opts.seed};
  return res;
}

}  // namespace lrcd
