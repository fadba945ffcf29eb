#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrcd/estimators.hpp"
#include "lrcd/point_process.hpp"

namespace lrcd {

// Shortest round-trippable decimal representation.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = 0.0;
  std::sscanf(buf, "%lg", &back);
  if (back == v) {
    for (int prec = 1; prec <= 16; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      std::sscanf(shorter, "%lg", &back);
      if (back == v) return shorter;
    }
  }
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

inline void write_count_series_csv(std::ostream& os, const CountSeries& counts) {
  os << "# delta_t=" << format_double(counts.delta_t) << ",regime="
     << (counts.regime == SamplingRegime::Kind::PalmP0 ? "palm" : "stationary") << "\n";
  os << "bin_index,count\n";
  for (std::size_t i = 0; i < counts.counts.size(); ++i) os << i << "," << counts.counts[i] << "\n";
}

inline CountSeries parse_count_series_csv(std::istream& is) {
  CountSeries out;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# delta_t=", 0) != 0)
    throw std::runtime_error("count series CSV: missing metadata line");
  {
    const auto comma = line.find(",regime=");
    if (comma == std::string::npos) throw std::runtime_error("count series CSV: missing regime");
    out.delta_t = std::stod(line.substr(10, comma - 10));
    const std::string reg = line.substr(comma + 8);
    out.regime = reg == "palm" ? SamplingRegime::Kind::PalmP0 : SamplingRegime::Kind::StationaryP;
  }
  if (!std::getline(is, line) || line != "bin_index,count")
    throw std::runtime_error("count series CSV: bad header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw std::runtime_error("count series CSV: bad row");
    out.counts.push_back(static_cast<std::uint64_t>(std::stoull(f[1])));
  }
  return out;
}

inline void write_variance_time_csv(std::ostream& os, const VarianceTimeCurve& c) {
  os << "t,var_hat,se,reps\n";
  for (std::size_t i = 0; i < c.t_grid.size(); ++i)
    os << format_double(c.t_grid[i]) << "," << format_double(c.var_hat[i]) << ","
       << format_double(c.se[i]) << "," << c.reps << "\n";
}

inline VarianceTimeCurve parse_variance_time_csv(std::istream& is) {
  VarianceTimeCurve c;
  std::string line;
  if (!std::getline(is, line) || line != "t,var_hat,se,reps")
    throw std::runtime_error("variance-time CSV: bad header");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw std::runtime_error("variance-time CSV: bad row");
    c.t_grid.push_back(std::stod(f[0]));
    c.var_hat.push_back(std::stod(f[1]));
    c.se.push_back(std::stod(f[2]));
    c.reps = static_cast<std::size_t>(std::stoull(f[3]));
  }
  return c;
}

inline void write_durations_csv(std::ostream& os, const DurationSeries& s) {
  os << "index,duration\n";
  for (std::size_t i = 0; i < s.durations.size(); ++i)
    os << i << "," << format_double(s.durations[i]) << "\n";
}

inline std::vector<double> parse_durations_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "index,duration")
    throw std::runtime_error("durations CSV: bad header");
  std::vector<double> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) throw std::runtime_error("durations CSV: bad row");
    out.push_back(std::stod(f[1]));
  }
  return out;
}

}  // namespace lrcd
