#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lrcd {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean: empty input");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

// Unbiased sample variance.
inline double sample_variance(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("sample_variance: need at least 2 points");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(n - 1);
}

// Standard error of the unbiased sample variance via the fourth-moment formula
// Var(s^2) = (m4 - (n-3)/(n-1) s^4) / n.
inline double sample_variance_se(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) throw std::invalid_argument("sample_variance_se: need at least 4 points");
  const double m = mean(x);
  double s2 = 0.0, s4 = 0.0;
  for (double v : x) {
    const double d = v - m;
    s2 += d * d;
    s4 += d * d * d * d;
  }
  const double nn = static_cast<double>(n);
  const double var = s2 / (nn - 1.0);
  const double m4 = s4 / nn;
  const double v = (m4 - (nn - 3.0) / (nn - 1.0) * var * var) / nn;
  return v > 0.0 ? std::sqrt(v) : 0.0;
}

// Sample autocovariance with the biased 1/N normalization and overall mean.
inline double autocovariance(std::span<const double> x, std::size_t lag) {
  const std::size_t n = x.size();
  if (n == 0 || lag >= n) throw std::invalid_argument("autocovariance: lag out of range");
  const double m = mean(x);
  double s = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - m) * (x[t + lag] - m);
  return s / static_cast<double>(n);
}

// Plug-in autocorrelation; guaranteed in [-1, 1].
inline double autocorrelation(std::span<const double> x, std::size_t lag) {
  const double c0 = autocovariance(x, 0);
  if (c0 <= 0.0) throw std::invalid_argument("autocorrelation: zero-variance series");
  return autocovariance(x, lag) / c0;
}

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;
};

inline OlsFit ols(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw std::invalid_argument("ols: need matched inputs, n >= 2");
  const double xb = mean(x), yb = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xb) * (x[i] - xb);
    sxy += (x[i] - xb) * (y[i] - yb);
    syy += (y[i] - yb) * (y[i] - yb);
  }
  if (sxx == 0.0) throw std::invalid_argument("ols: degenerate regressor");
  OlsFit f;
  f.slope = sxy / sxx;
  f.intercept = yb - f.slope * xb;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    ssr += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  f.slope_se = n > 2 ? std::sqrt(ssr / (static_cast<double>(n) - 2.0) / sxx) : 0.0;
  return f;
}

}  // namespace lrcd
