#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrcd/fft.hpp"
#include "lrcd/rng.hpp"

namespace lrcd {

// Stationary Gaussian volatility driver h_k. For d in (0, 1/2) the moving
// average weights follow the fractional-integration recursion (so the
// autocovariance has a closed gamma-function form); d == 0 switches to
// geometric weights C a^j.
struct LongMemoryGaussianSpec {
  double d = 0.3;           // memory parameter, [0, 1/2)
  double sigma_e = 1.0;     // innovation standard deviation
  double a = 0.0;           // geometric rate, used only when d == 0
  double coeff_scale = 1.0; // multiplies the coefficient sequence

  void validate() const {
    if (!(d >= 0.0 && d < 0.5)) throw std::invalid_argument("LongMemoryGaussianSpec: d must be in [0, 0.5)");
    if (!(sigma_e > 0.0)) throw std::invalid_argument("LongMemoryGaussianSpec: sigma_e must be positive");
    if (!(std::abs(a) < 1.0)) throw std::invalid_argument("LongMemoryGaussianSpec: |a| must be < 1");
    if (coeff_scale == 0.0) throw std::invalid_argument("LongMemoryGaussianSpec: coeff_scale must be nonzero");
  }

  // sigma_e chosen so that Var(h_k) equals sigma_h_sq.
  static LongMemoryGaussianSpec with_target_variance(double d, double sigma_h_sq, double a = 0.0,
                                                     double coeff_scale = 1.0) {
    if (!(sigma_h_sq > 0.0)) throw std::invalid_argument("with_target_variance: sigma_h_sq must be positive");
    LongMemoryGaussianSpec spec;
    spec.d = d;
    spec.a = a;
    spec.coeff_scale = coeff_scale;
    if (d > 0.0) {
      const double g0 = std::exp(std::lgamma(1.0 - 2.0 * d) - 2.0 * std::lgamma(1.0 - d));
      spec.sigma_e = std::sqrt(sigma_h_sq / (g0 * coeff_scale * coeff_scale));
    } else {
      spec.sigma_e = std::sqrt(sigma_h_sq * (1.0 - a * a)) / std::abs(coeff_scale);
    }
    spec.validate();
    return spec;
  }
};

struct GaussianPath {
  std::vector<double> values;
  LongMemoryGaussianSpec spec;
  std::uint64_t seed = 0;
};

// Fractional-integration MA weights: b_0 = 1, b_j = b_{j-1} (j-1+d)/j.
// Asymptotically b_j ~ j^{d-1} / Gamma(d). Valid for d in (0, 1/2) only;
// the d == 0 model uses geometric weights instead.
inline std::vector<double> ma_coefficients(double d, std::size_t count) {
  if (!(d > 0.0 && d < 0.5)) throw std::invalid_argument("ma_coefficients: d must be in (0, 0.5)");
  if (count == 0) throw std::invalid_argument("ma_coefficients: count must be >= 1");
  std::vector<double> b(count);
  b[0] = 1.0;
  for (std::size_t j = 1; j < count; ++j)
    b[j] = b[j - 1] * (static_cast<double>(j) - 1.0 + d) / static_cast<double>(j);
  return b;
}

// Autocovariance r_s of h. d > 0: closed form
//   r_s = C^2 sigma_e^2 Gamma(1-2d) Gamma(s+d) / (Gamma(d) Gamma(1-d) Gamma(s+1-d)),
// which satisfies r_{s+1} = r_s (s+d)/(s+1-d) and r_s ~ K s^{2d-1}.
// d == 0: geometric, r_s = C^2 sigma_e^2 a^|s| / (1-a^2).
inline double autocovariance_h(const LongMemoryGaussianSpec& spec, long lag) {
  spec.validate();
  const double s = static_cast<double>(lag < 0 ? -lag : lag);
  const double c2 = spec.coeff_scale * spec.coeff_scale * spec.sigma_e * spec.sigma_e;
  if (spec.d == 0.0) {
    return c2 * std::pow(spec.a, s) / (1.0 - spec.a * spec.a);
  }
  const double d = spec.d;
  const double lg = std::lgamma(1.0 - 2.0 * d) + std::lgamma(s + d) - std::lgamma(d) -
                    std::lgamma(1.0 - d) - std::lgamma(s + 1.0 - d);
  return c2 * std::exp(lg);
}

inline double variance_h(const LongMemoryGaussianSpec& spec) { return autocovariance_h(spec, 0); }

// Exact stationary sampling by circulant embedding (Dietrich-Newsam). The
// covariance of the first row is extended to an even circulant of power-of-two
// size; one FFT per sample afterwards. Negative eigenvalues beyond a relative
// tolerance of 1e-8 abort; smaller ones are round-off and get clamped to zero.
class CirculantSampler {
 public:
  CirculantSampler(const LongMemoryGaussianSpec& spec, std::size_t n) : spec_(spec), n_(n) {
    spec.validate();
    if (n == 0) throw std::invalid_argument("CirculantSampler: n must be >= 1");
    const std::size_t m = next_power_of_two(n <= 1 ? 2 : 2 * (n - 1));
    const std::size_t half = m / 2;

    std::vector<double> r(half + 1);
    if (spec.d == 0.0) {
      const double c2 = spec.coeff_scale * spec.coeff_scale * spec.sigma_e * spec.sigma_e;
      double as = 1.0;
      for (std::size_t s = 0; s <= half; ++s) {
        r[s] = c2 * as / (1.0 - spec.a * spec.a);
        as *= spec.a;
      }
    } else {
      r[0] = autocovariance_h(spec, 0);
      for (std::size_t s = 0; s < half; ++s)
        r[s + 1] = r[s] * (static_cast<double>(s) + spec.d) / (static_cast<double>(s) + 1.0 - spec.d);
    }

    std::vector<std::complex<double>> c(m);
    for (std::size_t j = 0; j <= half; ++j) c[j] = r[j];
    for (std::size_t j = half + 1; j < m; ++j) c[j] = r[m - j];
    fft_radix2(c, -1);

    double max_eig = 0.0;
    for (const auto& z : c) max_eig = std::max(max_eig, z.real());
    sqrt_eig_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      double lam = c[k].real();
      if (lam < 0.0) {
        if (lam < -1e-8 * max_eig)
          throw std::runtime_error("CirculantSampler: embedding not nonnegative definite, eigenvalue " +
                                   std::to_string(lam));
        lam = 0.0;
      }
      sqrt_eig_[k] = std::sqrt(lam);
    }
  }

  std::size_t length() const { return n_; }
  const LongMemoryGaussianSpec& spec() const { return spec_; }

  // One exact sample; deterministic in the seed. Thread-safe (const, no shared
  // mutable state).
  std::vector<double> sample(std::uint64_t seed) const {
    const std::size_t m = sqrt_eig_.size();
    Rng rng(seed);
    std::vector<std::complex<double>> xi(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double u = rng.normal();
      const double v = rng.normal();
      xi[k] = std::complex<double>(sqrt_eig_[k] * u, sqrt_eig_[k] * v);
    }
    fft_radix2(xi, -1);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<double> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = xi[j].real() * scale;
    return out;
  }

 private:
  LongMemoryGaussianSpec spec_;
  std::size_t n_;
  std::vector<double> sqrt_eig_;
};

inline GaussianPath generate_path(const LongMemoryGaussianSpec& spec, std::size_t n, std::uint64_t seed) {
  CirculantSampler sampler(spec, n);
  return GaussianPath{sampler.sample(seed), spec, seed};
}

}  // namespace lrcd
