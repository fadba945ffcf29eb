#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lrcd/gaussian_lm.hpp"
#include "lrcd/rng.hpp"

namespace lrcd {

enum class InnovationFamily { Exponential, Gamma, Degenerate };

// Nonnegative i.i.d. multiplier distribution. All families here are unit mean
// with every moment finite; Exponential and Gamma have positive density near 0
// (required for ACD), Degenerate does not.
struct InnovationSpec {
  InnovationFamily family = InnovationFamily::Exponential;
  double gamma_shape = 1.0;  // Gamma family only; scale is 1/shape

  void validate() const {
    if (family == InnovationFamily::Gamma && !(gamma_shape > 0.0))
      throw std::invalid_argument("InnovationSpec: gamma shape must be positive");
  }

  // E[eps^j], exact.
  double moment(int j) const {
    if (j < 0) throw std::invalid_argument("InnovationSpec::moment: order must be >= 0");
    switch (family) {
      case InnovationFamily::Exponential: {
        double m = 1.0;
        for (int i = 1; i <= j; ++i) m *= static_cast<double>(i);
        return m;
      }
      case InnovationFamily::Gamma: {
        double m = 1.0;
        for (int i = 0; i < j; ++i) m *= (gamma_shape + static_cast<double>(i)) / gamma_shape;
        return m;
      }
      case InnovationFamily::Degenerate:
        return 1.0;
    }
    throw std::logic_error("InnovationSpec::moment: unknown family");
  }

  double variance() const { return moment(2) - 1.0; }

  double draw(Rng& rng) const {
    switch (family) {
      case InnovationFamily::Exponential:
        return rng.exponential();
      case InnovationFamily::Gamma:
        return rng.gamma(gamma_shape) / gamma_shape;
      case InnovationFamily::Degenerate:
        return 1.0;
    }
    throw std::logic_error("InnovationSpec::draw: unknown family");
  }

  std::string name() const {
    switch (family) {
      case InnovationFamily::Exponential: return "exponential";
      case InnovationFamily::Gamma: return "gamma";
      case InnovationFamily::Degenerate: return "degenerate";
    }
    return "?";
  }
};

// tau_k = e^{h_k} eps_k with h exactly stationary Gaussian, eps independent.
struct LmsdSpec {
  LongMemoryGaussianSpec gaussian;
  InnovationSpec innovation;

  void validate() const {
    gaussian.validate();
    innovation.validate();
  }
  double mean_duration() const { return std::exp(0.5 * variance_h(gaussian)); }
};

// psi_k = omega + alpha tau_{k-1} + beta psi_{k-1}, tau_k = psi_k eps_k.
struct AcdSpec {
  double omega = 0.1;
  double alpha = 0.1;
  double beta = 0.8;
  InnovationSpec innovation;

  void validate() const {
    if (!(omega > 0.0)) throw std::invalid_argument("AcdSpec: omega must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("AcdSpec: alpha must be positive");
    if (!(beta >= 0.0)) throw std::invalid_argument("AcdSpec: beta must be nonnegative");
    if (!(alpha + beta < 1.0)) throw std::invalid_argument("AcdSpec: alpha + beta must be < 1");
    innovation.validate();
    if (innovation.family == InnovationFamily::Degenerate)
      throw std::invalid_argument("AcdSpec: innovation needs positive density near 0");
  }
  double mean_duration() const { return omega / (1.0 - alpha - beta); }
};

// i.i.d. renewal durations: tau_k = scale * eps_k.
struct RenewalSpec {
  InnovationSpec innovation;
  double scale = 1.0;

  void validate() const {
    innovation.validate();
    if (!(scale > 0.0)) throw std::invalid_argument("RenewalSpec: scale must be positive");
  }
  double mean_duration() const { return scale; }
};

using ModelSpec = std::variant<LmsdSpec, AcdSpec, RenewalSpec>;

inline void validate(const ModelSpec& m) {
  std::visit([](const auto& s) { s.validate(); }, m);
}

inline double mean_duration(const ModelSpec& m) {
  return std::visit([](const auto& s) { return s.mean_duration(); }, m);
}

// Memory parameter of the duration process; 0 for ACD and renewal.
inline double memory_d(const ModelSpec& m) {
  if (const auto* l = std::get_if<LmsdSpec>(&m)) return l->gaussian.d;
  return 0.0;
}

inline std::string model_name(const ModelSpec& m) {
  if (std::holds_alternative<LmsdSpec>(m)) return "lmsd";
  if (std::holds_alternative<AcdSpec>(m)) return "acd";
  return "renewal";
}

// A finite P0 (duration-stationary) realization.
struct DurationSeries {
  std::vector<double> durations;
  std::optional<ModelSpec> model;  // empty for ingested data
  std::uint64_t seed = 0;

  std::size_t size() const { return durations.size(); }
  double total() const {
    double s = 0.0;
    for (double d : durations) s += d;
    return s;
  }
};

// Geometric forgetting at rate alpha+beta; the stationary law is approached
// from the unconditional-mean start well within this horizon.
inline std::size_t default_burn_in(const AcdSpec& spec) {
  const std::size_t k = static_cast<std::size_t>(std::ceil(1.0 / (1.0 - spec.alpha - spec.beta)));
  return std::max<std::size_t>(1000, 10 * k);
}

inline DurationSeries simulate_acd(const AcdSpec& spec, std::size_t n, std::uint64_t seed,
                                   std::size_t burn_in) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("simulate_acd: n must be >= 1");
  Rng rng(seed);
  double psi = spec.mean_duration();  // unconditional mean start
  std::vector<double> tau;
  tau.reserve(n);
  for (std::size_t k = 0; k < burn_in + n; ++k) {
    const double eps = spec.innovation.draw(rng);
    const double t = psi * eps;
    if (k >= burn_in) tau.push_back(t);
    psi = spec.omega + spec.alpha * t + spec.beta * psi;
  }
  return DurationSeries{std::move(tau), spec, seed};
}

inline DurationSeries simulate_acd(const AcdSpec& spec, std::size_t n, std::uint64_t seed) {
  return simulate_acd(spec, n, seed, default_burn_in(spec));
}

// Repeated draws of fixed-length series from one model; for LMSD the circulant
// setup is computed once and shared across replications. draw(seed) gives the
// same bytes as the one-shot simulate_* calls.
class DurationSimulator {
 public:
  DurationSimulator(ModelSpec model, std::size_t n) : model_(std::move(model)), n_(n) {
    lrcd::validate(model_);
    if (n == 0) throw std::invalid_argument("DurationSimulator: n must be >= 1");
    if (const auto* l = std::get_if<LmsdSpec>(&model_))
      gauss_ = std::make_shared<CirculantSampler>(l->gaussian, n);
  }

  std::size_t length() const { return n_; }
  const ModelSpec& model() const { return model_; }

  DurationSeries draw(std::uint64_t seed) const {
    if (const auto* l = std::get_if<LmsdSpec>(&model_)) {
      std::vector<double> h = gauss_->sample(derive_seed(seed, 0));
      Rng rng(derive_seed(seed, 1));
      std::vector<double> tau(n_);
      for (std::size_t k = 0; k < n_; ++k) tau[k] = std::exp(h[k]) * l->innovation.draw(rng);
      return DurationSeries{std::move(tau), model_, seed};
    }
    if (const auto* a = std::get_if<AcdSpec>(&model_)) return simulate_acd(*a, n_, seed);
    const auto& r = std::get<RenewalSpec>(model_);
    Rng rng(seed);
    std::vector<double> tau(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      tau[k] = r.scale * r.innovation.draw(rng);
      if (r.innovation.family != InnovationFamily::Degenerate && tau[k] <= 0.0) tau[k] = 1e-300;
    }
    return DurationSeries{std::move(tau), model_, seed};
  }

 private:
  ModelSpec model_;
  std::size_t n_;
  std::shared_ptr<const CirculantSampler> gauss_;
};

inline DurationSeries simulate_lmsd(const LmsdSpec& spec, std::size_t n, std::uint64_t seed) {
  return DurationSimulator(spec, n).draw(seed);
}

inline DurationSeries simulate(const ModelSpec& model, std::size_t n, std::uint64_t seed) {
  return DurationSimulator(model, n).draw(seed);
}

struct ArmaForm {
  double ar = 0.0;         // alpha + beta
  double ma = 0.0;         // beta
  double intercept = 0.0;  // omega
};

// ARMA(1,1) representation of ACD(1,1) durations,
// tau_k = omega + (alpha+beta) tau_{k-1} + eta_k - beta eta_{k-1}.
inline ArmaForm acd_arma_form(const AcdSpec& spec) {
  spec.validate();
  return ArmaForm{spec.alpha + spec.beta, spec.beta, spec.omega};
}

struct LongRunVarianceEstimate {
  double value = 0.0;  // estimate of lim n var(tau-bar) = 2 pi f_tau(0)
  double se = 0.0;
  std::size_t batches = 0;
  std::size_t batch_len = 0;
};

// Batch-means estimate of the long-run variance: batch_len * var(batch means)
// over independent replications, so the SE comes from i.i.d. batch statistics.
inline LongRunVarianceEstimate acd_long_run_variance(const AcdSpec& spec, std::size_t reps,
                                                     std::uint64_t seed, std::size_t batch_len = 4096) {
  spec.validate();
  if (reps < 8) throw std::invalid_argument("acd_long_run_variance: need reps >= 8");
  if (spec.innovation.variance() == 0.0)
    throw std::invalid_argument("acd_long_run_variance: degenerate innovation has zero variance");
  std::vector<double> bm(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    DurationSeries s = simulate_acd(spec, batch_len, derive_seed(seed, r));
    double acc = 0.0;
    for (double t : s.durations) acc += t;
    bm[r] = acc / static_cast<double>(batch_len);
  }
  const double m = [&] {
    double acc = 0.0;
    for (double v : bm) acc += v;
    return acc / static_cast<double>(reps);
  }();
  double s2 = 0.0, s4 = 0.0;
  for (double v : bm) {
    const double d = v - m;
    s2 += d * d;
    s4 += d * d * d * d;
  }
  const double nn = static_cast<double>(reps);
  const double var_bm = s2 / (nn - 1.0);
  const double m4 = s4 / nn;
  const double var_of_var = (m4 - (nn - 3.0) / (nn - 1.0) * var_bm * var_bm) / nn;
  LongRunVarianceEstimate e;
  e.value = static_cast<double>(batch_len) * var_bm;
  e.se = static_cast<double>(batch_len) * (var_of_var > 0.0 ? std::sqrt(var_of_var) : 0.0);
  e.batches = reps;
  e.batch_len = batch_len;
  return e;
}

struct MomentCondition {
  bool holds = false;   // E[(alpha eps + beta)^m] < 1
  double value = 0.0;
};

// Multiplicative-recursion moment test: E[tau^m] is finite iff
// E[(alpha eps + beta)^m] < 1. The expectation expands exactly through the
// binomial theorem and the innovation moments. Accepts the alpha -> 0 boundary
// so the i.i.d. limit can be queried.
inline MomentCondition acd_moment_condition(const AcdSpec& spec, int order) {
  if (!(spec.alpha >= 0.0 && spec.beta >= 0.0))
    throw std::invalid_argument("acd_moment_condition: alpha, beta must be nonnegative");
  spec.innovation.validate();
  if (order < 1) throw std::invalid_argument("acd_moment_condition: order must be >= 1");
  double value = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= order; ++j) {
    value += binom * std::pow(spec.alpha, j) * std::pow(spec.beta, order - j) * spec.innovation.moment(j);
    binom = binom * static_cast<double>(order - j) / static_cast<double>(j + 1);
  }
  return MomentCondition{value < 1.0, value};
}

}  // namespace lrcd
