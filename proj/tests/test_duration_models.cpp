#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "lrcd/duration_models.hpp"
#include "lrcd/stats.hpp"

using Catch::Approx;
using namespace lrcd;

namespace {

// Adaptive Simpson quadrature, used as the independent oracle for innovation
// moment integrals.
double simpson(const std::function<double(double)>& f, double a, double b, double eps, int depth) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fhi, double fmid, double whole, int dep) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (dep <= 0 || std::abs(left + right - whole) < 15.0 * eps)
          return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, fmid, flm, left, dep - 1) +
               rec(mid, hi, fmid, fhi, frm, right, dep - 1);
      };
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  const double s = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
  return rec(a, b, fa, fb, fc, s, depth);
}

LmsdSpec lmsd_d03_exp() {
  LmsdSpec s;
  s.gaussian = LongMemoryGaussianSpec::with_target_variance(0.3, 0.5);
  s.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
  return s;
}

AcdSpec acd_ref() {
  AcdSpec s;
  s.omega = 0.1;
  s.alpha = 0.1;
  s.beta = 0.8;
  s.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
  return s;
}

// Exact Var(sum tau) for an LMSD spec with unit-mean innovations.
double lmsd_sum_variance(const LmsdSpec& spec, std::size_t n) {
  const double sh2 = variance_h(spec.gaussian);
  const double eps2 = spec.innovation.moment(2);
  const double var_tau = std::exp(2.0 * sh2) * eps2 - std::exp(sh2);
  double acc = static_cast<double>(n) * var_tau;
  double r = sh2;
  for (std::size_t s = 1; s < n; ++s) {
    r = r * (static_cast<double>(s) - 1.0 + spec.gaussian.d) /
        (static_cast<double>(s) - spec.gaussian.d);
    acc += 2.0 * static_cast<double>(n - s) * std::exp(sh2) * (std::exp(r) - 1.0);
  }
  return acc;
}

}  // namespace

TEST_CASE("innovation moments and samplers agree", "[duration_models]") {
  for (const auto fam : {InnovationFamily::Exponential, InnovationFamily::Gamma,
                         InnovationFamily::Degenerate}) {
    InnovationSpec spec{fam, 2.5};
    REQUIRE(spec.moment(1) == Approx(1.0).margin(1e-14));  // unit mean by construction
    Rng rng(31);
    const std::size_t n = 100000;
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = spec.draw(rng);
      REQUIRE(e >= 0.0);
      m1 += e;
      m2 += e * e;
    }
    m1 /= n;
    m2 /= n;
    REQUIRE(m1 == Approx(1.0).margin(0.02));
    REQUIRE(m2 == Approx(spec.moment(2)).epsilon(0.05));
  }
  // exponential moments are factorials
  InnovationSpec e{InnovationFamily::Exponential, 1.0};
  REQUIRE(e.moment(4) == Approx(24.0).margin(1e-12));
}

TEST_CASE("simulate_lmsd degenerates to tau == 1", "[duration_models]") {
  LmsdSpec spec;
  spec.gaussian.d = 0.3;
  spec.gaussian.sigma_e = 1e-12;
  spec.innovation = InnovationSpec{InnovationFamily::Degenerate, 1.0};
  const DurationSeries s = simulate_lmsd(spec, 200, 9);
  for (double t : s.durations) REQUIRE(t == Approx(1.0).margin(1e-6));
}

TEST_CASE("simulate_lmsd sample mean matches the lognormal identity", "[duration_models]") {
  const LmsdSpec spec = lmsd_d03_exp();
  const std::size_t n = 1 << 20;
  const DurationSeries s = simulate_lmsd(spec, n, 112);
  double m = 0.0;
  for (double t : s.durations) m += t;
  m /= static_cast<double>(n);
  // SE must respect the long memory: Var(sum tau)/n^2 from the exact covariances
  const double se = std::sqrt(lmsd_sum_variance(spec, n)) / static_cast<double>(n);
  REQUIRE(std::abs(m - spec.mean_duration()) <= 3.0 * se);
}

TEST_CASE("log tau autocorrelation matches r_s/(r_0 + var log eps)", "[duration_models]") {
  const LmsdSpec spec = lmsd_d03_exp();
  // var(log eps) for a unit exponential via the quadrature oracle
  const auto log1 = [](double x) { return std::log(x) * std::exp(-x); };
  const auto log2m = [](double x) { return std::log(x) * std::log(x) * std::exp(-x); };
  const double e_log = simpson(log1, 1e-12, 60.0, 1e-12, 40);
  const double var_log = simpson(log2m, 1e-12, 60.0, 1e-12, 40) - e_log * e_log;
  REQUIRE(var_log == Approx(M_PI * M_PI / 6.0).epsilon(1e-3));  // sanity on the oracle itself

  const std::size_t n = 1 << 16, reps = 30, lag = 1;
  const double r0 = variance_h(spec.gaussian);
  const double r1 = autocovariance_h(spec.gaussian, 1);
  const double expected = r1 / (r0 + var_log);

  DurationSimulator sim(spec, n);
  std::vector<double> corr(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const DurationSeries s = sim.draw(derive_seed(2024, r));
    // known-mean centered estimator: E log tau = E h + E log eps = e_log
    double c0 = 0.0, c1 = 0.0;
    std::vector<double> lt(n);
    for (std::size_t k = 0; k < n; ++k) lt[k] = std::log(s.durations[k]) - e_log;
    for (std::size_t k = 0; k < n; ++k) c0 += lt[k] * lt[k];
    for (std::size_t k = 0; k + lag < n; ++k) c1 += lt[k] * lt[k + lag];
    corr[r] = (c1 / static_cast<double>(n - lag)) / (c0 / static_cast<double>(n));
  }
  const double m = mean(corr);
  const double se = std::sqrt(sample_variance(corr) / static_cast<double>(reps));
  REQUIRE(std::abs(m - expected) <= 3.0 * se);
}

TEST_CASE("simulate_acd is stationary around omega/(1-alpha-beta)", "[duration_models]") {
  const AcdSpec spec = acd_ref();
  const std::size_t n = 1 << 20;
  const DurationSeries s = simulate_acd(spec, n, 55);
  double m = 0.0;
  for (double t : s.durations) m += t;
  m /= static_cast<double>(n);
  // long-run variance of the ARMA(1,1) form: sigma_eta^2 (1-beta)^2/(1-alpha-beta)^2
  const double e_psi2 = (spec.omega * spec.omega +
                         2.0 * spec.omega * (spec.alpha + spec.beta) * spec.mean_duration()) /
                        (1.0 - (spec.alpha * spec.alpha * spec.innovation.moment(2) +
                                2.0 * spec.alpha * spec.beta + spec.beta * spec.beta));
  const double sigma_eta2 = e_psi2 * spec.innovation.variance();
  const double lrv = sigma_eta2 * (1.0 - spec.beta) * (1.0 - spec.beta) /
                     ((1.0 - spec.alpha - spec.beta) * (1.0 - spec.alpha - spec.beta));
  const double se = std::sqrt(lrv / static_cast<double>(n));
  REQUIRE(std::abs(m - 1.0) <= 3.5 * se);
}

TEST_CASE("simulate_acd in the alpha -> 0 limit is scaled iid", "[duration_models]") {
  AcdSpec spec;
  spec.omega = 0.7;
  spec.alpha = 1e-9;
  spec.beta = 0.0;
  spec.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
  const DurationSeries s = simulate_acd(spec, 200000, 3);
  double m = 0.0;
  for (double t : s.durations) m += t;
  m /= static_cast<double>(s.size());
  REQUIRE(m == Approx(0.7).epsilon(0.01));
}

TEST_CASE("acd autocorrelation follows the ARMA(1,1) oracle", "[duration_models]") {
  const AcdSpec spec = acd_ref();
  const ArmaForm arma = acd_arma_form(spec);
  const double phi = arma.ar, th = arma.ma;

  // ARMA(1,1) oracle: rho_1 = (1-phi th)(phi-th)/(1+th^2-2 phi th), rho_s = phi rho_{s-1}
  const double rho1 = (1.0 - phi * th) * (phi - th) / (1.0 + th * th - 2.0 * phi * th);

  const std::size_t n = 1 << 20;
  const DurationSeries s = simulate_acd(spec, n, 77);
  // known mean 1.0
  std::vector<double> c(6, 0.0);
  for (std::size_t lag = 0; lag <= 5; ++lag) {
    double acc = 0.0;
    for (std::size_t k = 0; k + lag < n; ++k)
      acc += (s.durations[k] - 1.0) * (s.durations[k + lag] - 1.0);
    c[lag] = acc / static_cast<double>(n - lag);
  }
  REQUIRE(c[1] / c[0] == Approx(rho1).margin(0.01));
  for (std::size_t lag = 2; lag <= 5; ++lag) {
    const double expected = rho1 * std::pow(phi, static_cast<double>(lag - 1));
    REQUIRE(c[lag] / c[0] == Approx(expected).margin(0.01));
    REQUIRE(c[lag] > 0.0);  // positive, geometrically decaying
  }
}

TEST_CASE("acd_arma_form reads off the coefficients", "[duration_models]") {
  AcdSpec spec = acd_ref();
  const ArmaForm f = acd_arma_form(spec);
  REQUIRE(f.ar == Approx(0.9).margin(1e-15));
  REQUIRE(f.ma == Approx(0.8).margin(1e-15));
  REQUIRE(f.intercept == Approx(0.1).margin(1e-15));

  spec.beta = 0.0;
  REQUIRE(acd_arma_form(spec).ma == 0.0);

  spec.alpha = 0.05;
  spec.beta = 0.05;
  spec.omega = 0.2;
  const ArmaForm g = acd_arma_form(spec);
  REQUIRE(g.ar == Approx(0.1).margin(1e-15));
  REQUIRE(g.ma == Approx(0.05).margin(1e-15));
  REQUIRE(g.intercept == Approx(0.2).margin(1e-15));
}

TEST_CASE("acd_long_run_variance: iid limit and batch-size stability", "[duration_models]") {
  AcdSpec tiny;
  tiny.omega = 0.3;
  tiny.alpha = 1e-9;
  tiny.beta = 0.0;
  tiny.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
  const auto iid = acd_long_run_variance(tiny, 512, 21, 512);
  REQUIRE(iid.value == Approx(0.09).epsilon(0.2));  // omega^2 var(eps)

  const AcdSpec spec = acd_ref();
  const auto a = acd_long_run_variance(spec, 4096, 22, 256);
  const auto b = acd_long_run_variance(spec, 2048, 23, 1024);
  const auto c = acd_long_run_variance(spec, 2048, 24, 4096);
  REQUIRE(a.value > 0.0);
  REQUIRE(b.value > 0.0);
  REQUIRE(c.value > 0.0);
  REQUIRE(std::abs(a.value / b.value - 1.0) < 0.10);
  REQUIRE(std::abs(b.value / c.value - 1.0) < 0.10);
}

TEST_CASE("acd_long_run_variance rejects the degenerate innovation", "[duration_models]") {
  AcdSpec spec = acd_ref();
  spec.innovation = InnovationSpec{InnovationFamily::Degenerate, 1.0};
  REQUIRE_THROWS_AS(acd_long_run_variance(spec, 64, 1), std::invalid_argument);
}

TEST_CASE("acd_moment_condition exact and quadrature routes agree", "[duration_models]") {
  AcdSpec frozen;
  frozen.omega = 0.1;
  frozen.alpha = 0.0;  // boundary: eps drops out
  frozen.beta = 0.5;
  frozen.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
  const MomentCondition mc0 = acd_moment_condition(frozen, 8);
  REQUIRE(mc0.value == Approx(std::pow(0.5, 8)).margin(1e-12));
  REQUIRE(mc0.holds);

  const AcdSpec spec = acd_ref();
  REQUIRE(acd_moment_condition(spec, 1).value == Approx(0.9).margin(1e-12));
  REQUIRE(acd_moment_condition(spec, 1).holds);

  const MomentCondition mc8 = acd_moment_condition(spec, 8);
  const auto integrand = [&](double x) {
    return std::pow(spec.alpha * x + spec.beta, 8.0) * std::exp(-x);
  };
  const double quad = simpson(integrand, 0.0, 80.0, 1e-12, 40);
  REQUIRE(mc8.value == Approx(quad).epsilon(1e-6));
  REQUIRE(mc8.holds == (quad < 1.0));
}

TEST_CASE("acd rejects nonstationary parameters", "[duration_models]") {
  AcdSpec spec = acd_ref();
  spec.alpha = 0.3;
  spec.beta = 0.7;
  REQUIRE_THROWS_AS(simulate_acd(spec, 10, 1), std::invalid_argument);
}

TEST_CASE("duration series are strictly positive and deterministic", "[duration_models]") {
  const std::vector<ModelSpec> models = {lmsd_d03_exp(), acd_ref(),
                                         RenewalSpec{InnovationSpec{InnovationFamily::Gamma, 2.0}, 1.5}};
  for (const auto& model : models) {
    for (std::uint64_t seed : {1ull, 99ull}) {
      const DurationSeries a = simulate(model, 5000, seed);
      const DurationSeries b = simulate(model, 5000, seed);
      REQUIRE(a.durations == b.durations);
      for (double t : a.durations) REQUIRE(t > 0.0);
    }
  }
  // DurationSimulator::draw matches the one-shot path
  const LmsdSpec lm = lmsd_d03_exp();
  REQUIRE(DurationSimulator(lm, 1000).draw(5).durations == simulate_lmsd(lm, 1000, 5).durations);
}

TEST_CASE("default burn-in respects the persistence scale", "[duration_models]") {
  REQUIRE(default_burn_in(acd_ref()) == 1000);  // 10*ceil(1/0.1) = 100 -> floor 1000
  AcdSpec slow = acd_ref();
  slow.alpha = 0.005;
  slow.beta = 0.99;  // 1/(1-0.995) = 200
  REQUIRE(default_burn_in(slow) == 2000);
}
