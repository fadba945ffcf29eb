#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "lrcd/point_process.hpp"
#include "lrcd/stats.hpp"

using Catch::Approx;
using namespace lrcd;

namespace {

DurationSeries plain(std::vector<double> d) { return DurationSeries{std::move(d), std::nullopt, 0}; }

}  // namespace

TEST_CASE("palm events are prefix sums", "[point_process]") {
  const EventTimes ev = events_from_durations(plain({2, 3, 1}), SamplingRegime::palm(), 0);
  REQUIRE(ev.times == std::vector<double>{2, 5, 6});
  REQUIRE(ev.span == Approx(6.0));
}

TEST_CASE("origin shift preserves inter-event gaps", "[point_process]") {
  Rng rng(17);
  std::vector<double> d(500);
  for (auto& v : d) v = rng.exponential() + 0.01;
  const DurationSeries s = plain(d);
  const EventTimes ev = events_from_durations(s, SamplingRegime::stationary(), 9);
  REQUIRE(ev.times.size() >= 2);
  const std::size_t j0 = d.size() - ev.times.size();  // index of the straddling duration
  for (std::size_t i = 1; i < ev.times.size(); ++i)
    REQUIRE(ev.times[i] - ev.times[i - 1] == Approx(d[j0 + i]).margin(1e-9));
  // first retained time is the residual of the straddling duration
  REQUIRE(ev.times[0] > 0.0);
  REQUIRE(ev.times[0] <= d[j0] + 1e-12);
}

TEST_CASE("stationary sampling needs at least 100 events", "[point_process]") {
  REQUIRE_THROWS_AS(events_from_durations(plain({1, 2, 3}), SamplingRegime::stationary(), 1),
                    std::invalid_argument);
}

TEST_CASE("poisson residual time is Exp(1) (KS)", "[point_process]") {
  const std::size_t reps = 10000;
  std::vector<double> t1(reps);
  RenewalSpec model;
  model.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
  DurationSimulator sim(model, 1000);
  for (std::size_t r = 0; r < reps; ++r) {
    const DurationSeries s = sim.draw(derive_seed(31337, r));
    const EventTimes ev = events_from_durations(s, SamplingRegime::stationary(), derive_seed(4, r));
    t1[r] = ev.times.front();
  }
  std::sort(t1.begin(), t1.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < reps; ++i) {
    const double f = 1.0 - std::exp(-t1[i]);
    const double lo = static_cast<double>(i) / reps, hi = static_cast<double>(i + 1) / reps;
    ks = std::max({ks, std::abs(f - lo), std::abs(f - hi)});
  }
  // critical value at p = 0.01 is ~1.63/sqrt(N)
  REQUIRE(ks < 1.63 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("count is the (0,t] event count", "[point_process]") {
  const EventTimes ev{{2, 5, 6}, 6.0, SamplingRegime::Kind::PalmP0};
  REQUIRE(count(ev, 4.0) == 1);
  REQUIRE(count(ev, 6.0) == 3);  // boundary included
  REQUIRE(count(ev, 1.99) == 0);
  REQUIRE_THROWS_AS(count(ev, -1.0), std::invalid_argument);
}

TEST_CASE("count is nondecreasing and right-continuous", "[point_process]") {
  Rng rng(5);
  std::vector<double> d(200);
  for (auto& v : d) v = rng.exponential() + 1e-3;
  const EventTimes ev = events_from_durations(plain(d), SamplingRegime::palm(), 0);
  double t = 0.0;
  std::size_t prev = 0;
  for (int i = 0; i < 400; ++i) {
    t += 0.5 * rng.exponential();
    const std::size_t c = count(ev, t);
    REQUIRE(c >= prev);
    prev = c;
  }
  for (double te : {ev.times[10], ev.times[50]}) {
    REQUIRE(count(ev, te) == count(ev, te + 1e-12));  // right-continuous at events
    REQUIRE(count(ev, te) == count(ev, te - 1e-12) + 1);
  }
}

TEST_CASE("bin_counts matches the worked example", "[point_process]") {
  const EventTimes ev{{0.5, 1.2, 1.4, 2.9}, 2.9, SamplingRegime::Kind::PalmP0};
  const CountSeries c = bin_counts(ev, 1.0, 3);
  REQUIRE(c.counts == std::vector<std::uint64_t>{1, 2, 1});
  // beyond the bin containing the last event: phantom bins are refused
  REQUIRE_THROWS_AS(bin_counts(ev, 1.0, 4), std::invalid_argument);
}

TEST_CASE("bin_counts: interior empty bins are fine and totals telescope", "[point_process]") {
  const EventTimes ev{{0.5, 2.5}, 2.5, SamplingRegime::Kind::PalmP0};
  const CountSeries c = bin_counts(ev, 1.0, 3);
  REQUIRE(c.counts == std::vector<std::uint64_t>{1, 0, 1});

  Rng rng(8);
  std::vector<double> d(300);
  for (auto& v : d) v = 0.2 + rng.exponential();
  const EventTimes evs = events_from_durations(plain(d), SamplingRegime::palm(), 0);
  const CountSeries cs = bin_counts(evs, 3.0, 40);
  std::uint64_t total = 0;
  for (auto v : cs.counts) total += v;
  REQUIRE(total == count(evs, 40 * 3.0));
}

TEST_CASE("aggregate sums blocks and drops the remainder", "[point_process]") {
  CountSeries c;
  c.delta_t = 1.0;
  c.counts = {1, 2, 1, 0};
  std::size_t dropped = 99;
  const CountSeries a = aggregate(c, 2, &dropped);
  REQUIRE(a.counts == std::vector<std::uint64_t>{3, 1});
  REQUIRE(a.delta_t == Approx(2.0));
  REQUIRE(dropped == 0);

  const CountSeries id = aggregate(c, 1);
  REQUIRE(id.counts == c.counts);

  c.counts = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const CountSeries a4 = aggregate(c, 4, &dropped);
  REQUIRE(a4.counts == std::vector<std::uint64_t>{10, 26});
  REQUIRE(dropped == 2);

  // associativity on divisible lengths
  c.counts = {3, 1, 4, 1, 5, 9, 2, 6};
  REQUIRE(aggregate(aggregate(c, 2), 2).counts == aggregate(c, 4).counts);
}

TEST_CASE("aggregate conserves totals exactly", "[point_process]") {
  Rng rng(21);
  CountSeries c;
  c.delta_t = 0.5;
  for (int i = 0; i < 1024; ++i)
    c.counts.push_back(static_cast<std::uint64_t>(rng.next_u64() % 7));
  std::uint64_t before = 0;
  for (auto v : c.counts) before += v;
  const CountSeries a = aggregate(c, 8);
  std::uint64_t after = 0;
  for (auto v : a.counts) after += v;
  REQUIRE(before == after);
}

TEST_CASE("poisson bins under the stationary regime are Poisson", "[point_process]") {
  RenewalSpec model;
  model.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
  const std::size_t bins = 10000;
  DurationSeries s = simulate(model, 3 * bins + 2000, 1234);
  const EventTimes ev = events_from_durations(s, SamplingRegime::stationary(), 77);
  const CountSeries c = bin_counts(ev, 1.0, bins);
  std::vector<double> x(c.counts.begin(), c.counts.end());
  const double m = mean(x);
  const double v = sample_variance(x);
  // variance/mean ratio near 1, tolerance ~3 SE of the ratio
  REQUIRE(std::abs(v / m - 1.0) <= 3.0 * std::sqrt(2.0 / static_cast<double>(bins)));
  REQUIRE(m == Approx(1.0).margin(0.05));
}

TEST_CASE("length_bias_check on degenerate durations returns c on both sides", "[point_process]") {
  RenewalSpec model;
  model.innovation = InnovationSpec{InnovationFamily::Degenerate, 1.0};
  model.scale = 2.5;
  const LengthBiasCheck r = length_bias_check(model, 200, 5, 512);
  REQUIRE(r.stationary_mean == Approx(2.5).margin(1e-12));
  REQUIRE(r.palm_size_biased == Approx(2.5).margin(1e-12));
}

TEST_CASE("length_bias_check on a Poisson stream gives 2 on both sides", "[point_process]") {
  RenewalSpec model;
  model.innovation = InnovationSpec{InnovationFamily::Exponential, 1.0};
  const LengthBiasCheck r = length_bias_check(model, 3000, 6, 1024);
  REQUIRE(std::abs(r.stationary_mean - 2.0) <= 3.5 * r.stationary_se);
  REQUIRE(std::abs(r.palm_size_biased - 2.0) <= 3.5 * r.palm_se + 0.01);
  const double combined = std::sqrt(r.stationary_se * r.stationary_se + r.palm_se * r.palm_se);
  REQUIRE(std::abs(r.stationary_mean - r.palm_size_biased) <= 3.5 * combined);
}

TEST_CASE("events_from_durations validates input", "[point_process]") {
  REQUIRE_THROWS_AS(events_from_durations(plain({}), SamplingRegime::palm(), 0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(events_from_durations(plain({1.0, -2.0}), SamplingRegime::palm(), 0),
                    std::invalid_argument);
  SamplingRegime bad = SamplingRegime::stationary(0.0);
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}
