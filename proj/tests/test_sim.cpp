#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "rachpred/common/errors.hpp"
#include "rachpred/sim/labels.hpp"
#include "rachpred/sim/simulator.hpp"
#include "support.hpp"

using namespace rachpred;
using namespace rachpred::sim;

namespace {

BurstEvent event(double start, double duration) {
  BurstEvent ev;
  ev.start = start;
  ev.duration = duration;
  return ev;
}

}  // namespace

TEST(BetaIntensity, MatchesClosedFormAtInteriorPoint) {
  // Beta(3,4) on T=10: 4^2 6^3 / (10^6 B(3,4)) with B(3,4) = 1/60.
  EXPECT_NEAR(beta_intensity(4.0, event(0.0, 10.0)), 0.20736, 1e-12);
}

TEST(BetaIntensity, VanishesAtEndpointsAndRejectsOutside) {
  const auto ev = event(0.0, 12.0);
  EXPECT_EQ(beta_intensity(0.0, ev), 0.0);
  EXPECT_EQ(beta_intensity(12.0, ev), 0.0);
  EXPECT_THROW(beta_intensity(-0.1, ev), std::domain_error);
  EXPECT_THROW(beta_intensity(12.1, ev), std::domain_error);
}

TEST(BetaIntensity, IntegratesToOne) {
  for (double T : {8.0, 10.0, 15.0}) {
    const auto ev = event(0.0, T);
    const double area = testkit::simpson([&](double t) { return beta_intensity(t, ev); }, 0.0, T, 2000);
    EXPECT_NEAR(area, 1.0, 1e-9) << "T=" << T;
  }
}

TEST(BetaMass, AgreesWithQuadrature) {
  const auto ev = event(0.0, 9.0);
  for (auto [a, b] : {std::pair{0.0, 1.0}, {2.5, 3.1}, {7.0, 9.0}}) {
    const double oracle = testkit::simpson([&](double t) { return beta_intensity(t, ev); }, a, b, 2000);
    EXPECT_NEAR(beta_mass(a, b, ev), oracle, 1e-12);
  }
}

TEST(ExpectedArrivals, SlotAtFourSecondsMatchesDensityTimesWidth) {
  const DeviceGroup g{3000, 0.1, 1.0 / 60.0};
  // Slot 800 covers [4.000, 4.005) s; the density is nearly flat there.
  const double v = expected_arrivals(800, 0.005, event(0.0, 10.0), g);
  EXPECT_NEAR(v, 3000 * 0.20736 * 0.005, 2e-3);
}

TEST(ExpectedArrivals, SumOverEventEqualsGroupSize) {
  const DeviceGroup g{15000, 0.006, 1.0 / 60.0};
  for (auto ev : {event(3.217, 8.0), event(0.0, 15.0), event(11.4, 12.345)}) {
    double total = 0.0;
    for (std::int64_t s = 0; s < 6000; ++s) total += expected_arrivals(s, 0.005, ev, g);
    EXPECT_NEAR(total / 15000.0, 1.0, 1e-6);
  }
}

TEST(Contention, MeanDetectedMatchesSingletonOracle) {
  RachConfig rach;
  auto rng = make_rng(7, "test/contend");
  for (std::size_t m : {10u, 54u, 150u}) {
    double sum = 0.0;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) sum += contend(m, rach, rng).detected;
    const double oracle = m * std::pow(1.0 - 1.0 / 54.0, static_cast<double>(m) - 1.0);
    EXPECT_NEAR(sum / trials / oracle, 1.0, 0.02) << "M=" << m;
  }
}

TEST(Contention, SuccessFlagsMatchDetectedCount) {
  RachConfig rach;
  auto rng = make_rng(3, "test/contend");
  for (std::size_t m : {0u, 1u, 2u, 60u, 500u}) {
    const auto r = contend(m, rach, rng);
    ASSERT_EQ(r.success.size(), m);
    EXPECT_EQ(std::accumulate(r.success.begin(), r.success.end(), 0), r.detected);
    EXPECT_LE(r.detected + r.collided_preambles, rach.preambles);
  }
  EXPECT_EQ(contend(1, rach, rng).detected, 1);
}

TEST(Simulator, ConservesPacketsAndRespectsFieldInvariants) {
  const auto cell = CellConfig::reference();
  const RachConfig rach;
  const auto r = run_simulation(cell, rach, 6000, 11);
  ASSERT_EQ(r.records.size(), 6000u);
  std::int64_t detected = 0, dropped = 0, arrivals = 0;
  for (const auto& rec : r.records) {
    EXPECT_GE(rec.attempts, rec.detected);
    EXPECT_LE(rec.detected + rec.collided, rach.preambles);
    EXPECT_GE(rec.arrivals, 0);
    detected += rec.detected;
    dropped += rec.dropped;
    arrivals += rec.arrivals;
  }
  EXPECT_EQ(arrivals, r.generated);
  EXPECT_EQ(r.generated, detected + dropped + r.backlog_at_end);
}

TEST(Simulator, SameSeedSameTrace) {
  const auto cell = CellConfig::reference();
  const RachConfig rach;
  const auto a = run_simulation(cell, rach, 3000, 5);
  const auto b = run_simulation(cell, rach, 3000, 5);
  const auto c = run_simulation(cell, rach, 3000, 6);
  EXPECT_EQ(a.records, b.records);
  EXPECT_NE(a.records, c.records);
}

TEST(Simulator, ZeroSlotsGivesEmptyTrace) {
  const auto r = run_simulation(CellConfig::reference(), RachConfig{}, 0, 1);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.generated, 0);
}

TEST(Simulator, SingleEventDeliversGroupSizeInExpectation) {
  CellConfig cell;
  cell.groups = {{3000, 0.0, 0.0}};
  RachConfig rach;
  const auto r = run_simulation(cell, rach, 4000, 21, {event(1.0, 10.0)});
  EXPECT_NEAR(static_cast<double>(r.generated), 3000.0, 3.0 * std::sqrt(3000.0));
}

TEST(Simulator, NoTrafficWithoutDevices) {
  CellConfig cell;
  cell.groups = {{0, 0.5, 1.0}};
  const auto r = run_simulation(cell, RachConfig{}, 500, 2);
  for (const auto& rec : r.records) EXPECT_EQ(rec.attempts, 0);
}

TEST(Config, RejectsInvalidValues) {
  auto cell = CellConfig::reference();
  cell.groups[0].event_probability = 1.5;
  EXPECT_THROW(cell.validate(), ConfigError);
  cell = CellConfig::reference();
  cell.alpha = 1.0;
  EXPECT_THROW(cell.validate(), ConfigError);
  RachConfig rach;
  rach.preambles = 0;
  EXPECT_THROW(rach.validate(), ConfigError);
  EXPECT_EQ(CellConfig::reference().total_devices(), 62000);
}

TEST(Events, DurationsWithinBoundsAndSorted) {
  auto rng = make_rng(1, "test/events");
  const auto cell = CellConfig::reference();
  const auto events = draw_events(cell, 1000.0, rng);
  ASSERT_FALSE(events.empty());
  for (std::size_t i = 0; i < events.size(); ++i) {
    EXPECT_GE(events[i].duration, cell.min_event_duration);
    EXPECT_LE(events[i].duration, cell.max_event_duration);
    if (i > 0) {
      EXPECT_LE(events[i - 1].start, events[i].start);
    }
  }
}

namespace {

std::vector<TraceRecord> flat_trace(std::size_t n, std::int32_t attempts, std::int32_t detected) {
  std::vector<TraceRecord> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i].slot = static_cast<std::int64_t>(i);
    t[i].attempts = attempts;
    t[i].detected = detected;
  }
  return t;
}

}  // namespace

TEST(Labels, HeavyCollisionWindowIsCongested) {
  // 8000 collided attempts per second exceeds the 7000 threshold.
  const RachConfig rach;
  auto trace = flat_trace(2000, 44, 4);  // 40 collided per slot = 8000/s
  const auto labels = label_congestion(trace, LabelConfig{}, rach);
  EXPECT_TRUE(std::all_of(labels.congested.begin(), labels.congested.end(), [](auto v) { return v == 1; }));
}

TEST(Labels, FiveSecondsOfExtremeCollisionsLabelInterior) {
  auto trace = flat_trace(3000, 10, 10);
  for (std::size_t i = 1000; i < 2000; ++i) trace[i].attempts = 8010;  // 8000 collided per slot
  const auto labels = label_congestion(trace, LabelConfig{}, RachConfig{});
  for (std::size_t i = 1100; i < 1900; ++i) EXPECT_EQ(labels.congested[i], 1) << i;
}

TEST(Labels, LightTrafficIsNotCongested) {
  const auto labels = label_congestion(flat_trace(2000, 30, 20), LabelConfig{}, RachConfig{});
  for (auto v : labels.congested) EXPECT_EQ(v, 0);
  for (auto v : labels.expected) EXPECT_EQ(v, 0);
}

TEST(Labels, ExpectedLeadsCongestionByPredictionTime) {
  const RachConfig rach;
  LabelConfig cfg;
  cfg.window_seconds = 0.005;  // one-slot window: labels follow the raw series
  auto trace = flat_trace(1000, 10, 10);
  for (std::size_t i = 600; i < 700; ++i) trace[i] = {static_cast<std::int64_t>(i), 0, 60, 0, 54, 0};
  const auto labels = label_congestion(trace, cfg, rach);
  EXPECT_EQ(labels.congested[599], 0);
  EXPECT_EQ(labels.congested[600], 1);
  // t_pred = 1 s = 200 slots: slot s is expected-congested iff a flag lies in (s, s+200].
  EXPECT_EQ(labels.expected[399], 0);
  EXPECT_EQ(labels.expected[400], 1);
  EXPECT_EQ(labels.expected[698], 1);
  EXPECT_EQ(labels.expected[699], 0);
  EXPECT_EQ(labels.expected[999], 0);
}

TEST(Labels, SustainedOverloadRule) {
  LabelConfig cfg;
  cfg.rule = CongestionRule::SustainedOverload;
  auto trace = flat_trace(1000, 10, 10);
  for (std::size_t i = 100; i < 400; ++i) trace[i].attempts = 80;    // 300-slot run
  for (std::size_t i = 600; i < 700; ++i) trace[i].attempts = 80;    // too short
  const auto labels = label_congestion(trace, cfg, RachConfig{});
  EXPECT_EQ(labels.congested[250], 1);
  EXPECT_EQ(labels.congested[650], 0);
  EXPECT_EQ(labels.congested[50], 0);
}

TEST(Labels, EmptyTraceRejected) {
  EXPECT_THROW(label_congestion({}, LabelConfig{}, RachConfig{}), std::invalid_argument);
}
