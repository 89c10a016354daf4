#include <gtest/gtest.h>

#include "rachpred/analysis/cost.hpp"
#include "rachpred/common/errors.hpp"
#include "support.hpp"

using namespace rachpred;
using namespace rachpred::analysis;

namespace {

ArchDescriptor reference(Family family) {
  ArchDescriptor a;
  a.family = family;
  a.input_size = 2;
  a.hidden = {2500, 2500};
  a.dense = {{2500, 2500}, {5000, 2}};
  return a;
}

predict::StreamingConfig geometry(int l_f, int l_p, int l_buff) {
  predict::StreamingConfig c;
  c.l_f = l_f;
  c.l_p = l_p;
  c.l_buff = l_buff;
  c.allow_equal_horizon = true;
  return c;
}

}  // namespace

TEST(ParamCount, ReferenceLstmAndGruTotals) {
  EXPECT_EQ(param_count(reference(Family::Lstm)), 81322502);
  EXPECT_EQ(param_count(reference(Family::Gru)), 62557502);
}

TEST(ParamCount, SingleUnitLstm) {
  ArchDescriptor a;
  a.input_size = 1;
  a.hidden = {1};
  EXPECT_EQ(param_count(a), 16);
}

TEST(ParamCount, DescribeMatchesBuiltModel) {
  for (auto kind : {nn::CellKind::Lstm, nn::CellKind::Gru}) {
    for (Eigen::Index h : {3, 8, 17}) {
      const auto arch = nn::Architecture::desk(kind, h);
      const auto params = nn::ModelParams<double>::zeros(arch);
      EXPECT_EQ(param_count(describe(arch)), nn::parameter_count(params));
    }
  }
}

TEST(ParamCount, Cnn1dSyntheticDescriptor) {
  ArchDescriptor a;
  a.family = Family::Cnn1d;
  a.input_size = 2;
  a.window = 64;
  a.conv = {{8, 3}, {16, 5}};
  a.dense = {{256, 32}, {32, 2}};
  // 8(2*3+1) + 16(8*5+1) + 32*257 + 2*33
  EXPECT_EQ(param_count(a), 56 + 656 + 8224 + 66);
}

TEST(Flops, ToyLstmHandValue) {
  ArchDescriptor a;
  a.input_size = 2;
  a.hidden = {4};
  a.dense = {{4, 2}};
  const auto c = geometry(1, 1, 0);
  EXPECT_EQ(flops_per_step(a, c, predict::Driver::Flsp), Rational(648));
  EXPECT_EQ(flops_per_step(a, c, predict::Driver::Rolling), Rational(324));
}

TEST(Flops, GruUsesSixAndTwentyTwo) {
  ArchDescriptor a;
  a.family = Family::Gru;
  a.input_size = 2;
  a.hidden = {4};
  a.dense = {{4, 2}};
  EXPECT_EQ(flops_per_evaluation(a), 6 * 4 * 6 + 22 * 4 + 16);
}

TEST(Flops, Cnn1dHalvingAndLeadingFactor) {
  ArchDescriptor a;
  a.family = Family::Cnn1d;
  a.input_size = 2;
  a.window = 100;
  a.conv = {{4, 3}};
  a.dense = {{200, 10}, {10, 2}};
  const auto c = geometry(10, 20, 40);
  // (100/2 * 4 * (2*2*3 + 1/2) + (2*10*200 + 10) + (2*2*10 + 2) - 2) / 10
  const Rational expected = (Rational(50 * 4) * Rational(25, 2) + 4010 + 42 - 2) / Count{10};
  EXPECT_EQ(flops_per_step(a, c, predict::Driver::Rolling), expected);
  EXPECT_THROW(flops_per_step(a, c, predict::Driver::Flsp), ConfigError);
}

TEST(Flops, RatioMatchesComplexityLawOnManyGeometries) {
  const auto arch = reference(Family::Lstm);
  const int geoms[][3] = {{100, 200, 200}, {50, 100, 400}, {100, 400, 100}, {10, 30, 1000}, {25, 50, 25}, {1, 2, 3}};
  for (const auto& g : geoms) {
    const auto c = geometry(g[0], g[1], g[2]);
    const auto r = cost_report(arch, c);
    EXPECT_EQ(r.ratio, complexity_ratio(c));
    EXPECT_EQ(r.ratio, Rational(g[0] + g[1], g[2] + g[1]));
    if (g[0] <= g[2]) {
      EXPECT_LE(r.flops_flsp, r.flops_rolling);
    }
    EXPECT_EQ(r.flops_flsp == r.flops_rolling, g[0] == g[2]);
  }
  EXPECT_EQ(complexity_ratio(geometry(100, 200, 200)), Rational(3, 4));
}

TEST(Empirical, CountersMatchLeadingFactors) {
  const auto m = testkit::toy_model(nn::CellKind::Lstm, 1, true);
  const auto s = testkit::synthetic_stream(1500, 2);
  auto c = geometry(100, 200, 200);
  c.l_hist = 500;
  const auto desc = describe(m.params.architecture());
  for (auto driver : {predict::Driver::Flsp, predict::Driver::Rolling}) {
    const auto run = predict::run_stream(m, s, c, driver);
    const auto e = empirical_cost(run, desc);
    EXPECT_EQ(e.steps, 10);
    EXPECT_EQ(e.warmup_evaluations, 500);
    EXPECT_EQ(e.flops_per_slot, flops_per_step(desc, c, driver));
  }
}

TEST(Descriptor, JsonRoundTripAndValidation) {
  const auto a = reference(Family::Gru);
  const auto b = arch_from_json(to_json(a));
  EXPECT_EQ(param_count(a), param_count(b));
  EXPECT_THROW(arch_from_json(nlohmann::json{{"family", "rnn"}, {"input_size", 2}}), ConfigError);
  ArchDescriptor bad = a;
  bad.hidden = {};
  EXPECT_THROW(param_count(bad), ConfigError);
}
