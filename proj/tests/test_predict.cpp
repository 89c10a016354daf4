#include <gtest/gtest.h>

#include "rachpred/common/errors.hpp"
#include "rachpred/nn/traffic_model.hpp"
#include "rachpred/predict/chunks.hpp"
#include "rachpred/predict/evaluation.hpp"
#include "support.hpp"

using namespace rachpred;
using namespace rachpred::predict;

namespace {

StreamingConfig geometry(int l_hist, int l_f, int l_p, int l_buff) {
  StreamingConfig c;
  c.l_hist = l_hist;
  c.l_f = l_f;
  c.l_p = l_p;
  c.l_buff = l_buff;
  return c;
}

bool same_state(const nn::RecurrentState<double>& a, const nn::RecurrentState<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (!(a[l] == b[l])) return false;
  }
  return true;
}

}  // namespace

TEST(Session, WarmStateEqualsModelForward) {
  const auto m = testkit::toy_model(nn::CellKind::Lstm, 1, true);
  const auto s = testkit::synthetic_stream(300, 1);
  PredictorSession session(m, geometry(300, 10, 20, 20));
  session.init_with_history(s);
  auto state = nn::zero_state(m.params);
  nn::model_forward<double>(m.norm.apply(s), m.params, state);
  EXPECT_TRUE(same_state(session.checkpoint(), state));
  EXPECT_EQ(session.evaluations(), 300);
}

TEST(Session, ZeroModelStaysAtZeroState) {
  nn::TrafficModel m;
  m.params = nn::ModelParams<double>::zeros(testkit::toy_arch(nn::CellKind::Gru));
  m.norm = nn::Normalizer::identity(2);
  PredictorSession session(m, geometry(50, 5, 10, 10));
  session.init_with_history(testkit::synthetic_stream(50, 2));
  for (const auto& l : session.checkpoint()) EXPECT_EQ(l.h.norm(), 0.0);
}

TEST(Session, RejectsWrongLengthsAndUninitializedUse) {
  const auto m = testkit::toy_model(nn::CellKind::Lstm, 1);
  PredictorSession session(m, geometry(100, 10, 20, 20));
  EXPECT_THROW(session.flsp_step(testkit::synthetic_stream(10, 1)), std::logic_error);
  EXPECT_THROW(session.rolling_step(testkit::synthetic_stream(10, 1)), std::logic_error);
  EXPECT_THROW(session.init_with_history(testkit::synthetic_stream(99, 1)), std::invalid_argument);
  session.init_with_history(testkit::synthetic_stream(100, 1));
  EXPECT_THROW(session.flsp_step(testkit::synthetic_stream(11, 1)), std::invalid_argument);
}

TEST(Session, ZeroLengthPredictionLeavesStateAlone) {
  const auto m = testkit::toy_model(nn::CellKind::Lstm, 3);
  PredictorSession session(m, geometry(100, 10, 20, 20));
  session.init_with_history(testkit::synthetic_stream(100, 1));
  const auto before = session.live_state();
  const auto out = session.recursive_predict(0);
  EXPECT_EQ(out.cols(), 0);
  EXPECT_TRUE(same_state(before, session.live_state()));
  EXPECT_EQ(session.evaluations(), 100);
  session.recursive_predict(7);
  EXPECT_EQ(session.evaluations(), 107);
}

TEST(Session, RecursionNeverTouchesCheckpoint) {
  const auto m = testkit::toy_model(nn::CellKind::Gru, 4, true);
  PredictorSession session(m, geometry(200, 10, 30, 30));
  session.init_with_history(testkit::synthetic_stream(200, 1));
  const auto cp = session.checkpoint();
  session.recursive_predict(50);
  EXPECT_TRUE(same_state(cp, session.checkpoint()));
  EXPECT_FALSE(same_state(cp, session.live_state()));
}

TEST(Session, ClonedSessionsRepeatFlspStepExactly) {
  const auto m = testkit::toy_model(nn::CellKind::Lstm, 5, true);
  const auto s = testkit::synthetic_stream(260, 7);
  PredictorSession a(m, geometry(200, 20, 40, 40));
  a.init_with_history(s.leftCols(200));
  a.flsp_step(s.middleCols(200, 20));
  PredictorSession b = a;
  const auto fresh = s.middleCols(220, 20);
  EXPECT_EQ(a.flsp_step(fresh), b.flsp_step(fresh));
}

TEST(Session, PredictionsStayWithinPhysicalRange) {
  auto m = testkit::toy_model(nn::CellKind::Lstm, 6);
  m.params.head.layers.back().b << 1000.0, -1000.0;
  PredictorSession session(m, geometry(50, 5, 10, 10));
  session.init_with_history(testkit::synthetic_stream(50, 1));
  const auto p = session.recursive_predict(10);
  EXPECT_TRUE((p.row(0).array() == 54.0).all());
  EXPECT_TRUE((p.row(1).array() == 0.0).all());
}

TEST(Drivers, FlspCountingLaw) {
  const auto m = testkit::toy_model(nn::CellKind::Lstm, 1);
  const auto s = testkit::synthetic_stream(1000, 3);
  const auto cfg = geometry(400, 50, 120, 200);
  const auto run = run_stream(m, s, cfg, Driver::Flsp);
  const std::int64_t k = step_count(1000, cfg);
  ASSERT_EQ(k, 12);
  EXPECT_EQ(run.total_evaluations, 400 + k * (50 + 120));
  for (auto e : run.step_evaluations) EXPECT_EQ(e, 170);
  EXPECT_EQ(run.emitted.cols(), k * 50);
}

TEST(Drivers, RollingCountingLaw) {
  const auto m = testkit::toy_model(nn::CellKind::Gru, 1);
  const auto s = testkit::synthetic_stream(1000, 3);
  const auto cfg = geometry(400, 50, 120, 200);
  const auto run = run_stream(m, s, cfg, Driver::Rolling);
  EXPECT_EQ(run.warmup_evaluations, 400);
  for (auto e : run.step_evaluations) EXPECT_EQ(e, 200 + 120);
  EXPECT_EQ(run.total_evaluations, 400 + 12 * 320);
}

TEST(Drivers, RollingColdStartUsesAvailableHistory) {
  const auto m = testkit::toy_model(nn::CellKind::Lstm, 1);
  const auto s = testkit::synthetic_stream(400, 3);
  const auto run = run_stream(m, s, geometry(100, 50, 120, 300), Driver::Rolling);
  EXPECT_EQ(run.step_evaluations[0], 150 + 120);
  EXPECT_EQ(run.step_evaluations[1], 200 + 120);
  EXPECT_EQ(run.step_evaluations[4], 300 + 120);
}

TEST(Drivers, ZeroBufferUsesFreshDataOnly) {
  const auto m = testkit::toy_model(nn::CellKind::Lstm, 2, true);
  const auto s = testkit::synthetic_stream(300, 3);
  const auto cfg = geometry(100, 20, 40, 0);
  const auto run = run_stream(m, s, cfg, Driver::Rolling);
  for (auto e : run.step_evaluations) EXPECT_EQ(e, 20 + 40);
  // Second step: state warmed on slots [120, 140) only.
  PredictorSession fresh_only(m, geometry(20, 20, 40, 0));
  fresh_only.init_with_history(s.middleCols(120, 20));
  EXPECT_EQ(run.blocks[1].values, fresh_only.recursive_predict(40));
}

TEST(Drivers, ComplexityRatioIsThreeQuarters) {
  const auto m = testkit::toy_model(nn::CellKind::Lstm, 1);
  const auto s = testkit::synthetic_stream(1400, 3);
  const auto cfg = geometry(400, 100, 200, 200);
  const auto flsp = run_stream(m, s, cfg, Driver::Flsp);
  const auto roll = run_stream(m, s, cfg, Driver::Rolling);
  for (std::size_t k = 0; k < flsp.step_evaluations.size(); ++k) {
    EXPECT_EQ(4 * flsp.step_evaluations[k], 3 * roll.step_evaluations[k]);
  }
}

TEST(Drivers, FlspEqualsUnboundedRollingBitwise) {
  for (auto kind : {nn::CellKind::Lstm, nn::CellKind::Gru}) {
    const auto m = testkit::toy_model(kind, 11, true);
    const auto s = testkit::synthetic_stream(900, 5);
    auto cfg = geometry(300, 30, 60, StreamingConfig::kUnboundedBuffer);
    const auto flsp = run_stream(m, s, cfg, Driver::Flsp);
    const auto roll = run_stream(m, s, cfg, Driver::Rolling);
    ASSERT_EQ(flsp.emitted.cols(), roll.emitted.cols());
    EXPECT_EQ(flsp.emitted, roll.emitted);
    EXPECT_EQ(flsp.emitted_first_slot, roll.emitted_first_slot);
  }
}

TEST(Drivers, ShortBufferDiffersFromFlsp) {
  auto m = testkit::toy_model(nn::CellKind::Lstm, 11, true);
  // Keep outputs away from the clamp so the buffers can be told apart.
  m.params.head.layers.back().b.setConstant(15.0);
  const auto s = testkit::synthetic_stream(900, 5);
  const auto flsp = run_stream(m, s, geometry(300, 30, 60, 30), Driver::Flsp);
  const auto roll = run_stream(m, s, geometry(300, 30, 60, 30), Driver::Rolling);
  EXPECT_NE(flsp.emitted, roll.emitted);
}

TEST(Drivers, OutputIsContiguousAndCoversLastLfOfEachBlock) {
  const auto m = testkit::toy_model(nn::CellKind::Gru, 2);
  const auto s = testkit::synthetic_stream(700, 5);
  const auto run = run_stream(m, s, geometry(300, 40, 100, 100), Driver::Flsp);
  ASSERT_EQ(run.blocks.size(), 10u);
  EXPECT_EQ(run.emitted_first_slot, 300 + 40 + 1 + (100 - 40));
  for (std::size_t k = 0; k < run.blocks.size(); ++k) {
    EXPECT_EQ(run.blocks[k].origin, 300 + 40 * static_cast<std::int64_t>(k + 1));
    EXPECT_EQ(run.emitted.middleCols(40 * static_cast<Eigen::Index>(k), 40), run.blocks[k].values.rightCols(40));
  }
}

TEST(Drivers, LongerHorizonKeepsPrefix) {
  const auto m = testkit::toy_model(nn::CellKind::Lstm, 3, true);
  const auto s = testkit::synthetic_stream(600, 5);
  const auto short_run = run_stream(m, s, geometry(300, 30, 60, 60), Driver::Flsp);
  const auto long_run = run_stream(m, s, geometry(300, 30, 150, 60), Driver::Flsp);
  for (std::size_t k = 0; k < short_run.blocks.size(); ++k) {
    EXPECT_EQ(short_run.blocks[k].values, long_run.blocks[k].values.leftCols(60));
  }
}

TEST(Drivers, StrictHorizonByDefault) {
  auto cfg = geometry(100, 50, 50, 50);
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.allow_equal_horizon = true;
  EXPECT_NO_THROW(cfg.validate());
  cfg.l_f = 60;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Chunks, LayoutAndLength) {
  const auto m = testkit::toy_model(nn::CellKind::Lstm, 1);
  const auto s = testkit::synthetic_stream(1500, 3);
  const auto run = run_stream(m, s, geometry(500, 100, 400, 400), Driver::Flsp);
  const auto chunks = make_chunks(s, run);
  ASSERT_EQ(chunks.size(), 10u);
  for (const auto& c : chunks) EXPECT_EQ(c.features.size(), 1000);
  const auto& c = chunks[2];
  EXPECT_EQ(c.origin, 800);
  EXPECT_EQ(c.features(0), s(0, 700));
  EXPECT_EQ(c.features(99), s(0, 799));
  EXPECT_EQ(c.features(100), s(1, 700));
  EXPECT_EQ(c.features(200), run.blocks[2].values(0, 0));
  EXPECT_EQ(c.features(600), run.blocks[2].values(1, 0));
  const auto short_chunks = make_chunks(s, run, 200);
  EXPECT_EQ(short_chunks[0].features.size(), 600);
  EXPECT_EQ(short_chunks[2].features(400), run.blocks[2].values(1, 0));
  EXPECT_THROW(make_chunks(s, run, 401), ConfigError);
}

TEST(Evaluation, PerfectAndBiasedPredictors) {
  const auto truth = testkit::synthetic_stream(400, 9);
  std::vector<PredictionBlock> perfect, biased;
  for (std::int64_t origin = 100; origin + 60 < 400; origin += 20) {
    Series v = truth.middleCols(origin + 1, 60);
    perfect.push_back({origin, v});
    biased.push_back({origin, (v.array() + 1.5).matrix()});
  }
  for (const auto& e : evaluate_stream(perfect, truth, 20, {20, 40, 60})) EXPECT_EQ(e.mse, 0.0);
  for (const auto& e : evaluate_stream(biased, truth, 20, {20, 40, 60})) EXPECT_NEAR(e.mse, 2.25, 1e-12);
}

TEST(Evaluation, MatchesBruteForceAlignment) {
  const auto m = testkit::toy_model(nn::CellKind::Gru, 8, true);
  const auto s = testkit::synthetic_stream(1000, 4);
  const auto run = run_stream(m, s, geometry(300, 50, 200, 100), Driver::Rolling);
  const auto errs = evaluate_stream(run.blocks, s, 50, {50, 100, 150, 200});
  for (const auto& e : errs) {
    // A run whose horizon equals the lead emits exactly the slots being scored.
    auto sub_cfg = geometry(300, 50, static_cast<int>(e.lead_slots), 100);
    sub_cfg.allow_equal_horizon = true;
    const auto sub = run_stream(m, s, sub_cfg, Driver::Rolling);
    double sum = 0.0;
    std::int64_t n = 0;
    for (Eigen::Index j = 0; j < sub.emitted.cols(); ++j) {
      const std::int64_t slot = sub.emitted_first_slot + j;
      if (slot >= s.cols()) continue;
      for (Eigen::Index f = 0; f < 2; ++f) {
        const double d = sub.emitted(f, j) - s(f, slot);
        sum += d * d;
        ++n;
      }
    }
    EXPECT_NEAR(e.mse, sum / static_cast<double>(n), 1e-12) << e.lead_slots;
    EXPECT_EQ(emitted_error(sub.emitted, sub.emitted_first_slot, s).count * 2, n);
  }
}

TEST(Recursion, IdentityModelContinuesConstantSequence) {
  // Train a small network to repeat its input on constant sequences.
  std::vector<Eigen::MatrixXd> series;
  for (double level : {5.0, 12.0, 20.0, 28.0, 35.0}) {
    Eigen::MatrixXd s(2, 400);
    s.row(0).setConstant(level);
    s.row(1).setConstant(40.0 - level);
    series.push_back(s);
  }
  nn::TrainConfig cfg;
  cfg.epochs = 400;
  cfg.batch_size = 5;
  cfg.window = 20;
  cfg.segment_length = 399;
  cfg.dropout = 0.0;
  cfg.learning_rate = 1e-2;
  auto arch = testkit::toy_arch(nn::CellKind::Lstm);
  const auto trained = nn::train(series, arch, cfg);
  Eigen::MatrixXd hist(2, 100);
  hist.row(0).setConstant(20.0);
  hist.row(1).setConstant(20.0);
  PredictorSession session(trained.model, geometry(100, 10, 50, 50));
  session.init_with_history(hist);
  const auto p = session.recursive_predict(50);
  EXPECT_LT((p.array() - 20.0).abs().maxCoeff() / 20.0, 1e-2);
}
