#include "rachpred/predict/chunks.hpp"

#include <string>

#include "rachpred/common/errors.hpp"

namespace rachpred::predict {

Driver parse_driver(std::string_view name) {
  if (name == "flsp") return Driver::Flsp;
  if (name == "rolling") return Driver::Rolling;
  throw ConfigError("unknown driver '" + std::string(name) + "'");
}

const char* to_string(Driver driver) { return driver == Driver::Flsp ? "flsp" : "rolling"; }

std::int64_t step_count(std::int64_t stream_slots, const StreamingConfig& cfg) {
  if (stream_slots < cfg.l_hist) return 0;
  return (stream_slots - cfg.l_hist) / cfg.l_f;
}

StreamRun run_stream(const nn::TrafficModel& model, const Series& stream,
                     const StreamingConfig& cfg, Driver driver) {
  cfg.validate();
  if (stream.cols() < cfg.l_hist) throw ConfigError("stream shorter than l_hist");
  PredictorSession session(model, cfg);
  session.init_with_history(stream.leftCols(cfg.l_hist));

  StreamRun run;
  run.driver = driver;
  run.config = cfg;
  run.warmup_evaluations = session.evaluations();
  const std::int64_t steps = step_count(stream.cols(), cfg);
  for (std::int64_t k = 0; k < steps; ++k) {
    const std::int64_t before = session.evaluations();
    const Series fresh = stream.middleCols(cfg.l_hist + k * cfg.l_f, cfg.l_f);
    if (driver == Driver::Flsp) {
      session.flsp_step(fresh);
    } else {
      session.rolling_step(fresh);
    }
    run.step_evaluations.push_back(session.evaluations() - before);
  }
  run.emitted = session.output();
  run.emitted_first_slot = session.output_first_slot();
  run.blocks = session.blocks();
  run.total_evaluations = session.evaluations();
  return run;
}

std::vector<ChunkSample> make_chunks(const Series& stream, const StreamRun& run, int horizon) {
  const int l_f = run.config.l_f;
  std::vector<ChunkSample> chunks;
  chunks.reserve(run.blocks.size());
  for (std::size_t k = 0; k < run.blocks.size(); ++k) {
    const auto& block = run.blocks[k];
    const Eigen::Index h = horizon > 0 ? horizon : block.values.cols();
    if (h > block.values.cols()) throw ConfigError("chunk horizon exceeds prediction length");
    if (block.origin < l_f || block.origin > stream.cols()) {
      throw ConfigError("prediction block outside the stream");
    }
    ChunkSample c;
    c.step = static_cast<std::int64_t>(k);
    c.origin = block.origin;
    c.features.resize(2 * (l_f + h));
    const auto fresh = stream.middleCols(block.origin - l_f, l_f);
    c.features.segment(0, l_f) = fresh.row(0).transpose();
    c.features.segment(l_f, l_f) = fresh.row(1).transpose();
    c.features.segment(2 * l_f, h) = block.values.row(0).head(h).transpose();
    c.features.segment(2 * l_f + h, h) = block.values.row(1).head(h).transpose();
    chunks.push_back(std::move(c));
  }
  return chunks;
}

}  // namespace rachpred::predict
