#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "rachpred/predict/session.hpp"

namespace rachpred::predict {

enum class Driver { Flsp, Rolling };

Driver parse_driver(std::string_view name);
const char* to_string(Driver driver);

/// Everything a driver produced over one stream.
struct StreamRun {
  Driver driver = Driver::Flsp;
  StreamingConfig config;
  Series emitted;                        // concatenated last-l_f slices
  std::int64_t emitted_first_slot = -1;  // slot of emitted.col(0)
  std::vector<PredictionBlock> blocks;   // full l_p predictions per step
  std::vector<std::int64_t> step_evaluations;  // cell evaluations spent per step
  std::int64_t warmup_evaluations = 0;
  std::int64_t total_evaluations = 0;
};

/// Number of driver steps over a stream of `stream_slots`: floor((n - l_hist) / l_f).
std::int64_t step_count(std::int64_t stream_slots, const StreamingConfig& cfg);

/// Initializes on the first l_hist slots, then calls the driver once per
/// block of l_f fresh slots.
StreamRun run_stream(const nn::TrafficModel& model, const Series& stream,
                     const StreamingConfig& cfg, Driver driver);

/// Burst-detector input: features laid out as
///   [fresh detected (l_f), fresh collided (l_f), predicted detected (l_p), predicted collided (l_p)].
struct ChunkSample {
  std::int64_t step = 0;
  std::int64_t origin = 0;  // first slot after the fresh data
  Eigen::VectorXd features;
};

/// One chunk per driver step. `horizon` selects the first `horizon` columns
/// of each prediction block (0 means the full block), so a run made with a
/// long l_p also yields the chunks of any shorter horizon.
std::vector<ChunkSample> make_chunks(const Series& stream, const StreamRun& run, int horizon = 0);

}  // namespace rachpred::predict
