#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "rachpred/nn/traffic_model.hpp"

namespace rachpred::predict {

/// Raw traffic counts, one column per slot (row 0 detected, row 1 collided).
using Series = Eigen::MatrixXd;

struct StreamingConfig {
  static constexpr int kUnboundedBuffer = std::numeric_limits<int>::max();

  int l_hist = 6000;   // warm-up history, slots
  int l_f = 100;       // fresh slots per arrival
  int l_p = 200;       // recursive prediction horizon, slots
  int l_buff = 200;    // rolling input window, slots
  double slot_period = 0.005;
  bool allow_equal_horizon = false;  // permit l_f == l_p

  /// Requires positive sizes and l_f < l_p (or l_f <= l_p with the override).
  void validate() const;
  /// Real slots the rolling driver feeds per step: max(l_buff, l_f).
  int rolling_window() const;
};

/// Predictions made after consuming real slots [0, origin): column j
/// predicts slot origin + 1 + j and needed j + 1 recursive evaluations
/// (lead_slots = j + 1).
struct PredictionBlock {
  std::int64_t origin = 0;
  Series values;
};

/// Streaming inference state for one trace. The checkpoint always reflects
/// the recurrent state right after the last real slot; recursive prediction
/// advances only the live state.
class PredictorSession {
 public:
  PredictorSession(const nn::TrafficModel& model, StreamingConfig cfg);

  /// Warms the state from zero over `hist` (exactly l_hist slots) and stores
  /// the checkpoint.
  void init_with_history(const Series& hist);

  /// Feeds each prediction back as the next input, starting from the output
  /// of the last consumed slot. Returns `steps` clamped raw predictions.
  Series recursive_predict(int steps);

  /// Restore checkpoint, consume fresh data, store checkpoint, predict l_p
  /// slots and append the last l_f of them to the output.
  Series flsp_step(const Series& fresh);

  /// Append fresh data to the real-data buffer, keep the last
  /// rolling_window() slots, re-warm from zero over them, predict l_p slots
  /// and append the last l_f of them to the output.
  Series rolling_step(const Series& fresh);

  bool initialized() const { return initialized_; }
  std::int64_t evaluations() const { return evaluations_; }
  std::int64_t consumed() const { return consumed_; }
  const Series& output() const { return output_; }
  std::int64_t output_first_slot() const { return output_first_slot_; }
  const std::vector<PredictionBlock>& blocks() const { return blocks_; }
  const nn::RecurrentState<double>& checkpoint() const { return checkpoint_; }
  const nn::RecurrentState<double>& live_state() const { return live_; }
  const StreamingConfig& config() const { return cfg_; }

 private:
  void consume(const Series& real);
  Eigen::VectorXd to_physical(const Eigen::VectorXd& normalized) const;
  Series finish_step(Series predictions);

  const nn::TrafficModel* model_;
  StreamingConfig cfg_;
  bool initialized_ = false;
  nn::RecurrentState<double> live_;
  nn::RecurrentState<double> checkpoint_;
  Eigen::VectorXd last_output_;        // normalized output after the newest input
  Eigen::VectorXd checkpoint_output_;  // same, at the checkpoint
  Series buffer_;                      // rolling driver's real-data window
  Series output_;
  std::int64_t output_first_slot_ = -1;
  std::vector<PredictionBlock> blocks_;
  std::int64_t consumed_ = 0;
  std::int64_t evaluations_ = 0;
};

}  // namespace rachpred::predict
