#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rachpred/nn/model.hpp"
#include "rachpred/nn/normalizer.hpp"
#include "rachpred/sim/simulator.hpp"

namespace rachpred::nn {

/// Two-feature traffic series: row 0 detected preambles, row 1 collided
/// preambles, one column per slot.
Eigen::MatrixXd traffic_series(std::span<const sim::TraceRecord> trace);

/// Trained predictor: recurrent stack + head operating in normalized units.
struct TrafficModel {
  ModelParams<double> params;
  Normalizer norm;
  double output_ceiling = 54.0;  // physical upper bound of each count (preambles)
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 25;
  int epochs = 20;
  double dropout = 0.4;
  int window = 100;            // truncated-BPTT length in slots
  int segment_length = 4000;   // slots per training stream; state carries across windows
  double clip_norm = 5.0;      // global gradient-norm clip, 0 disables
  double memory_bias = 1.0;    // initial forget/update gate bias offset
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainResult {
  TrafficModel model;
  std::vector<double> loss_history;  // mean window loss per epoch
};

using EpochCallback = std::function<void(int epoch, double loss)>;

/// Teacher-forced next-slot regression with Adam. Each series is cut into
/// segments that are processed as parallel streams; recurrent state is
/// carried across consecutive windows of a segment.
TrainResult train(const std::vector<Eigen::MatrixXd>& series, const Architecture& arch,
                  const TrainConfig& cfg, double output_ceiling = 54.0,
                  const EpochCallback& on_epoch = {});

/// Rescales all gradient blocks so their joint L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
double clip_gradients(ModelParams<double>& grads, double max_norm);

}  // namespace rachpred::nn
