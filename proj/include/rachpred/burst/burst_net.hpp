#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rachpred/common/rng.hpp"
#include "rachpred/predict/chunks.hpp"

namespace rachpred::burst {

/// Two affine layers (chunk -> hidden -> 1) with dropout between them and a
/// sigmoid output read as the probability of upcoming congestion.
struct BurstNetParams {
  Eigen::MatrixXd w1;  // hidden x ch_size
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // 1 x hidden
  Eigen::VectorXd b2;
  double dropout = 0.4;
  double threshold = 0.5;
  double input_scale = 54.0;  // chunk counts are divided by this before layer 1
  int l_f = 100;
  int l_p = 200;

  Eigen::Index chunk_size() const { return w1.cols(); }
  Eigen::Index hidden() const { return w1.rows(); }
  /// Input width must be 2(l_f + l_p), threshold inside (0,1).
  void check() const;

  static BurstNetParams zeros(int l_f, int l_p, Eigen::Index hidden);
};

/// Probability in [0,1] for one chunk (inference mode).
double burst_forward(const Eigen::VectorXd& chunk, const BurstNetParams& params);

/// Probabilities for chunks stored as columns.
Eigen::VectorXd burst_forward_batch(const Eigen::MatrixXd& chunks, const BurstNetParams& params,
                                    bool train_mode = false, Rng* rng = nullptr);

inline bool decide(double probability, const BurstNetParams& params) {
  return probability >= params.threshold;
}

enum class BurstLoss { Mse, CrossEntropy };
enum class LabelAggregation { Any, Majority };

/// Label of each driver step from per-slot expected-congestion labels over
/// its l_f fresh slots [origin - l_f, origin).
std::vector<std::uint8_t> step_labels(std::span<const predict::ChunkSample> chunks,
                                      std::span<const std::uint8_t> expected, int l_f,
                                      LabelAggregation rule = LabelAggregation::Any);

struct BurstTrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 25;
  int epochs = 30;
  double dropout = 0.4;
  Eigen::Index hidden = 0;  // 0 selects 4 * ch_size
  double threshold = 0.5;
  double input_scale = 54.0;
  BurstLoss loss = BurstLoss::Mse;
  std::uint64_t seed = 1;

  void validate() const;
};

struct BurstTrainResult {
  BurstNetParams params;
  std::vector<double> loss_history;
};

BurstTrainResult train_burst(std::span<const predict::ChunkSample> chunks,
                             std::span<const std::uint8_t> labels, int l_f, int l_p,
                             const BurstTrainConfig& cfg);

nlohmann::json to_json(const BurstNetParams& params);
BurstNetParams burst_params_from_json(const nlohmann::json& j);
void save_burst_checkpoint(const BurstNetParams& params, const std::filesystem::path& path);
BurstNetParams load_burst_checkpoint(const std::filesystem::path& path);

}  // namespace rachpred::burst
