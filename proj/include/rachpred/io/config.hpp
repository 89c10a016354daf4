#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "rachpred/burst/burst_net.hpp"
#include "rachpred/nn/traffic_model.hpp"
#include "rachpred/predict/session.hpp"
#include "rachpred/sim/labels.hpp"
#include "rachpred/sim/rach.hpp"
#include "rachpred/sim/traffic.hpp"

namespace rachpred::io {

/// Desk-scale training: as nn::TrainConfig but without dropout. At h=64,
/// dropout 0.4 makes the recursive rollout collapse onto a fixed point
/// within about 100 slots.
inline nn::TrainConfig desk_training() {
  nn::TrainConfig t;
  t.dropout = 0.0;
  return t;
}

struct ExperimentConfig {
  sim::CellConfig cell = sim::CellConfig::reference();
  sim::RachConfig rach;
  sim::LabelConfig labels;
  std::int64_t total_slots = 32000;
  nn::Architecture model = nn::Architecture::desk(nn::CellKind::Lstm, 64);
  nn::TrainConfig train = desk_training();
  predict::StreamingConfig streaming;
  burst::BurstTrainConfig burst;
  burst::LabelAggregation burst_labels = burst::LabelAggregation::Any;
  std::uint64_t seed = 1;

  /// Prediction slots fed to the burst detector: the label lead time in slots.
  int burst_horizon() const;
  /// Burst-detector input width 2(l_f + burst_horizon()).
  Eigen::Index chunk_size() const;

  /// Validates every section plus the cross-field rules: two traffic
  /// features, burst horizon within (0, l_p], matching slot periods.
  void validate() const;
  /// Rejects a burst detector whose input width differs from chunk_size().
  void check_burst_net(const burst::BurstNetParams& params) const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults. Throws ConfigError on malformed input
/// or failed validation.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// Accepts a configuration document or a run manifest (its embedded config).
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a of the canonical (sorted-key) JSON dump.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace rachpred::io
