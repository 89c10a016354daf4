#pragma once

#include <filesystem>

#include <json.hpp>

#include "rachpred/nn/traffic_model.hpp"

namespace rachpred::nn {

inline constexpr int kCheckpointVersion = 1;

/// Checkpoint layout:
///   {"format": "rachpred-traffic-model", "version": 1,
///    "architecture": {"kind", "input_size", "hidden": [...],
///                     "dense": [{"size", "sources": [...]}, ...], "dropout"},
///    "normalization": {"mean": [...], "scale": [...]},
///    "output_ceiling": K,
///    "blocks": [{"name", "rows", "cols", "data": [row-major values]}, ...]}
/// Blocks follow the order of nn::blocks(): per recurrent layer w_ih, w_hh,
/// b_ih, b_hh (gate rows [i,f,g,o] or [r,z,n]), then per dense layer w, b.
nlohmann::json architecture_to_json(const Architecture& arch);
Architecture architecture_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const ModelParams<double>& params);
ModelParams<double> params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TrafficModel& model);
TrafficModel traffic_model_from_json(const nlohmann::json& j);

void save_checkpoint(const TrafficModel& model, const std::filesystem::path& path);
TrafficModel load_checkpoint(const std::filesystem::path& path);

}  // namespace rachpred::nn
