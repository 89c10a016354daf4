#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rachpred/predict/session.hpp"
#include "rachpred/sim/labels.hpp"
#include "rachpred/sim/simulator.hpp"

namespace rachpred::io {

struct LabeledTrace {
  std::vector<sim::TraceRecord> records;
  sim::CongestionLabels labels;
};

/// Header: slot,arrivals,attempts,detected,collided,dropped,congested,label.
/// Label columns are written as 0 when `labels` is empty.
void write_trace_csv(const std::filesystem::path& path, std::span<const sim::TraceRecord> records,
                     const sim::CongestionLabels& labels = {});

/// Throws ConfigError on a missing file, bad header or malformed row.
LabeledTrace read_trace_csv(const std::filesystem::path& path);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double value);

/// Header: slot,pred_detected,pred_collided,lead_slots. One row per block
/// column; the block origin is slot - lead_slots.
void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const predict::PredictionBlock> blocks);

/// Rebuilds the blocks in origin order. Every block must hold leads 1..l_p.
std::vector<predict::PredictionBlock> read_predictions_csv(const std::filesystem::path& path);

}  // namespace rachpred::io
