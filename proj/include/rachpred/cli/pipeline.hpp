#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rachpred/analysis/cost.hpp"
#include "rachpred/burst/burst_net.hpp"
#include "rachpred/burst/metrics.hpp"
#include "rachpred/io/config.hpp"
#include "rachpred/io/manifest.hpp"
#include "rachpred/io/trace_csv.hpp"
#include "rachpred/predict/chunks.hpp"
#include "rachpred/predict/evaluation.hpp"

namespace rachpred::cli {

namespace fs = std::filesystem;

/// Leads scored by evaluate and compare-drivers: l_f, 2 l_f, ... up to l_p,
/// with l_p itself always included.
std::vector<std::int64_t> lead_grid(const predict::StreamingConfig& streaming);

/// Simulates one trace of cfg.total_slots and labels it with cfg.labels.
io::LabeledTrace simulate_trace(const io::ExperimentConfig& cfg, std::uint64_t seed);

/// Seed of trace `index` in a batch: cfg.seed + index.
std::uint64_t trace_seed(const io::ExperimentConfig& cfg, int index);

/// cfg.streaming with l_buff replaced (FLSP ignores it).
predict::StreamingConfig driver_config(const io::ExperimentConfig& cfg, int l_buff);

struct BurstDataset {
  std::vector<predict::ChunkSample> chunks;
  std::vector<std::uint8_t> labels;
};

/// Burst-detector samples of one driver run: chunks with the configured
/// horizon, labelled from `expected` over each step's fresh slots.
BurstDataset burst_dataset(const predict::StreamRun& run, const predict::Series& series,
                           std::span<const std::uint8_t> expected, const io::ExperimentConfig& cfg);

/// Trains the traffic model on the given traces.
nn::TrainResult train_traffic_model(const io::ExperimentConfig& cfg,
                                    std::span<const io::LabeledTrace> traces,
                                    const nn::EpochCallback& on_epoch = {});

/// Trains the burst detector on FLSP chunks of the given traces.
burst::BurstTrainResult train_burst_detector(const io::ExperimentConfig& cfg, const nn::TrafficModel& model,
                                             std::span<const io::LabeledTrace> traces);

struct DriverScore {
  predict::Driver driver = predict::Driver::Flsp;
  int l_buff = 0;  // 0 for FLSP
  std::vector<predict::LeadError> leads;  // pooled over all traces
  double evaluations_per_slot = 0.0;
  std::optional<burst::Metrics> burst;
};

/// FLSP first, then the rolling driver once per buffer size. Labels are
/// recomputed from the records with cfg.labels.
std::vector<DriverScore> compare_drivers(const nn::TrafficModel& model,
                                         std::span<const io::LabeledTrace> traces,
                                         const io::ExperimentConfig& cfg, std::span<const int> buffers,
                                         const burst::BurstNetParams* detector = nullptr);

nlohmann::json to_json(const burst::Metrics& m);
nlohmann::json to_json(const DriverScore& score);

// Subcommands. Each writes its artifacts and a manifest.json into `out`
// and returns the manifest.

io::RunManifest cmd_simulate(const io::ExperimentConfig& cfg, const fs::path& out, int count = 1);

io::RunManifest cmd_train(const io::ExperimentConfig& cfg, std::span<const fs::path> traces,
                          const fs::path& out, const nn::EpochCallback& on_epoch = {});

io::RunManifest cmd_train_burst(const io::ExperimentConfig& cfg, const fs::path& model,
                                std::span<const fs::path> traces, const fs::path& out);

io::RunManifest cmd_predict(const io::ExperimentConfig& cfg, const fs::path& model, const fs::path& trace,
                            predict::Driver driver, const fs::path& out);

io::RunManifest cmd_evaluate(const io::ExperimentConfig& cfg, const fs::path& predictions,
                             const fs::path& trace, const std::optional<fs::path>& detector,
                             const fs::path& out);

analysis::CostReport cmd_flops(const analysis::ArchDescriptor& arch, const predict::StreamingConfig& streaming);
std::string format_cost_table(const analysis::ArchDescriptor& arch, const predict::StreamingConfig& streaming,
                              const analysis::CostReport& report);

io::RunManifest cmd_compare_drivers(const io::ExperimentConfig& cfg, const fs::path& model,
                                    std::span<const fs::path> traces, std::span<const int> buffers,
                                    const std::optional<fs::path>& detector, const fs::path& out);

}  // namespace rachpred::cli
