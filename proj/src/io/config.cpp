#include "rachpred/io/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "rachpred/common/errors.hpp"
#include "rachpred/common/rng.hpp"
#include "rachpred/nn/checkpoint.hpp"

namespace rachpred::io {

using nlohmann::json;

int ExperimentConfig::burst_horizon() const {
  return static_cast<int>(rach.slots_for(labels.t_pred));
}

Eigen::Index ExperimentConfig::chunk_size() const {
  return 2 * (Eigen::Index{streaming.l_f} + burst_horizon());
}

void ExperimentConfig::validate() const {
  cell.validate();
  rach.validate();
  labels.validate();
  train.validate();
  streaming.validate();
  burst.validate();
  if (total_slots < 0) throw ConfigError("total_slots must be >= 0");
  if (model.input_size != 2) throw ConfigError("the traffic model takes two features");
  if (model.hidden.empty() || model.dense.empty() || model.dense.back().size != 2) {
    throw ConfigError("the traffic model needs recurrent layers and a 2-wide output");
  }
  if (std::abs(streaming.slot_period - rach.slot_period) > 1e-12) {
    throw ConfigError("streaming and RACH slot periods differ");
  }
  const int h = burst_horizon();
  if (h < 1 || h > streaming.l_p) {
    throw ConfigError("burst horizon (t_pred in slots) must lie in [1, l_p]");
  }
}

void ExperimentConfig::check_burst_net(const burst::BurstNetParams& params) const {
  if (params.chunk_size() != chunk_size() || params.l_f != streaming.l_f || params.l_p != burst_horizon()) {
    throw ConfigError("burst detector expects chunks of " + std::to_string(params.chunk_size()) +
                      " values, configuration produces " + std::to_string(chunk_size()));
  }
}

namespace {

const char* rule_name(sim::CongestionRule r) {
  return r == sim::CongestionRule::WindowedCollisions ? "windowed_collisions" : "sustained_overload";
}

sim::CongestionRule parse_rule(const std::string& s) {
  if (s == "windowed_collisions") return sim::CongestionRule::WindowedCollisions;
  if (s == "sustained_overload") return sim::CongestionRule::SustainedOverload;
  throw ConfigError("unknown congestion rule '" + s + "'");
}

json cell_json(const sim::CellConfig& c) {
  json groups = json::array();
  for (const auto& g : c.groups) {
    groups.push_back({{"size", g.size},
                      {"event_probability", g.event_probability},
                      {"periodic_rate", g.periodic_rate}});
  }
  return {{"groups", groups},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"min_event_duration", c.min_event_duration},
          {"max_event_duration", c.max_event_duration}};
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  auto model = nn::architecture_to_json(c.model);
  model.erase("dropout");  // training dropout lives in "train"
  return {
      {"seed", c.seed},
      {"total_slots", c.total_slots},
      {"cell", cell_json(c.cell)},
      {"rach",
       {{"preambles", c.rach.preambles},
        {"slot_period", c.rach.slot_period},
        {"max_transmissions", c.rach.max_transmissions},
        {"backoff_ms", c.rach.backoff_ms}}},
      {"labels",
       {{"window_seconds", c.labels.window_seconds},
        {"collision_threshold", c.labels.collision_threshold},
        {"t_pred", c.labels.t_pred},
        {"rule", rule_name(c.labels.rule)},
        {"overload_run_slots", c.labels.overload_run_slots}}},
      {"model", model},
      {"train",
       {{"learning_rate", c.train.learning_rate},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"epsilon", c.train.epsilon},
        {"batch_size", c.train.batch_size},
        {"epochs", c.train.epochs},
        {"dropout", c.train.dropout},
        {"window", c.train.window},
        {"segment_length", c.train.segment_length},
        {"clip_norm", c.train.clip_norm},
        {"memory_bias", c.train.memory_bias}}},
      {"streaming",
       {{"l_hist", c.streaming.l_hist},
        {"l_f", c.streaming.l_f},
        {"l_p", c.streaming.l_p},
        {"l_buff", c.streaming.l_buff},
        {"allow_equal_horizon", c.streaming.allow_equal_horizon}}},
      {"burst",
       {{"learning_rate", c.burst.learning_rate},
        {"batch_size", c.burst.batch_size},
        {"epochs", c.burst.epochs},
        {"dropout", c.burst.dropout},
        {"hidden", c.burst.hidden},
        {"threshold", c.burst.threshold},
        {"input_scale", c.burst.input_scale},
        {"loss", c.burst.loss == burst::BurstLoss::Mse ? "mse" : "cross_entropy"},
        {"labels", c.burst_labels == burst::LabelAggregation::Any ? "any" : "majority"}}},
  };
}

ExperimentConfig config_from_json(const json& user) {
  json j = to_json(ExperimentConfig{});
  j.merge_patch(user);
  ExperimentConfig c;
  try {
    c.seed = j.at("seed").get<std::uint64_t>();
    c.total_slots = j.at("total_slots").get<std::int64_t>();

    const auto& cell = j.at("cell");
    c.cell.groups.clear();
    for (const auto& g : cell.at("groups")) {
      c.cell.groups.push_back({g.at("size").get<std::int64_t>(), g.at("event_probability").get<double>(),
                               g.at("periodic_rate").get<double>()});
    }
    c.cell.alpha = cell.at("alpha").get<double>();
    c.cell.beta = cell.at("beta").get<double>();
    c.cell.min_event_duration = cell.at("min_event_duration").get<double>();
    c.cell.max_event_duration = cell.at("max_event_duration").get<double>();

    const auto& rach = j.at("rach");
    c.rach.preambles = rach.at("preambles").get<int>();
    c.rach.slot_period = rach.at("slot_period").get<double>();
    c.rach.max_transmissions = rach.at("max_transmissions").get<int>();
    c.rach.backoff_ms = rach.at("backoff_ms").get<int>();

    const auto& labels = j.at("labels");
    c.labels.window_seconds = labels.at("window_seconds").get<double>();
    c.labels.collision_threshold = labels.at("collision_threshold").get<double>();
    c.labels.t_pred = labels.at("t_pred").get<double>();
    c.labels.rule = parse_rule(labels.at("rule").get<std::string>());
    c.labels.overload_run_slots = labels.at("overload_run_slots").get<std::int64_t>();

    auto model = j.at("model");
    model["dropout"] = j.at("train").at("dropout");
    c.model = nn::architecture_from_json(model);

    const auto& train = j.at("train");
    c.train.learning_rate = train.at("learning_rate").get<double>();
    c.train.beta1 = train.at("beta1").get<double>();
    c.train.beta2 = train.at("beta2").get<double>();
    c.train.epsilon = train.at("epsilon").get<double>();
    c.train.batch_size = train.at("batch_size").get<int>();
    c.train.epochs = train.at("epochs").get<int>();
    c.train.dropout = train.at("dropout").get<double>();
    c.train.window = train.at("window").get<int>();
    c.train.segment_length = train.at("segment_length").get<int>();
    c.train.clip_norm = train.at("clip_norm").get<double>();
    c.train.memory_bias = train.at("memory_bias").get<double>();
    c.train.seed = c.seed;

    const auto& s = j.at("streaming");
    c.streaming.l_hist = s.at("l_hist").get<int>();
    c.streaming.l_f = s.at("l_f").get<int>();
    c.streaming.l_p = s.at("l_p").get<int>();
    c.streaming.l_buff = s.at("l_buff").get<int>();
    c.streaming.allow_equal_horizon = s.at("allow_equal_horizon").get<bool>();
    c.streaming.slot_period = c.rach.slot_period;

    const auto& b = j.at("burst");
    c.burst.learning_rate = b.at("learning_rate").get<double>();
    c.burst.batch_size = b.at("batch_size").get<int>();
    c.burst.epochs = b.at("epochs").get<int>();
    c.burst.dropout = b.at("dropout").get<double>();
    c.burst.hidden = b.at("hidden").get<Eigen::Index>();
    c.burst.threshold = b.at("threshold").get<double>();
    c.burst.input_scale = b.at("input_scale").get<double>();
    const auto loss = b.at("loss").get<std::string>();
    if (loss != "mse" && loss != "cross_entropy") throw ConfigError("unknown burst loss '" + loss + "'");
    c.burst.loss = loss == "mse" ? burst::BurstLoss::Mse : burst::BurstLoss::CrossEntropy;
    const auto agg = b.at("labels").get<std::string>();
    if (agg != "any" && agg != "majority") throw ConfigError("unknown burst label rule '" + agg + "'");
    c.burst_labels = agg == "any" ? burst::LabelAggregation::Any : burst::LabelAggregation::Majority;
    c.burst.seed = c.seed;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  // A run manifest carries the full configuration of the run it describes.
  if (j.is_object() && j.contains("command") && j.contains("config")) return config_from_json(j.at("config"));
  return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(to_json(cfg).dump())));
  return buf;
}

}  // namespace rachpred::io
