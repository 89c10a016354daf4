#include "rachpred/nn/checkpoint.hpp"

#include <fstream>

#include "rachpred/common/errors.hpp"

namespace rachpred::nn {

using nlohmann::json;

json architecture_to_json(const Architecture& arch) {
  json dense = json::array();
  for (const auto& d : arch.dense) dense.push_back({{"size", d.size}, {"sources", d.sources}});
  return {{"kind", to_string(arch.kind)},
          {"input_size", arch.input_size},
          {"hidden", arch.hidden},
          {"dense", dense},
          {"dropout", arch.dropout}};
}

Architecture architecture_from_json(const json& j) {
  Architecture a;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "lstm") {
    a.kind = CellKind::Lstm;
  } else if (kind == "gru") {
    a.kind = CellKind::Gru;
  } else {
    throw ConfigError("unknown recurrent kind '" + kind + "'");
  }
  a.input_size = j.at("input_size").get<Eigen::Index>();
  a.hidden = j.at("hidden").get<std::vector<Eigen::Index>>();
  a.dense.clear();
  for (const auto& d : j.at("dense")) {
    a.dense.push_back({d.at("size").get<Eigen::Index>(), d.at("sources").get<std::vector<int>>()});
  }
  a.dropout = j.value("dropout", 0.0);
  return a;
}

json params_to_json(const ModelParams<double>& params) {
  auto& mutable_params = const_cast<ModelParams<double>&>(params);
  json out = json::array();
  for (const auto& b : blocks(mutable_params)) {
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(b.size()));
    const auto m = b.map();
    for (Eigen::Index r = 0; r < b.rows; ++r) {
      for (Eigen::Index c = 0; c < b.cols; ++c) data.push_back(m(r, c));
    }
    out.push_back({{"name", b.name}, {"rows", b.rows}, {"cols", b.cols}, {"data", data}});
  }
  return out;
}

namespace {

void load_blocks(ModelParams<double>& params, const json& j) {
  const auto refs = blocks(params);
  if (j.size() != refs.size()) throw ConfigError("checkpoint block count mismatch");
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const auto& entry = j.at(k);
    const auto& ref = refs[k];
    if (entry.at("name").get<std::string>() != ref.name ||
        entry.at("rows").get<Eigen::Index>() != ref.rows ||
        entry.at("cols").get<Eigen::Index>() != ref.cols) {
      throw ConfigError("checkpoint block '" + ref.name + "' does not match architecture");
    }
    const auto& data = entry.at("data");
    if (static_cast<Eigen::Index>(data.size()) != ref.size()) {
      throw ConfigError("checkpoint block '" + ref.name + "' has wrong length");
    }
    auto m = ref.map();
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < ref.rows; ++r) {
      for (Eigen::Index c = 0; c < ref.cols; ++c) m(r, c) = data[i++].get<double>();
    }
  }
}

}  // namespace

ModelParams<double> params_from_json(const json& j) {
  auto params = ModelParams<double>::zeros(architecture_from_json(j.at("architecture")));
  load_blocks(params, j.at("blocks"));
  return params;
}

json to_json(const TrafficModel& model) {
  std::vector<double> mean(model.norm.mean.data(), model.norm.mean.data() + model.norm.mean.size());
  std::vector<double> scale(model.norm.scale.data(),
                            model.norm.scale.data() + model.norm.scale.size());
  return {{"format", "rachpred-traffic-model"},
          {"version", kCheckpointVersion},
          {"architecture", architecture_to_json(model.params.architecture())},
          {"normalization", {{"mean", mean}, {"scale", scale}}},
          {"output_ceiling", model.output_ceiling},
          {"blocks", params_to_json(model.params)}};
}

TrafficModel traffic_model_from_json(const json& j) {
  if (j.value("format", "") != "rachpred-traffic-model") {
    throw ConfigError("not a traffic-model checkpoint");
  }
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version");
  }
  TrafficModel model;
  model.params = params_from_json(j);
  const auto mean = j.at("normalization").at("mean").get<std::vector<double>>();
  const auto scale = j.at("normalization").at("scale").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(mean.size()) != model.params.input_size() || scale.size() != mean.size()) {
    throw ConfigError("normalization size does not match the model");
  }
  model.norm.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  model.norm.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  model.output_ceiling = j.at("output_ceiling").get<double>();
  return model;
}

void save_checkpoint(const TrafficModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_json(model).dump() << '\n';
}

TrafficModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return traffic_model_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigError("malformed checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace rachpred::nn
