#include "rachpred/analysis/cost.hpp"

#include <string>

#include "rachpred/common/errors.hpp"

namespace rachpred::analysis {

const char* to_string(Family family) {
  switch (family) {
    case Family::Lstm: return "lstm";
    case Family::Gru: return "gru";
    case Family::Cnn1d: return "cnn1d";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "lstm") return Family::Lstm;
  if (name == "gru") return Family::Gru;
  if (name == "cnn1d") return Family::Cnn1d;
  throw ConfigError("unknown architecture family '" + name + "'");
}

void ArchDescriptor::validate() const {
  if (input_size < 1) throw ConfigError("input size must be positive");
  for (Count h : hidden) {
    if (h < 1) throw ConfigError("hidden sizes must be positive");
  }
  for (const auto& d : dense) {
    if (d.inputs < 1 || d.outputs < 1) throw ConfigError("dense sizes must be positive");
  }
  if (family == Family::Cnn1d) {
    if (!hidden.empty()) throw ConfigError("cnn1d descriptor has recurrent layers");
    if (window < 1 || conv.empty()) throw ConfigError("cnn1d needs a window and conv layers");
    for (const auto& c : conv) {
      if (c.channels < 1 || c.kernel < 1) throw ConfigError("conv sizes must be positive");
    }
  } else if (hidden.empty()) {
    throw ConfigError("recurrent descriptor needs at least one layer");
  }
}

ArchDescriptor describe(const nn::Architecture& arch) {
  ArchDescriptor d;
  d.family = arch.kind == nn::CellKind::Lstm ? Family::Lstm : Family::Gru;
  d.input_size = arch.input_size;
  for (int h : arch.hidden) d.hidden.push_back(h);
  const Count head_input = arch.hidden.back();
  for (const auto& layer : arch.dense) {
    Count in = 0;
    for (int s : layer.sources) {
      in += s == 0 ? head_input : arch.dense.at(static_cast<std::size_t>(s - 1)).size;
    }
    d.dense.push_back({in, layer.size});
  }
  return d;
}

namespace {

Count dense_params(const ArchDescriptor& a) {
  Count p = 0;
  for (const auto& d : a.dense) p += d.outputs * (d.inputs + 1);
  return p;
}

Count dense_flops(const ArchDescriptor& a) {
  Count f = 0;
  for (const auto& d : a.dense) f += 2 * d.outputs * d.inputs;
  return f;
}

}  // namespace

Count param_count(const ArchDescriptor& arch) {
  arch.validate();
  Count p = dense_params(arch);
  if (arch.family == Family::Cnn1d) {
    Count prev = arch.input_size;
    for (const auto& c : arch.conv) {
      p += c.channels * (prev * c.kernel + 1);
      prev = c.channels;
    }
    return p;
  }
  const Count gates = arch.family == Family::Lstm ? 4 : 3;
  Count prev = arch.input_size;
  for (Count h : arch.hidden) {
    p += gates * h * (prev + h + 2);
    prev = h;
  }
  return p;
}

Count flops_per_evaluation(const ArchDescriptor& arch) {
  arch.validate();
  if (arch.family == Family::Cnn1d) throw ConfigError("cnn1d has no per-evaluation recurrence");
  const Count mul = arch.family == Family::Lstm ? 8 : 6;
  const Count elementwise = arch.family == Family::Lstm ? 29 : 22;
  Count f = dense_flops(arch);
  Count prev = arch.input_size;
  for (Count h : arch.hidden) {
    f += mul * h * (prev + h) + elementwise * h;
    prev = h;
  }
  return f;
}

Rational flops_per_step(const ArchDescriptor& arch, const predict::StreamingConfig& s,
                        predict::Driver driver) {
  if (s.l_f < 1 || s.l_p < 0 || s.l_buff < 0) throw ConfigError("invalid streaming geometry");
  if (arch.family == Family::Cnn1d) {
    if (driver != predict::Driver::Rolling) throw ConfigError("cnn1d supports only the rolling driver");
    arch.validate();
    Rational conv{0};
    Count prev = arch.input_size;
    Count scale = 1;
    for (const auto& c : arch.conv) {
      scale *= 2;
      conv += Rational(arch.window, scale) * c.channels * (Rational(2 * prev * c.kernel) + Rational(1, 2));
      prev = c.channels;
    }
    Count fc = 0;
    for (const auto& d : arch.dense) fc += 2 * d.outputs * d.inputs + d.outputs;
    if (!arch.dense.empty()) fc -= arch.dense.back().outputs;
    return (conv + fc) / Count{s.l_f};
  }
  const Count inputs = driver == predict::Driver::Flsp ? s.l_f : s.l_buff;
  return Rational(inputs + s.l_p, s.l_f) * flops_per_evaluation(arch);
}

Rational complexity_ratio(const predict::StreamingConfig& s) {
  if (s.l_buff + s.l_p < 1) throw ConfigError("l_buff + l_p must be positive");
  return Rational(Count{s.l_f} + s.l_p, Count{s.l_buff} + s.l_p);
}

CostReport cost_report(const ArchDescriptor& arch, const predict::StreamingConfig& streaming) {
  CostReport r;
  r.parameters = param_count(arch);
  r.flops_rolling = flops_per_step(arch, streaming, predict::Driver::Rolling);
  if (arch.family != Family::Cnn1d) {
    r.flops_flsp = flops_per_step(arch, streaming, predict::Driver::Flsp);
    r.ratio = r.flops_flsp / r.flops_rolling;
  }
  return r;
}

EmpiricalCost empirical_cost(const predict::StreamRun& run, const ArchDescriptor& arch) {
  EmpiricalCost c;
  c.steps = static_cast<Count>(run.step_evaluations.size());
  for (Count e : run.step_evaluations) c.step_evaluations += e;
  c.warmup_evaluations = run.warmup_evaluations;
  c.emitted_slots = run.emitted.cols();
  if (c.emitted_slots > 0) {
    c.evaluations_per_slot = Rational(c.step_evaluations, c.emitted_slots);
    c.flops_per_slot = c.evaluations_per_slot * flops_per_evaluation(arch);
  }
  return c;
}

namespace {

nlohmann::json rational_json(const Rational& r) {
  return {{"numerator", r.numerator()},
          {"denominator", r.denominator()},
          {"value", boost::rational_cast<double>(r)}};
}

}  // namespace

nlohmann::json to_json(const ArchDescriptor& a) {
  nlohmann::json j{{"family", to_string(a.family)}, {"input_size", a.input_size}, {"hidden", a.hidden}};
  auto& dense = j["dense"] = nlohmann::json::array();
  for (const auto& d : a.dense) dense.push_back({{"inputs", d.inputs}, {"outputs", d.outputs}});
  if (a.family == Family::Cnn1d) {
    j["window"] = a.window;
    auto& conv = j["conv"] = nlohmann::json::array();
    for (const auto& c : a.conv) conv.push_back({{"channels", c.channels}, {"kernel", c.kernel}});
  }
  return j;
}

ArchDescriptor arch_from_json(const nlohmann::json& j) {
  try {
    ArchDescriptor a;
    a.family = parse_family(j.at("family").get<std::string>());
    a.input_size = j.at("input_size").get<Count>();
    a.hidden = j.value("hidden", std::vector<Count>{});
    for (const auto& d : j.value("dense", nlohmann::json::array())) {
      a.dense.push_back({d.at("inputs").get<Count>(), d.at("outputs").get<Count>()});
    }
    a.window = j.value("window", Count{0});
    for (const auto& c : j.value("conv", nlohmann::json::array())) {
      a.conv.push_back({c.at("channels").get<Count>(), c.at("kernel").get<Count>()});
    }
    a.validate();
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed architecture descriptor: ") + e.what());
  }
}

nlohmann::json to_json(const CostReport& r) {
  return {{"parameters", r.parameters},
          {"flops_rolling", rational_json(r.flops_rolling)},
          {"flops_flsp", rational_json(r.flops_flsp)},
          {"ratio", rational_json(r.ratio)}};
}

nlohmann::json to_json(const EmpiricalCost& c) {
  return {{"steps", c.steps},
          {"step_evaluations", c.step_evaluations},
          {"warmup_evaluations", c.warmup_evaluations},
          {"emitted_slots", c.emitted_slots},
          {"evaluations_per_slot", rational_json(c.evaluations_per_slot)},
          {"flops_per_slot", rational_json(c.flops_per_slot)}};
}

}  // namespace rachpred::analysis
