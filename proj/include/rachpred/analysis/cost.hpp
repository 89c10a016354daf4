#pragma once

#include <cstdint>
#include <vector>

#include <boost/rational.hpp>
#include <json.hpp>

#include "rachpred/nn/model.hpp"
#include "rachpred/predict/chunks.hpp"

namespace rachpred::analysis {

using Count = std::int64_t;
using Rational = boost::rational<Count>;

enum class Family { Lstm, Gru, Cnn1d };

const char* to_string(Family family);
Family parse_family(const std::string& name);

/// One fully connected layer; `inputs` already includes concatenated sources.
struct DenseDesc {
  Count inputs = 0;
  Count outputs = 0;
};

struct ConvDesc {
  Count channels = 0;  // C_l
  Count kernel = 0;    // K_l
};

struct ArchDescriptor {
  Family family = Family::Lstm;
  Count input_size = 2;       // h_0 = d, or C_0 for CNN-1D
  std::vector<Count> hidden;  // recurrent h_1..h_L
  std::vector<DenseDesc> dense;
  Count window = 0;  // CNN-1D input length W
  std::vector<ConvDesc> conv;

  /// Positive sizes; consecutive plain dense layers must chain.
  void validate() const;
};

/// Descriptor of a built model (concatenation-aware dense inputs).
ArchDescriptor describe(const nn::Architecture& arch);

/// LSTM: Σ 4h_l(h_{l-1}+h_l+2) + Σ m_l(m_{l-1}+1); GRU uses 3; CNN-1D:
/// Σ C_l(C_{l-1}K_l+1) + Σ m_l(m_{l-1}+1).
Count param_count(const ArchDescriptor& arch);

/// Cost of one recurrent-plus-dense evaluation under the closed-form
/// convention: Σ(8h_l(h_{l-1}+h_l) + 29h_l) + Σ 2m_l m_{l-1} for LSTM,
/// 6 and 22 for GRU.
Count flops_per_evaluation(const ArchDescriptor& arch);

/// FLOPs per emitted output slot. Recurrent families scale the evaluation
/// cost by (l_buff+l_p)/l_f (rolling) or (l_f+l_p)/l_f (FLSP). CNN-1D only
/// supports rolling.
Rational flops_per_step(const ArchDescriptor& arch, const predict::StreamingConfig& streaming,
                        predict::Driver driver);

/// (l_f + l_p) / (l_buff + l_p).
Rational complexity_ratio(const predict::StreamingConfig& streaming);

struct CostReport {
  Count parameters = 0;
  Rational flops_rolling{0};
  Rational flops_flsp{0};  // zero for CNN-1D
  Rational ratio{0};       // FLSP / rolling, zero for CNN-1D
};

CostReport cost_report(const ArchDescriptor& arch, const predict::StreamingConfig& streaming);

/// Counters measured on a finished stream run.
struct EmpiricalCost {
  Count steps = 0;
  Count step_evaluations = 0;     // cell evaluations spent in driver steps
  Count warmup_evaluations = 0;
  Count emitted_slots = 0;
  Rational evaluations_per_slot{0};
  Rational flops_per_slot{0};  // evaluations_per_slot * flops_per_evaluation
};

EmpiricalCost empirical_cost(const predict::StreamRun& run, const ArchDescriptor& arch);

nlohmann::json to_json(const ArchDescriptor& arch);
ArchDescriptor arch_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CostReport& report);
nlohmann::json to_json(const EmpiricalCost& cost);

}  // namespace rachpred::analysis
