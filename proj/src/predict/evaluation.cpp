#include "rachpred/predict/evaluation.hpp"

#include "rachpred/common/errors.hpp"

namespace rachpred::predict {

std::vector<LeadError> evaluate_stream(const std::vector<PredictionBlock>& blocks,
                                       const Series& truth, int l_f,
                                       const std::vector<std::int64_t>& leads) {
  std::vector<LeadError> out;
  for (std::int64_t lead : leads) {
    if (lead < 1) throw ConfigError("lead must be at least one slot");
    LeadError e;
    e.lead_slots = lead;
    double sum = 0.0;
    for (const auto& block : blocks) {
      if (block.values.cols() < lead) throw ConfigError("lead exceeds the prediction horizon");
      const std::int64_t lo = std::max<std::int64_t>(lead - l_f, 0);  // exclusive
      for (std::int64_t j = lo; j < lead; ++j) {
        const std::int64_t slot = block.origin + 1 + j;
        if (slot >= truth.cols()) break;
        sum += (block.values.col(j) - truth.col(slot)).squaredNorm();
        ++e.count;
      }
    }
    e.mse = e.count == 0 ? 0.0 : sum / static_cast<double>(e.count * truth.rows());
    out.push_back(e);
  }
  return out;
}

LeadError emitted_error(const Series& emitted, std::int64_t first_slot, const Series& truth) {
  LeadError e;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < emitted.cols(); ++j) {
    const std::int64_t slot = first_slot + j;
    if (slot < 0 || slot >= truth.cols()) continue;
    sum += (emitted.col(j) - truth.col(slot)).squaredNorm();
    ++e.count;
  }
  e.mse = e.count == 0 ? 0.0 : sum / static_cast<double>(e.count * truth.rows());
  return e;
}

}  // namespace rachpred::predict
