#pragma once

#include <cstdint>
#include <vector>

#include "rachpred/predict/chunks.hpp"

namespace rachpred::predict {

struct LeadError {
  std::int64_t lead_slots = 0;
  double mse = 0.0;        // mean over both features and all matched slots
  std::int64_t count = 0;  // matched (prediction, truth) slots
};

/// MSE at each lead T (in slots): compares every prediction whose lead lies
/// in (T - l_f, T] against the true slot, i.e. the emitted stream that a run
/// with l_p = T would have produced. Predictions past the end of `truth`
/// are skipped.
std::vector<LeadError> evaluate_stream(const std::vector<PredictionBlock>& blocks,
                                       const Series& truth, int l_f,
                                       const std::vector<std::int64_t>& leads);

/// MSE of an emitted sequence starting at `first_slot` against `truth`.
LeadError emitted_error(const Series& emitted, std::int64_t first_slot, const Series& truth);

}  // namespace rachpred::predict
