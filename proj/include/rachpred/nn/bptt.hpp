#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "rachpred/nn/loss.hpp"
#include "rachpred/nn/model.hpp"

namespace rachpred::nn {

/// T steps of a batch: inputs[t] is d x B, targets[t] is outputs x B.
template <typename Scalar>
struct SequenceBatch {
  std::vector<Matrix<Scalar>> inputs;
  std::vector<Matrix<Scalar>> targets;

  Eigen::Index steps() const { return static_cast<Eigen::Index>(inputs.size()); }
};

template <typename Scalar>
struct GradientResult {
  Scalar loss = 0;
  ModelParams<Scalar> grads;
  RecurrentState<Scalar> final_state;
};

/// Exact gradients of loss_scale * mse over the unrolled window, starting
/// from `initial` (treated as a constant). Dropout is active only when
/// `train_mode` is set. Throws NumericError on non-finite loss or gradients.
template <typename Scalar>
GradientResult<Scalar> bptt_gradients(const ModelParams<Scalar>& params,
                                      const SequenceBatch<Scalar>& batch,
                                      const RecurrentState<Scalar>& initial, bool train_mode,
                                      Rng* rng, Scalar loss_scale = Scalar(1)) {
  const auto T = static_cast<std::size_t>(batch.steps());
  const std::size_t L = params.recurrent.size();
  if (batch.targets.size() != T) throw DimensionError("bptt: inputs and targets differ in length");
  if (initial.size() != L) throw DimensionError("bptt: state depth mismatch");
  const bool lstm = params.kind() == CellKind::Lstm;

  std::vector<std::vector<LstmStepCache<Scalar>>> lstm_cache(lstm ? L : 0,
                                                             std::vector<LstmStepCache<Scalar>>(T));
  std::vector<std::vector<GruStepCache<Scalar>>> gru_cache(lstm ? 0 : L,
                                                           std::vector<GruStepCache<Scalar>>(T));
  std::vector<DenseCache<Scalar>> head_cache(T);
  std::vector<Matrix<Scalar>> d_out(T);

  GradientResult<Scalar> result;
  result.grads = ModelParams<Scalar>::zeros(params.architecture());
  RecurrentState<Scalar> state = initial;
  Eigen::Index count = 0;
  Scalar sum_sq = 0;

  for (std::size_t t = 0; t < T; ++t) {
    const Matrix<Scalar>* in = &batch.inputs[t];
    for (std::size_t l = 0; l < L; ++l) {
      state[l] = lstm ? lstm_cell_forward(*in, state[l], params.recurrent[l], &lstm_cache[l][t])
                      : gru_cell_forward(*in, state[l], params.recurrent[l], &gru_cache[l][t]);
      in = &state[l].h;
    }
    const Matrix<Scalar> out = dense_head_forward(*in, params.head, train_mode, rng, &head_cache[t]);
    if (out.rows() != batch.targets[t].rows() || out.cols() != batch.targets[t].cols()) {
      throw DimensionError("bptt: target shape mismatch");
    }
    d_out[t] = out - batch.targets[t];
    sum_sq += d_out[t].squaredNorm();
    count += d_out[t].size();
  }
  result.final_state = state;
  result.loss = count == 0 ? Scalar(0) : loss_scale * sum_sq / static_cast<Scalar>(count);
  if (!std::isfinite(static_cast<double>(result.loss))) throw NumericError("non-finite loss");
  if (count == 0) return result;
  const Scalar coef = Scalar(2) * loss_scale / static_cast<Scalar>(count);

  std::vector<Matrix<Scalar>> dh(L), dc(L);
  for (std::size_t l = 0; l < L; ++l) {
    dh[l] = Matrix<Scalar>::Zero(params.recurrent[l].hidden(), initial[l].h.cols());
    dc[l] = Matrix<Scalar>::Zero(params.recurrent[l].hidden(), initial[l].h.cols());
  }
  Matrix<Scalar> dx, dh_prev, dc_prev;
  for (std::size_t t = T; t-- > 0;) {
    Matrix<Scalar> d_below =
        dense_head_backward(head_cache[t], params.head, Matrix<Scalar>(coef * d_out[t]),
                            result.grads.head);
    for (std::size_t l = L; l-- > 0;) {
      const Matrix<Scalar> d_h = dh[l] + d_below;
      if (lstm) {
        lstm_cell_backward(lstm_cache[l][t], params.recurrent[l], d_h, dc[l],
                           result.grads.recurrent[l], dx, dh_prev, dc_prev);
        dc[l] = dc_prev;
      } else {
        gru_cell_backward(gru_cache[l][t], params.recurrent[l], d_h, result.grads.recurrent[l],
                          dx, dh_prev);
      }
      dh[l] = dh_prev;
      d_below = dx;
    }
  }

  for (const auto& b : blocks(result.grads)) {
    if (!b.map().allFinite()) throw NumericError("non-finite gradient in " + b.name);
  }
  return result;
}

}  // namespace rachpred::nn
