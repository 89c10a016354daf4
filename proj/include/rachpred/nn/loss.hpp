#pragma once

#include <vector>

#include "rachpred/nn/recurrent.hpp"

namespace rachpred::nn {

/// Mean of squared differences over every element.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar mse_loss(const Eigen::MatrixBase<DerivedA>& pred,
                                   const Eigen::MatrixBase<DerivedB>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("mse_loss: shape mismatch");
  }
  if (pred.size() == 0) return 0;
  return (pred - target).squaredNorm() / static_cast<typename DerivedA::Scalar>(pred.size());
}

template <typename Scalar>
Scalar mse_loss(const std::vector<Matrix<Scalar>>& pred, const std::vector<Matrix<Scalar>>& target) {
  if (pred.size() != target.size()) throw DimensionError("mse_loss: sequence length mismatch");
  Scalar sum = 0;
  Eigen::Index count = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].rows() != target[t].rows() || pred[t].cols() != target[t].cols()) {
      throw DimensionError("mse_loss: shape mismatch");
    }
    sum += (pred[t] - target[t]).squaredNorm();
    count += pred[t].size();
  }
  return count == 0 ? Scalar(0) : sum / static_cast<Scalar>(count);
}

}  // namespace rachpred::nn
