#pragma once

#include <cmath>
#include <vector>

#include "rachpred/nn/model.hpp"

namespace rachpred::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Scalar>
struct AdamMoments {
  std::vector<Matrix<Scalar>> m;
  std::vector<Matrix<Scalar>> v;
  long step = 0;
};

/// One bias-corrected Adam update over matching block lists.
template <typename Scalar>
void adam_step(const std::vector<BlockRef<Scalar>>& params,
               const std::vector<BlockRef<Scalar>>& grads, AdamMoments<Scalar>& moments,
               const AdamConfig& cfg) {
  if (params.size() != grads.size()) throw DimensionError("adam: block count mismatch");
  if (moments.m.empty()) {
    for (const auto& p : params) {
      moments.m.push_back(Matrix<Scalar>::Zero(p.rows, p.cols));
      moments.v.push_back(Matrix<Scalar>::Zero(p.rows, p.cols));
    }
  }
  ++moments.step;
  const Scalar b1 = Scalar(cfg.beta1);
  const Scalar b2 = Scalar(cfg.beta2);
  const Scalar correction1 = Scalar(1) - std::pow(b1, Scalar(moments.step));
  const Scalar correction2 = Scalar(1) - std::pow(b2, Scalar(moments.step));
  const Scalar lr = Scalar(cfg.learning_rate);
  const Scalar eps = Scalar(cfg.epsilon);
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].rows != grads[k].rows || params[k].cols != grads[k].cols) {
      throw DimensionError("adam: block shape mismatch for " + params[k].name);
    }
    auto p = params[k].map();
    const auto g = grads[k].map();
    auto& m = moments.m[k];
    auto& v = moments.v[k];
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v + (Scalar(1) - b2) * g.cwiseProduct(g);
    p.array() -= lr * (m.array() / correction1) /
                 ((v.array() / correction2).sqrt() + eps);
  }
}

template <typename Scalar>
void adam_step(ModelParams<Scalar>& params, ModelParams<Scalar>& grads,
               AdamMoments<Scalar>& moments, const AdamConfig& cfg) {
  adam_step(blocks(params), blocks(grads), moments, cfg);
}

}  // namespace rachpred::nn
