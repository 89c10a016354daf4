#pragma once

#include <random>
#include <vector>

#include "rachpred/common/rng.hpp"
#include "rachpred/nn/recurrent.hpp"

namespace rachpred::nn {

/// Affine layer whose input is the row-wise concatenation of earlier
/// activations. Source 0 is the head input, source k the output of layer k.
template <typename Scalar>
struct DenseLayerParams {
  Matrix<Scalar> w;  // out x (sum of source sizes)
  Vector<Scalar> b;
  std::vector<int> sources;
};

/// Feed-forward head with feature-concatenation shortcuts. Hidden layers use
/// a rectifier, the last layer is linear. Dropout acts on the head input and
/// on every hidden activation, in training mode only.
template <typename Scalar>
struct DenseHeadParams {
  Eigen::Index input_size = 0;
  std::vector<DenseLayerParams<Scalar>> layers;
  double dropout = 0.0;

  Eigen::Index output_size() const { return layers.empty() ? input_size : layers.back().w.rows(); }

  Eigen::Index source_size(int source) const {
    return source == 0 ? input_size : layers[static_cast<std::size_t>(source - 1)].w.rows();
  }

  void check() const {
    if (!(dropout >= 0.0 && dropout < 1.0)) throw DimensionError("dropout outside [0,1)");
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const auto& layer = layers[k];
      Eigen::Index wired = 0;
      if (layer.sources.empty()) throw DimensionError("dense layer without inputs");
      for (int s : layer.sources) {
        if (s < 0 || s > static_cast<int>(k)) throw DimensionError("dense wiring refers forward");
        wired += source_size(s);
      }
      if (layer.w.cols() != wired || layer.b.size() != layer.w.rows()) {
        throw DimensionError("dense layer input size differs from its wired inputs");
      }
    }
  }
};

template <typename Scalar>
struct DenseCache {
  std::vector<Matrix<Scalar>> activations;  // [0] head input after dropout, [k] layer k output
  std::vector<Matrix<Scalar>> masks;        // dropout masks, empty when unused
  std::vector<Matrix<Scalar>> inputs;       // concatenated input of each layer
  std::vector<Matrix<Scalar>> pre;          // pre-activation of each layer
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> gather(const std::vector<Matrix<Scalar>>& acts, const std::vector<int>& sources,
                      Eigen::Index rows) {
  const Eigen::Index cols = acts[0].cols();
  Matrix<Scalar> out(rows, cols);
  Eigen::Index offset = 0;
  for (int s : sources) {
    const auto& a = acts[static_cast<std::size_t>(s)];
    out.middleRows(offset, a.rows()) = a;
    offset += a.rows();
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  std::bernoulli_distribution keep(1.0 - p);
  const Scalar scale = Scalar(1) / Scalar(1.0 - p);
  Matrix<Scalar> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = keep(rng) ? scale : Scalar(0);
  }
  return m;
}

}  // namespace detail

template <typename Scalar>
Matrix<Scalar> dense_head_forward(const Matrix<Scalar>& features,
                                  const DenseHeadParams<Scalar>& head, bool train_mode,
                                  Rng* rng, DenseCache<Scalar>* cache = nullptr) {
  if (features.rows() != head.input_size) throw DimensionError("head input size mismatch");
  const bool drop = train_mode && head.dropout > 0.0;
  if (drop && rng == nullptr) throw std::invalid_argument("dropout needs an rng");

  std::vector<Matrix<Scalar>> acts;
  std::vector<Matrix<Scalar>> masks(head.layers.size() + 1);
  acts.reserve(head.layers.size() + 1);
  acts.push_back(features);
  if (drop) {
    masks[0] = detail::dropout_mask<Scalar>(features.rows(), features.cols(), head.dropout, *rng);
    acts[0].array() *= masks[0].array();
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  for (std::size_t k = 0; k < head.layers.size(); ++k) {
    const auto& layer = head.layers[k];
    Matrix<Scalar> in = detail::gather(acts, layer.sources, layer.w.cols());
    Matrix<Scalar> z = layer.w * in;
    z.colwise() += layer.b;
    const bool last = k + 1 == head.layers.size();
    Matrix<Scalar> a = last ? z : Matrix<Scalar>(z.cwiseMax(Scalar(0)));
    if (drop && !last) {
      masks[k + 1] = detail::dropout_mask<Scalar>(a.rows(), a.cols(), head.dropout, *rng);
      a.array() *= masks[k + 1].array();
    }
    if (cache) {
      cache->inputs.push_back(std::move(in));
      cache->pre.push_back(std::move(z));
    }
    acts.push_back(std::move(a));
  }
  Matrix<Scalar> out = acts.back();
  if (cache) {
    cache->activations = std::move(acts);
    cache->masks = std::move(masks);
  }
  return out;
}

/// Backpropagates `d_out` through the head, accumulating into `grad`, and
/// returns the gradient with respect to the head input.
template <typename Scalar>
Matrix<Scalar> dense_head_backward(const DenseCache<Scalar>& cache,
                                   const DenseHeadParams<Scalar>& head, const Matrix<Scalar>& d_out,
                                   DenseHeadParams<Scalar>& grad) {
  const std::size_t n = head.layers.size();
  std::vector<Matrix<Scalar>> d_acts(n + 1);
  for (std::size_t s = 0; s <= n; ++s) {
    d_acts[s] = Matrix<Scalar>::Zero(cache.activations[s].rows(), d_out.cols());
  }
  d_acts[n] += d_out;
  for (std::size_t k = n; k-- > 0;) {
    const auto& layer = head.layers[k];
    Matrix<Scalar> dz = d_acts[k + 1];
    if (k + 1 < n) {
      if (cache.masks[k + 1].size() > 0) dz.array() *= cache.masks[k + 1].array();
      dz.array() *= (cache.pre[k].array() > Scalar(0)).template cast<Scalar>();
    }
    grad.layers[k].w.noalias() += dz * cache.inputs[k].transpose();
    grad.layers[k].b += dz.rowwise().sum();
    const Matrix<Scalar> d_in = layer.w.transpose() * dz;
    Eigen::Index offset = 0;
    for (int s : layer.sources) {
      auto& target = d_acts[static_cast<std::size_t>(s)];
      target += d_in.middleRows(offset, target.rows());
      offset += target.rows();
    }
  }
  Matrix<Scalar> d_features = d_acts[0];
  if (cache.masks[0].size() > 0) d_features.array() *= cache.masks[0].array();
  return d_features;
}

}  // namespace rachpred::nn
