#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rachpred/nn/dense.hpp"

namespace rachpred::nn {

struct DenseLayerSpec {
  Eigen::Index size = 0;
  std::vector<int> sources;
};

/// Shape of a recurrent stack followed by a dense head.
struct Architecture {
  CellKind kind = CellKind::Lstm;
  Eigen::Index input_size = 2;
  std::vector<Eigen::Index> hidden{64, 64};
  std::vector<DenseLayerSpec> dense{{64, {0}}, {2, {1, 0}}};
  double dropout = 0.0;

  /// Two recurrent layers of width h, then h -> h and concat(2h) -> outputs.
  static Architecture desk(CellKind kind, Eigen::Index h, Eigen::Index features = 2) {
    Architecture a;
    a.kind = kind;
    a.input_size = features;
    a.hidden = {h, h};
    a.dense = {{h, {0}}, {features, {1, 0}}};
    return a;
  }
};

template <typename Scalar>
struct ModelParams {
  std::vector<RecurrentLayerParams<Scalar>> recurrent;
  DenseHeadParams<Scalar> head;

  Eigen::Index input_size() const { return recurrent.front().input_size(); }
  Eigen::Index output_size() const { return head.output_size(); }
  CellKind kind() const { return recurrent.front().kind; }

  void check() const {
    if (recurrent.empty()) throw DimensionError("model without recurrent layers");
    Eigen::Index expected = recurrent.front().input_size();
    for (const auto& layer : recurrent) {
      layer.check();
      if (layer.input_size() != expected) throw DimensionError("recurrent stack sizes disagree");
      expected = layer.hidden();
    }
    if (head.input_size != expected) throw DimensionError("head input differs from last hidden");
    head.check();
  }

  Architecture architecture() const {
    Architecture a;
    a.kind = kind();
    a.input_size = input_size();
    a.hidden.clear();
    for (const auto& l : recurrent) a.hidden.push_back(l.hidden());
    a.dense.clear();
    for (const auto& l : head.layers) a.dense.push_back({l.w.rows(), l.sources});
    a.dropout = head.dropout;
    return a;
  }

  /// All-zero parameters of the given shape.
  static ModelParams zeros(const Architecture& arch) {
    ModelParams p;
    Eigen::Index in = arch.input_size;
    for (Eigen::Index h : arch.hidden) {
      p.recurrent.push_back(RecurrentLayerParams<Scalar>::zeros(arch.kind, in, h));
      in = h;
    }
    p.head.input_size = in;
    p.head.dropout = arch.dropout;
    for (const auto& spec : arch.dense) {
      DenseLayerParams<Scalar> layer;
      layer.sources = spec.sources;
      Eigen::Index cols = 0;
      for (int s : spec.sources) cols += p.head.source_size(s);
      layer.w = Matrix<Scalar>::Zero(spec.size, cols);
      layer.b = Vector<Scalar>::Zero(spec.size);
      p.head.layers.push_back(std::move(layer));
    }
    p.check();
    return p;
  }

  /// Uniform in [-1/sqrt(fan), 1/sqrt(fan)] where fan is the layer's hidden
  /// size for recurrent blocks and the input width for dense blocks.
  /// `memory_bias` is added to the input-side bias of the gate that keeps the
  /// previous state (LSTM forget gate, GRU update gate).
  static ModelParams initialize(const Architecture& arch, Rng& rng, double memory_bias = 0.0) {
    ModelParams p = zeros(arch);
    auto fill = [&rng](auto& m, double bound) {
      std::uniform_real_distribution<double> u(-bound, bound);
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = static_cast<Scalar>(u(rng));
      }
    };
    for (auto& l : p.recurrent) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(l.hidden()));
      fill(l.w_ih, bound);
      fill(l.w_hh, bound);
      fill(l.b_ih, bound);
      fill(l.b_hh, bound);
      l.b_ih.segment(l.hidden(), l.hidden()).array() += static_cast<Scalar>(memory_bias);
    }
    for (auto& l : p.head.layers) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(l.w.cols()));
      fill(l.w, bound);
      fill(l.b, bound);
    }
    return p;
  }
};

/// Named view of one parameter block; used by the optimizer, gradient
/// checks and checkpoint serialization.
template <typename Scalar>
struct BlockRef {
  std::string name;
  Scalar* data;
  Eigen::Index rows;
  Eigen::Index cols;

  Eigen::Index size() const { return rows * cols; }
  Eigen::Map<Matrix<Scalar>> map() const { return {data, rows, cols}; }
};

/// Parameter blocks in a fixed order: per recurrent layer w_ih, w_hh, b_ih,
/// b_hh; then per dense layer w, b.
template <typename Scalar>
std::vector<BlockRef<Scalar>> blocks(ModelParams<Scalar>& p) {
  std::vector<BlockRef<Scalar>> out;
  auto add = [&out](std::string name, auto& m) {
    out.push_back({std::move(name), m.data(), m.rows(), m.cols()});
  };
  for (std::size_t l = 0; l < p.recurrent.size(); ++l) {
    const std::string prefix = "recurrent." + std::to_string(l) + ".";
    add(prefix + "w_ih", p.recurrent[l].w_ih);
    add(prefix + "w_hh", p.recurrent[l].w_hh);
    add(prefix + "b_ih", p.recurrent[l].b_ih);
    add(prefix + "b_hh", p.recurrent[l].b_hh);
  }
  for (std::size_t l = 0; l < p.head.layers.size(); ++l) {
    const std::string prefix = "dense." + std::to_string(l) + ".";
    add(prefix + "w", p.head.layers[l].w);
    add(prefix + "b", p.head.layers[l].b);
  }
  return out;
}

template <typename Scalar>
Eigen::Index parameter_count(const ModelParams<Scalar>& p) {
  Eigen::Index n = 0;
  for (const auto& b : blocks(const_cast<ModelParams<Scalar>&>(p))) n += b.size();
  return n;
}

template <typename Scalar>
RecurrentState<Scalar> zero_state(const ModelParams<Scalar>& p, Eigen::Index batch = 1) {
  RecurrentState<Scalar> s;
  for (const auto& l : p.recurrent) s.push_back(zero_layer_state(l, batch));
  return s;
}

template <typename Scalar>
LayerState<Scalar> cell_forward(const Matrix<Scalar>& x, const LayerState<Scalar>& prev,
                                const RecurrentLayerParams<Scalar>& p) {
  return p.kind == CellKind::Lstm ? lstm_cell_forward(x, prev, p) : gru_cell_forward(x, prev, p);
}

/// One time step of the full stack in inference mode. `state` is advanced in place.
template <typename Scalar>
Matrix<Scalar> model_step(const Matrix<Scalar>& x, const ModelParams<Scalar>& p,
                          RecurrentState<Scalar>& state) {
  if (state.size() != p.recurrent.size()) throw DimensionError("state depth mismatch");
  const Matrix<Scalar>* in = &x;
  for (std::size_t l = 0; l < p.recurrent.size(); ++l) {
    state[l] = cell_forward(*in, state[l], p.recurrent[l]);
    in = &state[l].h;
  }
  return dense_head_forward<Scalar>(*in, p.head, false, nullptr);
}

/// Runs a single sequence (one column per time step) from `state`, returning
/// one output column per step. `state` holds the carried state afterwards.
template <typename Scalar>
Matrix<Scalar> model_forward(const Matrix<Scalar>& sequence, const ModelParams<Scalar>& p,
                             RecurrentState<Scalar>& state) {
  Matrix<Scalar> out(p.output_size(), sequence.cols());
  for (Eigen::Index t = 0; t < sequence.cols(); ++t) {
    out.col(t) = model_step<Scalar>(sequence.col(t), p, state);
  }
  return out;
}

}  // namespace rachpred::nn
