#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rachpred/common/errors.hpp"

namespace rachpred::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class CellKind { Lstm, Gru };

constexpr Eigen::Index gate_count(CellKind kind) { return kind == CellKind::Lstm ? 4 : 3; }

inline const char* to_string(CellKind kind) { return kind == CellKind::Lstm ? "lstm" : "gru"; }

/// Weights of one gated recurrent layer. Gate blocks are stacked row-wise,
/// each `hidden` rows tall: LSTM [i, f, g, o], GRU [r, z, n].
template <typename Scalar>
struct RecurrentLayerParams {
  CellKind kind = CellKind::Lstm;
  Matrix<Scalar> w_ih;  // (gates*h) x d
  Matrix<Scalar> w_hh;  // (gates*h) x h
  Vector<Scalar> b_ih;
  Vector<Scalar> b_hh;

  Eigen::Index hidden() const { return w_hh.cols(); }
  Eigen::Index input_size() const { return w_ih.cols(); }

  static RecurrentLayerParams zeros(CellKind kind, Eigen::Index input, Eigen::Index hidden) {
    const Eigen::Index rows = gate_count(kind) * hidden;
    RecurrentLayerParams p;
    p.kind = kind;
    p.w_ih = Matrix<Scalar>::Zero(rows, input);
    p.w_hh = Matrix<Scalar>::Zero(rows, hidden);
    p.b_ih = Vector<Scalar>::Zero(rows);
    p.b_hh = Vector<Scalar>::Zero(rows);
    return p;
  }

  void check() const {
    const Eigen::Index rows = gate_count(kind) * hidden();
    if (hidden() <= 0 || w_hh.rows() != rows || w_ih.rows() != rows || b_ih.size() != rows ||
        b_hh.size() != rows) {
      throw DimensionError("recurrent layer blocks are not consistent with (h, d)");
    }
  }
};

template <typename Scalar>
using LstmLayerParams = RecurrentLayerParams<Scalar>;
template <typename Scalar>
using GruLayerParams = RecurrentLayerParams<Scalar>;

/// Hidden (and, for LSTM, cell) state of one layer; one column per sequence.
template <typename Scalar>
struct LayerState {
  Matrix<Scalar> h;
  Matrix<Scalar> c;  // empty for GRU

  bool operator==(const LayerState&) const = default;
};

template <typename Scalar>
using RecurrentState = std::vector<LayerState<Scalar>>;

template <typename Scalar>
LayerState<Scalar> zero_layer_state(const RecurrentLayerParams<Scalar>& p, Eigen::Index batch) {
  LayerState<Scalar> s;
  s.h = Matrix<Scalar>::Zero(p.hidden(), batch);
  if (p.kind == CellKind::Lstm) s.c = Matrix<Scalar>::Zero(p.hidden(), batch);
  return s;
}

template <typename Scalar>
struct LstmStepCache {
  Matrix<Scalar> x, h_prev, c_prev, i, f, g, o, c, tanh_c;
};

template <typename Scalar>
struct GruStepCache {
  Matrix<Scalar> x, h_prev, r, z, n, hn;  // hn = W_hn h_prev + b_hn
};

namespace detail {

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& z) {
  using S = typename Derived::Scalar;
  return z.unaryExpr([](S v) { return S(1) / (S(1) + std::exp(-v)); });
}

template <typename Derived>
auto tanh(const Eigen::MatrixBase<Derived>& z) {
  using S = typename Derived::Scalar;
  return z.unaryExpr([](S v) { return std::tanh(v); });
}

template <typename Scalar>
void check_step(const Matrix<Scalar>& x, const LayerState<Scalar>& prev,
                const RecurrentLayerParams<Scalar>& p) {
  if (x.rows() != p.input_size()) throw DimensionError("input size does not match layer");
  if (prev.h.rows() != p.hidden() || prev.h.cols() != x.cols()) {
    throw DimensionError("hidden state does not match layer");
  }
  if (p.kind == CellKind::Lstm && (prev.c.rows() != p.hidden() || prev.c.cols() != x.cols())) {
    throw DimensionError("cell state does not match layer");
  }
}

}  // namespace detail

/// One LSTM step:
///   i = σ(W_ii x + b_ii + W_hi h + b_hi), f, o likewise, g with tanh,
///   c' = f ⊙ c + i ⊙ g,  h' = o ⊙ tanh(c').
template <typename Scalar>
LayerState<Scalar> lstm_cell_forward(const Matrix<Scalar>& x, const LayerState<Scalar>& prev,
                                     const RecurrentLayerParams<Scalar>& p,
                                     LstmStepCache<Scalar>* cache = nullptr) {
  detail::check_step(x, prev, p);
  const Eigen::Index h = p.hidden();
  Matrix<Scalar> z = p.w_ih * x;
  z.noalias() += p.w_hh * prev.h;
  z.colwise() += p.b_ih + p.b_hh;

  Matrix<Scalar> i = detail::sigmoid(z.topRows(h));
  Matrix<Scalar> f = detail::sigmoid(z.middleRows(h, h));
  Matrix<Scalar> g = detail::tanh(z.middleRows(2 * h, h));
  Matrix<Scalar> o = detail::sigmoid(z.bottomRows(h));

  LayerState<Scalar> next;
  next.c = f.cwiseProduct(prev.c) + i.cwiseProduct(g);
  Matrix<Scalar> tanh_c = detail::tanh(next.c);
  next.h = o.cwiseProduct(tanh_c);
  if (cache) {
    *cache = {x, prev.h, prev.c, std::move(i), std::move(f), std::move(g), std::move(o), next.c,
              std::move(tanh_c)};
  }
  return next;
}

/// One GRU step (reset gate applied after the hidden projection):
///   r = σ(W_ir x + b_ir + W_hr h + b_hr), z likewise,
///   n = tanh(W_in x + b_in + r ⊙ (W_hn h + b_hn)),  h' = (1 − z) ⊙ n + z ⊙ h.
template <typename Scalar>
LayerState<Scalar> gru_cell_forward(const Matrix<Scalar>& x, const LayerState<Scalar>& prev,
                                    const RecurrentLayerParams<Scalar>& p,
                                    GruStepCache<Scalar>* cache = nullptr) {
  detail::check_step(x, prev, p);
  const Eigen::Index h = p.hidden();
  Matrix<Scalar> gi = p.w_ih * x;
  gi.colwise() += p.b_ih;
  Matrix<Scalar> gh = p.w_hh * prev.h;
  gh.colwise() += p.b_hh;

  Matrix<Scalar> r = detail::sigmoid(gi.topRows(h) + gh.topRows(h));
  Matrix<Scalar> z = detail::sigmoid(gi.middleRows(h, h) + gh.middleRows(h, h));
  Matrix<Scalar> hn = gh.bottomRows(h);
  Matrix<Scalar> n = detail::tanh(gi.bottomRows(h) + r.cwiseProduct(hn));

  LayerState<Scalar> next;
  next.h = n + z.cwiseProduct(prev.h - n);
  if (cache) {
    *cache = {x, prev.h, std::move(r), std::move(z), std::move(n), std::move(hn)};
  }
  return next;
}

/// Accumulates parameter gradients for one LSTM step into `grad` and writes
/// gradients w.r.t. the step input and the previous state.
template <typename Scalar>
void lstm_cell_backward(const LstmStepCache<Scalar>& k, const RecurrentLayerParams<Scalar>& p,
                        const Matrix<Scalar>& dh, const Matrix<Scalar>& dc_next,
                        RecurrentLayerParams<Scalar>& grad, Matrix<Scalar>& dx,
                        Matrix<Scalar>& dh_prev, Matrix<Scalar>& dc_prev) {
  const Eigen::Index h = p.hidden();
  const auto ones = Matrix<Scalar>::Ones(h, dh.cols());
  Matrix<Scalar> dc =
      dc_next + dh.cwiseProduct(k.o).cwiseProduct(ones - k.tanh_c.cwiseProduct(k.tanh_c));

  Matrix<Scalar> dz(4 * h, dh.cols());
  dz.topRows(h) = dc.cwiseProduct(k.g).cwiseProduct(k.i.cwiseProduct(ones - k.i));
  dz.middleRows(h, h) = dc.cwiseProduct(k.c_prev).cwiseProduct(k.f.cwiseProduct(ones - k.f));
  dz.middleRows(2 * h, h) = dc.cwiseProduct(k.i).cwiseProduct(ones - k.g.cwiseProduct(k.g));
  dz.bottomRows(h) = dh.cwiseProduct(k.tanh_c).cwiseProduct(k.o.cwiseProduct(ones - k.o));

  grad.w_ih.noalias() += dz * k.x.transpose();
  grad.w_hh.noalias() += dz * k.h_prev.transpose();
  const Vector<Scalar> db = dz.rowwise().sum();
  grad.b_ih += db;
  grad.b_hh += db;
  dx.noalias() = p.w_ih.transpose() * dz;
  dh_prev.noalias() = p.w_hh.transpose() * dz;
  dc_prev = dc.cwiseProduct(k.f);
}

template <typename Scalar>
void gru_cell_backward(const GruStepCache<Scalar>& k, const RecurrentLayerParams<Scalar>& p,
                       const Matrix<Scalar>& dh, RecurrentLayerParams<Scalar>& grad,
                       Matrix<Scalar>& dx, Matrix<Scalar>& dh_prev) {
  const Eigen::Index h = p.hidden();
  const auto ones = Matrix<Scalar>::Ones(h, dh.cols());
  const Matrix<Scalar> dn = dh.cwiseProduct(ones - k.z);
  const Matrix<Scalar> dzg = dh.cwiseProduct(k.h_prev - k.n);
  const Matrix<Scalar> da_n = dn.cwiseProduct(ones - k.n.cwiseProduct(k.n));
  const Matrix<Scalar> dr = da_n.cwiseProduct(k.hn);

  Matrix<Scalar> gi(3 * h, dh.cols());
  gi.topRows(h) = dr.cwiseProduct(k.r.cwiseProduct(ones - k.r));
  gi.middleRows(h, h) = dzg.cwiseProduct(k.z.cwiseProduct(ones - k.z));
  gi.bottomRows(h) = da_n;
  Matrix<Scalar> gh = gi;
  gh.bottomRows(h) = da_n.cwiseProduct(k.r);

  grad.w_ih.noalias() += gi * k.x.transpose();
  grad.w_hh.noalias() += gh * k.h_prev.transpose();
  grad.b_ih += gi.rowwise().sum();
  grad.b_hh += gh.rowwise().sum();
  dx.noalias() = p.w_ih.transpose() * gi;
  dh_prev = dh.cwiseProduct(k.z);
  dh_prev.noalias() += p.w_hh.transpose() * gh;
}

}  // namespace rachpred::nn
