#pragma once

#include <cmath>
#include <functional>

#include "rachpred/common/rng.hpp"
#include "rachpred/nn/model.hpp"
#include "rachpred/nn/traffic_model.hpp"

namespace rachpred::testkit {

/// Composite Simpson rule with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// h=4, d=2 stack with a 4 -> 2 head (or the desk wiring when `concat`).
inline nn::Architecture toy_arch(nn::CellKind kind, bool concat = false) {
  nn::Architecture a;
  a.kind = kind;
  a.input_size = 2;
  a.hidden = {4};
  if (concat) {
    a.hidden = {4, 4};
    a.dense = {{4, {0}}, {2, {1, 0}}};
  } else {
    a.dense = {{2, {0}}};
  }
  return a;
}

inline nn::TrafficModel toy_model(nn::CellKind kind, std::uint64_t seed, bool concat = false) {
  auto rng = make_rng(seed, "test/toy");
  nn::TrafficModel m;
  m.params = nn::ModelParams<double>::initialize(toy_arch(kind, concat), rng);
  m.norm = nn::Normalizer::identity(2);
  m.output_ceiling = 54.0;
  return m;
}

/// Smooth synthetic two-feature stream in the count range of a RACH trace.
inline Eigen::MatrixXd synthetic_stream(Eigen::Index n, std::uint64_t seed) {
  auto rng = make_rng(seed, "test/stream");
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd s(2, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const double phase = 0.01 * static_cast<double>(t);
    s(0, t) = 10.0 + 5.0 * std::sin(phase) + u(rng);
    s(1, t) = 20.0 + 8.0 * std::cos(0.7 * phase) + u(rng);
  }
  return s;
}

}  // namespace rachpred::testkit
