#include "rachpred/nn/normalizer.hpp"

#include <cmath>

#include "rachpred/common/errors.hpp"

namespace rachpred::nn {

Normalizer Normalizer::fit(const std::vector<Eigen::MatrixXd>& series) {
  if (series.empty()) throw ConfigError("cannot fit normalization on an empty dataset");
  const Eigen::Index features = series.front().rows();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(features);
  double count = 0;
  for (const auto& s : series) {
    if (s.rows() != features) throw DimensionError("series disagree on feature count");
    sum += s.rowwise().sum();
    count += static_cast<double>(s.cols());
  }
  if (count == 0) throw ConfigError("cannot fit normalization on empty series");
  Normalizer n;
  n.mean = sum / count;
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(features);
  for (const auto& s : series) sq += (s.colwise() - n.mean).rowwise().squaredNorm();
  n.scale = (sq / count).cwiseSqrt();
  for (Eigen::Index i = 0; i < features; ++i) {
    if (!(n.scale(i) > 1e-12)) n.scale(i) = 1.0;
  }
  return n;
}

Normalizer Normalizer::identity(Eigen::Index features) {
  return {Eigen::VectorXd::Zero(features), Eigen::VectorXd::Ones(features)};
}

Eigen::MatrixXd Normalizer::apply(const Eigen::MatrixXd& raw) const {
  if (raw.rows() != mean.size()) throw DimensionError("normalizer feature mismatch");
  return (raw.colwise() - mean).array().colwise() / scale.array();
}

Eigen::MatrixXd Normalizer::invert(const Eigen::MatrixXd& normalized) const {
  if (normalized.rows() != mean.size()) throw DimensionError("normalizer feature mismatch");
  return (normalized.array().colwise() * scale.array()).matrix().colwise() + mean;
}

}  // namespace rachpred::nn
