#pragma once

#include <vector>

#include <Eigen/Dense>

namespace rachpred::nn {

/// Per-feature standardization fitted on training series (features x time).
struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Normalizer fit(const std::vector<Eigen::MatrixXd>& series);
  static Normalizer identity(Eigen::Index features);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& raw) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& normalized) const;
};

}  // namespace rachpred::nn
