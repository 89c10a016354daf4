#include "rachpred/predict/session.hpp"

#include <algorithm>
#include <stdexcept>

#include "rachpred/common/errors.hpp"

namespace rachpred::predict {

void StreamingConfig::validate() const {
  if (l_hist < 1 || l_f < 1 || l_p < 1 || l_buff < 0) {
    throw ConfigError("streaming window sizes must be positive");
  }
  if (l_f > l_p || (l_f == l_p && !allow_equal_horizon)) {
    throw ConfigError("l_f must be smaller than l_p (l_f == l_p needs the override)");
  }
  if (!(slot_period > 0.0)) throw ConfigError("slot_period must be positive");
}

int StreamingConfig::rolling_window() const { return std::max(l_buff, l_f); }

PredictorSession::PredictorSession(const nn::TrafficModel& model, StreamingConfig cfg)
    : model_(&model), cfg_(cfg) {
  model.params.check();
  live_ = nn::zero_state(model.params);
  checkpoint_ = live_;
  output_.resize(model.params.output_size(), 0);
}

void PredictorSession::consume(const Series& real) {
  if (real.rows() != model_->params.input_size()) throw DimensionError("feature count mismatch");
  const Eigen::MatrixXd x = model_->norm.apply(real);
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    last_output_ = nn::model_step<double>(x.col(t), model_->params, live_);
    ++evaluations_;
  }
}

Eigen::VectorXd PredictorSession::to_physical(const Eigen::VectorXd& normalized) const {
  return model_->norm.invert(normalized).cwiseMax(0.0).cwiseMin(model_->output_ceiling);
}

void PredictorSession::init_with_history(const Series& hist) {
  if (hist.cols() != cfg_.l_hist) {
    throw std::invalid_argument("history length differs from l_hist");
  }
  live_ = nn::zero_state(model_->params);
  consume(hist);
  checkpoint_ = live_;
  checkpoint_output_ = last_output_;
  consumed_ = hist.cols();
  const Eigen::Index keep = std::min<Eigen::Index>(cfg_.rolling_window(), hist.cols());
  buffer_ = hist.rightCols(keep);
  initialized_ = true;
}

Series PredictorSession::recursive_predict(int steps) {
  if (!initialized_) throw std::logic_error("session is not initialized");
  if (steps < 0) throw std::invalid_argument("negative prediction length");
  Series out(model_->params.output_size(), steps);
  Eigen::VectorXd feed = last_output_;
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd physical = to_physical(feed);
    last_output_ = nn::model_step<double>(model_->norm.apply(physical), model_->params, live_);
    ++evaluations_;
    out.col(k) = to_physical(last_output_);
    feed = last_output_;
  }
  return out;
}

Series PredictorSession::finish_step(Series predictions) {
  blocks_.push_back({consumed_, predictions});
  const Eigen::Index keep = std::min<Eigen::Index>(cfg_.l_f, predictions.cols());
  const std::int64_t first = consumed_ + 1 + (predictions.cols() - keep);
  if (output_first_slot_ < 0) output_first_slot_ = first;
  Series appended = predictions.rightCols(keep);
  output_.conservativeResize(Eigen::NoChange, output_.cols() + keep);
  output_.rightCols(keep) = appended;
  return appended;
}

Series PredictorSession::flsp_step(const Series& fresh) {
  if (!initialized_) throw std::logic_error("flsp_step on an uninitialized session");
  if (fresh.cols() != cfg_.l_f) throw std::invalid_argument("fresh length differs from l_f");
  live_ = checkpoint_;
  last_output_ = checkpoint_output_;
  consume(fresh);
  consumed_ += fresh.cols();
  checkpoint_ = live_;
  checkpoint_output_ = last_output_;
  return finish_step(recursive_predict(cfg_.l_p));
}

Series PredictorSession::rolling_step(const Series& fresh) {
  if (!initialized_) throw std::logic_error("rolling_step on an uninitialized session");
  if (fresh.cols() != cfg_.l_f) throw std::invalid_argument("fresh length differs from l_f");
  const Eigen::Index window = cfg_.rolling_window();
  const Eigen::Index total = buffer_.cols() + fresh.cols();
  const Eigen::Index keep = std::min(window, total);
  Series joined(fresh.rows(), total);
  joined << buffer_, fresh;
  buffer_ = joined.rightCols(keep);
  consumed_ += fresh.cols();

  live_ = nn::zero_state(model_->params);
  consume(buffer_);
  checkpoint_ = live_;
  checkpoint_output_ = last_output_;
  return finish_step(recursive_predict(cfg_.l_p));
}

}  // namespace rachpred::predict
