#include "rachpred/nn/traffic_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rachpred/common/errors.hpp"
#include "rachpred/nn/adam.hpp"
#include "rachpred/nn/bptt.hpp"

namespace rachpred::nn {

Eigen::MatrixXd traffic_series(std::span<const sim::TraceRecord> trace) {
  Eigen::MatrixXd s(2, static_cast<Eigen::Index>(trace.size()));
  for (std::size_t i = 0; i < trace.size(); ++i) {
    s(0, static_cast<Eigen::Index>(i)) = trace[i].detected;
    s(1, static_cast<Eigen::Index>(i)) = trace[i].collided;
  }
  return s;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0 && beta1 > 0.0 && beta2 > 0.0 && epsilon > 0.0)) {
    throw ConfigError("optimizer rates must be positive");
  }
  if (beta1 >= 1.0 || beta2 >= 1.0) throw ConfigError("Adam betas must be < 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout outside [0,1)");
  if (window < 1 || segment_length < window) {
    throw ConfigError("need 1 <= window <= segment_length");
  }
  if (clip_norm < 0.0) throw ConfigError("clip_norm must be >= 0");
}

double clip_gradients(ModelParams<double>& grads, double max_norm) {
  double sq = 0.0;
  const auto refs = blocks(grads);
  for (const auto& b : refs) sq += b.map().squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (const auto& b : refs) b.map() *= s;
  }
  return norm;
}

namespace {

struct Segment {
  std::size_t series;
  Eigen::Index start;
};

}  // namespace

TrainResult train(const std::vector<Eigen::MatrixXd>& series, const Architecture& arch,
                  const TrainConfig& cfg, double output_ceiling, const EpochCallback& on_epoch) {
  cfg.validate();
  if (series.empty()) throw ConfigError("training needs at least one series");

  TrainResult result;
  result.model.output_ceiling = output_ceiling;
  result.model.norm = Normalizer::fit(series);

  Architecture shaped = arch;
  shaped.dropout = cfg.dropout;
  auto init_rng = make_rng(cfg.seed, "train/init");
  result.model.params = ModelParams<double>::initialize(shaped, init_rng, cfg.memory_bias);
  auto& params = result.model.params;
  if (params.input_size() != series.front().rows() || params.output_size() != series.front().rows()) {
    throw ConfigError("architecture feature size differs from the data");
  }

  std::vector<Eigen::MatrixXd> normalized;
  std::vector<Segment> segments;
  // A segment needs one extra slot for the final next-step target.
  const Eigen::Index span = cfg.segment_length + 1;
  for (std::size_t i = 0; i < series.size(); ++i) {
    normalized.push_back(result.model.norm.apply(series[i]));
    for (Eigen::Index start = 0; start + span <= series[i].cols(); start += cfg.segment_length) {
      segments.push_back({i, start});
    }
  }
  if (segments.empty()) throw ConfigError("series shorter than one training segment");

  auto shuffle_rng = make_rng(cfg.seed, "train/shuffle");
  auto dropout_rng = make_rng(cfg.seed, "train/dropout");
  AdamMoments<double> moments;
  const AdamConfig adam{cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon};
  const Eigen::Index features = params.input_size();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(segments.begin(), segments.end(), shuffle_rng);
    double loss_sum = 0.0;
    long loss_count = 0;
    for (std::size_t first = 0; first < segments.size(); first += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t last = std::min(segments.size(), first + static_cast<std::size_t>(cfg.batch_size));
      const auto batch = static_cast<Eigen::Index>(last - first);
      auto state = zero_state(params, batch);
      for (Eigen::Index w = 0; w < cfg.segment_length; w += cfg.window) {
        const Eigen::Index len = std::min<Eigen::Index>(cfg.window, cfg.segment_length - w);
        SequenceBatch<double> sb;
        sb.inputs.assign(static_cast<std::size_t>(len), Eigen::MatrixXd(features, batch));
        sb.targets.assign(static_cast<std::size_t>(len), Eigen::MatrixXd(features, batch));
        for (Eigen::Index b = 0; b < batch; ++b) {
          const auto& seg = segments[first + static_cast<std::size_t>(b)];
          const auto& data = normalized[seg.series];
          for (Eigen::Index t = 0; t < len; ++t) {
            sb.inputs[static_cast<std::size_t>(t)].col(b) = data.col(seg.start + w + t);
            sb.targets[static_cast<std::size_t>(t)].col(b) = data.col(seg.start + w + t + 1);
          }
        }
        auto g = bptt_gradients(params, sb, state, true, &dropout_rng);
        clip_gradients(g.grads, cfg.clip_norm);
        adam_step(params, g.grads, moments, adam);
        state = std::move(g.final_state);
        loss_sum += g.loss;
        ++loss_count;
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(std::max<long>(loss_count, 1));
    if (!std::isfinite(epoch_loss)) throw NumericError("training diverged");
    result.loss_history.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  return result;
}

}  // namespace rachpred::nn
