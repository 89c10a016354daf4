#include "rachpred/burst/burst_net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "rachpred/common/errors.hpp"
#include "rachpred/nn/adam.hpp"

namespace rachpred::burst {

void BurstNetParams::check() const {
  if (w1.cols() != 2 * (l_f + l_p)) throw DimensionError("burst net input must be 2(l_f + l_p)");
  if (b1.size() != w1.rows() || w2.rows() != 1 || w2.cols() != w1.rows() || b2.size() != 1) {
    throw DimensionError("burst net layer shapes are inconsistent");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0,1)");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout outside [0,1)");
  if (!(input_scale > 0.0)) throw ConfigError("input_scale must be positive");
}

BurstNetParams BurstNetParams::zeros(int l_f, int l_p, Eigen::Index hidden) {
  BurstNetParams p;
  p.l_f = l_f;
  p.l_p = l_p;
  const Eigen::Index in = 2 * (l_f + l_p);
  p.w1 = Eigen::MatrixXd::Zero(hidden, in);
  p.b1 = Eigen::VectorXd::Zero(hidden);
  p.w2 = Eigen::MatrixXd::Zero(1, hidden);
  p.b2 = Eigen::VectorXd::Zero(1);
  return p;
}

namespace {

struct Tape {
  Eigen::MatrixXd x, pre, hidden, mask;
  Eigen::RowVectorXd prob;
};

Eigen::RowVectorXd forward(const Eigen::MatrixXd& chunks, const BurstNetParams& p, bool train,
                           Rng* rng, Tape* tape) {
  if (chunks.rows() != p.chunk_size()) throw DimensionError("chunk size mismatch");
  Eigen::MatrixXd x = chunks / p.input_scale;
  Eigen::MatrixXd pre = p.w1 * x;
  pre.colwise() += p.b1;
  Eigen::MatrixXd h = pre.cwiseMax(0.0);
  Eigen::MatrixXd mask;
  if (train && p.dropout > 0.0) {
    std::bernoulli_distribution keep(1.0 - p.dropout);
    mask.resize(h.rows(), h.cols());
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      for (Eigen::Index i = 0; i < h.rows(); ++i) mask(i, j) = keep(*rng) ? 1.0 / (1.0 - p.dropout) : 0.0;
    }
    h.array() *= mask.array();
  }
  Eigen::RowVectorXd z = p.w2 * h;
  z.array() += p.b2(0);
  Eigen::RowVectorXd prob = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  if (tape) *tape = {std::move(x), std::move(pre), std::move(h), std::move(mask), prob};
  return prob;
}

}  // namespace

Eigen::VectorXd burst_forward_batch(const Eigen::MatrixXd& chunks, const BurstNetParams& params,
                                    bool train_mode, Rng* rng) {
  if (train_mode && params.dropout > 0.0 && rng == nullptr) {
    throw std::invalid_argument("dropout needs an rng");
  }
  return forward(chunks, params, train_mode, rng, nullptr).transpose();
}

double burst_forward(const Eigen::VectorXd& chunk, const BurstNetParams& params) {
  return burst_forward_batch(chunk, params)(0);
}

std::vector<std::uint8_t> step_labels(std::span<const predict::ChunkSample> chunks,
                                      std::span<const std::uint8_t> expected, int l_f,
                                      LabelAggregation rule) {
  std::vector<std::uint8_t> out;
  out.reserve(chunks.size());
  for (const auto& c : chunks) {
    const std::int64_t lo = c.origin - l_f;
    if (lo < 0 || c.origin > static_cast<std::int64_t>(expected.size())) {
      throw ConfigError("chunk fresh window outside the label sequence");
    }
    std::int64_t positives = 0;
    for (std::int64_t s = lo; s < c.origin; ++s) positives += expected[static_cast<std::size_t>(s)] ? 1 : 0;
    const bool label = rule == LabelAggregation::Any ? positives > 0 : 2 * positives > l_f;
    out.push_back(label ? 1 : 0);
  }
  return out;
}

void BurstTrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size < 1 || epochs < 0) throw ConfigError("invalid batch size or epochs");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout outside [0,1)");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0,1)");
  if (hidden < 0) throw ConfigError("hidden size must be >= 0");
}

BurstTrainResult train_burst(std::span<const predict::ChunkSample> chunks,
                             std::span<const std::uint8_t> labels, int l_f, int l_p,
                             const BurstTrainConfig& cfg) {
  cfg.validate();
  if (chunks.size() != labels.size()) throw std::invalid_argument("chunks and labels differ");
  if (chunks.empty()) throw ConfigError("burst training needs at least one chunk");
  const Eigen::Index in = 2 * (l_f + l_p);
  const Eigen::Index hidden = cfg.hidden > 0 ? cfg.hidden : 4 * in;

  BurstTrainResult result;
  auto& p = result.params;
  p = BurstNetParams::zeros(l_f, l_p, hidden);
  p.dropout = cfg.dropout;
  p.threshold = cfg.threshold;
  p.input_scale = cfg.input_scale;
  auto init_rng = make_rng(cfg.seed, "burst/init");
  const auto fill = [&init_rng](auto& m, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = u(init_rng);
    }
  };
  fill(p.w1, 1.0 / std::sqrt(static_cast<double>(in)));
  fill(p.b1, 1.0 / std::sqrt(static_cast<double>(in)));
  fill(p.w2, 1.0 / std::sqrt(static_cast<double>(hidden)));
  fill(p.b2, 1.0 / std::sqrt(static_cast<double>(hidden)));
  p.check();

  Eigen::MatrixXd data(in, static_cast<Eigen::Index>(chunks.size()));
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (chunks[i].features.size() != in) throw DimensionError("chunk size mismatch");
    data.col(static_cast<Eigen::Index>(i)) = chunks[i].features;
  }

  auto shuffle_rng = make_rng(cfg.seed, "burst/shuffle");
  auto dropout_rng = make_rng(cfg.seed, "burst/dropout");
  std::vector<std::size_t> order(chunks.size());
  std::iota(order.begin(), order.end(), 0);
  nn::AdamMoments<double> moments;
  const nn::AdamConfig adam{cfg.learning_rate, 0.9, 0.999, 1e-8};

  Eigen::MatrixXd gw1, gw2;
  Eigen::VectorXd gb1, gb2;
  const std::vector<nn::BlockRef<double>> param_refs{
      {"w1", p.w1.data(), p.w1.rows(), p.w1.cols()},
      {"b1", p.b1.data(), p.b1.size(), 1},
      {"w2", p.w2.data(), p.w2.rows(), p.w2.cols()},
      {"b2", p.b2.data(), 1, 1}};

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t last = std::min(order.size(), first + static_cast<std::size_t>(cfg.batch_size));
      const auto n = static_cast<Eigen::Index>(last - first);
      Eigen::MatrixXd x(in, n);
      Eigen::RowVectorXd y(n);
      for (Eigen::Index b = 0; b < n; ++b) {
        const std::size_t idx = order[first + static_cast<std::size_t>(b)];
        x.col(b) = data.col(static_cast<Eigen::Index>(idx));
        y(b) = labels[idx] ? 1.0 : 0.0;
      }
      Tape tape;
      forward(x, p, true, &dropout_rng, &tape);
      const Eigen::RowVectorXd err = tape.prob - y;
      Eigen::RowVectorXd dz;
      if (cfg.loss == BurstLoss::Mse) {
        loss_sum += err.squaredNorm();
        dz = (2.0 / static_cast<double>(n)) *
             err.cwiseProduct(tape.prob.cwiseProduct((1.0 - tape.prob.array()).matrix()));
      } else {
        for (Eigen::Index b = 0; b < n; ++b) {
          const double q = std::clamp(tape.prob(b), 1e-12, 1.0 - 1e-12);
          loss_sum -= y(b) * std::log(q) + (1.0 - y(b)) * std::log(1.0 - q);
        }
        dz = err / static_cast<double>(n);
      }
      gw2 = dz * tape.hidden.transpose();
      gb2 = Eigen::VectorXd::Constant(1, dz.sum());
      Eigen::MatrixXd dh = p.w2.transpose() * dz;
      if (tape.mask.size() > 0) dh.array() *= tape.mask.array();
      dh.array() *= (tape.pre.array() > 0.0).cast<double>();
      gw1 = dh * tape.x.transpose();
      gb1 = dh.rowwise().sum();
      const std::vector<nn::BlockRef<double>> grad_refs{
          {"w1", gw1.data(), gw1.rows(), gw1.cols()},
          {"b1", gb1.data(), gb1.size(), 1},
          {"w2", gw2.data(), gw2.rows(), gw2.cols()},
          {"b2", gb2.data(), 1, 1}};
      nn::adam_step(param_refs, grad_refs, moments, adam);
    }
    const double epoch_loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) throw NumericError("burst training diverged");
    result.loss_history.push_back(epoch_loss);
  }
  return result;
}

namespace {

std::vector<double> row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

void fill_row_major(Eigen::MatrixXd& m, const nlohmann::json& data) {
  if (static_cast<Eigen::Index>(data.size()) != m.size()) throw ConfigError("burst block size mismatch");
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[i++].get<double>();
  }
}

}  // namespace

nlohmann::json to_json(const BurstNetParams& p) {
  return {{"format", "rachpred-burst-net"},
          {"version", 1},
          {"l_f", p.l_f},
          {"l_p", p.l_p},
          {"hidden", p.hidden()},
          {"dropout", p.dropout},
          {"threshold", p.threshold},
          {"input_scale", p.input_scale},
          {"w1", row_major(p.w1)},
          {"b1", row_major(p.b1)},
          {"w2", row_major(p.w2)},
          {"b2", row_major(p.b2)}};
}

BurstNetParams burst_params_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "rachpred-burst-net") throw ConfigError("not a burst-net checkpoint");
  auto p = BurstNetParams::zeros(j.at("l_f").get<int>(), j.at("l_p").get<int>(),
                                 j.at("hidden").get<Eigen::Index>());
  p.dropout = j.at("dropout").get<double>();
  p.threshold = j.at("threshold").get<double>();
  p.input_scale = j.at("input_scale").get<double>();
  Eigen::MatrixXd b1(p.b1.size(), 1), b2(1, 1);
  fill_row_major(p.w1, j.at("w1"));
  fill_row_major(b1, j.at("b1"));
  fill_row_major(p.w2, j.at("w2"));
  fill_row_major(b2, j.at("b2"));
  p.b1 = b1.col(0);
  p.b2 = b2.col(0);
  p.check();
  return p;
}

void save_burst_checkpoint(const BurstNetParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_json(params).dump() << '\n';
}

BurstNetParams load_burst_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return burst_params_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed burst checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace rachpred::burst
