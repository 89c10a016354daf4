#include "rachpred/burst/metrics.hpp"

#include <stdexcept>

namespace rachpred::burst {

double f1_score(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

Metrics compute_metrics(std::span<const std::uint8_t> decisions,
                        std::span<const std::uint8_t> labels,
                        std::span<const double> probabilities) {
  if (decisions.size() != labels.size()) {
    throw std::invalid_argument("compute_metrics: decisions and labels differ in length");
  }
  if (!probabilities.empty() && probabilities.size() != labels.size()) {
    throw std::invalid_argument("compute_metrics: probabilities and labels differ in length");
  }
  Metrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool d = decisions[i] != 0;
    const bool l = labels[i] != 0;
    if (d && l) ++m.true_positives;
    if (d && !l) ++m.false_positives;
    if (!d && l) ++m.false_negatives;
    if (!d && !l) ++m.true_negatives;
  }
  const auto ratio = [&m](std::int64_t num, std::int64_t den) {
    if (den == 0) {
      m.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.precision = ratio(m.true_positives, m.true_positives + m.false_positives);
  m.recall = ratio(m.true_positives, m.true_positives + m.false_negatives);
  if (m.precision + m.recall == 0.0) m.degenerate = true;
  m.f1 = f1_score(m.precision, m.recall);
  if (!probabilities.empty()) {
    double sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double e = probabilities[i] - (labels[i] ? 1.0 : 0.0);
      sum += e * e;
    }
    m.mse = sum / static_cast<double>(labels.size());
  }
  return m;
}

std::vector<double> expand_decisions_for_plot(std::span<const std::uint8_t> decisions, int l_f,
                                              double scale) {
  if (l_f < 0) throw std::invalid_argument("l_f must be >= 0");
  std::vector<double> out;
  out.reserve(decisions.size() * static_cast<std::size_t>(l_f));
  for (auto d : decisions) out.insert(out.end(), static_cast<std::size_t>(l_f), d ? scale : 0.0);
  return out;
}

}  // namespace rachpred::burst
