#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rachpred::burst {

struct Metrics {
  std::int64_t true_positives = 0;
  std::int64_t false_positives = 0;
  std::int64_t false_negatives = 0;
  std::int64_t true_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mse = 0.0;         // probabilities vs labels, 0 when none given
  bool degenerate = false;  // some ratio had a zero denominator and was set to 0
};

/// Confusion counts, precision, recall and F1 of binary decisions.
/// Throws std::invalid_argument when the inputs differ in length.
Metrics compute_metrics(std::span<const std::uint8_t> decisions,
                        std::span<const std::uint8_t> labels,
                        std::span<const double> probabilities = {});

/// F1 from precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

/// Repeats each decision `l_f` times and multiplies it by `scale`.
std::vector<double> expand_decisions_for_plot(std::span<const std::uint8_t> decisions, int l_f,
                                              double scale = 20.0);

}  // namespace rachpred::burst
