#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rachpred/sim/rach.hpp"
#include "rachpred/sim/simulator.hpp"

namespace rachpred::sim {

enum class CongestionRule {
  /// Centered sliding-window average of collided attempts (attempts minus
  /// detected), expressed per second, above `collision_threshold`.
  WindowedCollisions,
  /// Attempts above the preamble count for `overload_run_slots` consecutive slots.
  SustainedOverload,
};

struct LabelConfig {
  double window_seconds = 3.0;
  double collision_threshold = 7000.0;  // collided attempts per second
  double t_pred = 1.0;                  // lead time, seconds
  CongestionRule rule = CongestionRule::WindowedCollisions;
  std::int64_t overload_run_slots = 250;

  void validate() const;
};

struct CongestionLabels {
  std::vector<std::uint8_t> congested;  // per-slot ground-truth flag
  std::vector<std::uint8_t> expected;   // 1 iff a congested slot lies in (s, s + t_pred]
};

/// Throws std::invalid_argument on an empty trace.
CongestionLabels label_congestion(std::span<const TraceRecord> trace, const LabelConfig& cfg,
                                  const RachConfig& rach);

}  // namespace rachpred::sim
