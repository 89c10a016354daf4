#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rachpred/common/rng.hpp"

namespace rachpred::sim {

struct DeviceGroup {
  std::int64_t size = 0;           // n_l
  double event_probability = 0.0;  // per-second chance that a burst starts
  double periodic_rate = 0.0;      // packets per device per second (p_u)
};

/// One Beta-shaped surge of access requests inside a single group.
struct BurstEvent {
  std::size_t group = 0;
  double start = 0.0;     // seconds
  double duration = 0.0;  // T, seconds
  double alpha = 3.0;
  double beta = 4.0;

  double end() const { return start + duration; }
};

struct CellConfig {
  std::vector<DeviceGroup> groups;
  double alpha = 3.0;
  double beta = 4.0;
  double min_event_duration = 8.0;
  double max_event_duration = 15.0;

  std::int64_t total_devices() const;
  /// Throws ConfigError on negative sizes, probabilities outside [0,1],
  /// Beta shapes that do not vanish at the endpoints, or an empty duration range.
  void validate() const;

  /// Ten groups, 62,000 devices, one periodic packet per device per minute.
  static CellConfig reference();
};

/// Beta(alpha, beta) access intensity over [0, T] in events per second.
/// Throws std::domain_error when t lies outside the event support.
double beta_intensity(double t, const BurstEvent& ev);

/// Probability mass of the event intensity over [t0, t1] (event-local
/// seconds). Bounds are clamped to the support.
double beta_mass(double t0, double t1, const BurstEvent& ev);

/// Expected number of new packets from `group` in slot `slot` due to `ev`.
double expected_arrivals(std::int64_t slot, double slot_period, const BurstEvent& ev,
                         const DeviceGroup& group);

/// Draws burst events over [0, horizon) seconds: one Bernoulli trial per
/// group per second, start uniform inside that second, duration uniform in
/// [min_event_duration, max_event_duration]. Result is sorted by start time.
std::vector<BurstEvent> draw_events(const CellConfig& cell, double horizon, Rng& rng);

}  // namespace rachpred::sim
