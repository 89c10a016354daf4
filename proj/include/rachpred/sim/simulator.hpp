#pragma once

#include <cstdint>
#include <vector>

#include "rachpred/sim/rach.hpp"
#include "rachpred/sim/traffic.hpp"

namespace rachpred::sim {

/// Ground truth for one RACH opportunity.
struct TraceRecord {
  std::int64_t slot = 0;
  std::int32_t arrivals = 0;   // new packets ready this slot
  std::int32_t attempts = 0;   // arrivals plus retransmissions
  std::int32_t detected = 0;   // singleton preambles
  std::int32_t collided = 0;   // preambles picked by two or more devices
  std::int32_t dropped = 0;    // devices whose final allowed attempt failed

  bool operator==(const TraceRecord&) const = default;
};

struct SimulationResult {
  std::vector<TraceRecord> records;
  std::vector<BurstEvent> events;
  std::int64_t generated = 0;      // total new packets
  std::int64_t backlog_at_end = 0; // devices still waiting on a retransmission
};

/// Runs the cell for `total_slots` opportunities. Burst arrivals per group
/// and slot are Poisson with the Beta-integrated mean; periodic arrivals are
/// Binomial(n_l, p_u * slot_period). Failed devices retry after a uniform
/// integer backoff in [0, backoff_ms] ms until max_transmissions is reached.
/// Identical inputs yield an identical result.
SimulationResult run_simulation(const CellConfig& cell, const RachConfig& rach,
                                std::int64_t total_slots, std::uint64_t seed);

/// Same as above with an explicit event list (no random event draws).
SimulationResult run_simulation(const CellConfig& cell, const RachConfig& rach,
                                std::int64_t total_slots, std::uint64_t seed,
                                std::vector<BurstEvent> events);

}  // namespace rachpred::sim
