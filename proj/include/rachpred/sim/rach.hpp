#pragma once

#include <cstdint>
#include <vector>

#include "rachpred/common/rng.hpp"

namespace rachpred::sim {

struct RachConfig {
  int preambles = 54;           // K, contention-based preambles
  double slot_period = 0.005;   // seconds between RACH opportunities
  int max_transmissions = 10;
  int backoff_ms = 20;

  void validate() const;
  /// Slots per second, rounded to the nearest integer.
  std::int64_t slots_for(double seconds) const;
};

struct ContentionResult {
  std::vector<std::uint8_t> success;  // per transmitter, 1 if its preamble was unique
  std::int32_t detected = 0;          // preambles picked by exactly one transmitter
  std::int32_t collided_preambles = 0;  // preambles picked by two or more
};

/// Multi-channel slotted ALOHA on Message 1: every transmitter picks one of
/// K preambles uniformly at random.
ContentionResult contend(std::size_t transmitters, const RachConfig& rach, Rng& rng);

}  // namespace rachpred::sim
