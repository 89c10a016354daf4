#include "rachpred/sim/rach.hpp"

#include <cmath>

#include "rachpred/common/errors.hpp"

namespace rachpred::sim {

void RachConfig::validate() const {
  if (preambles < 1) throw ConfigError("preamble count must be >= 1");
  if (!(slot_period > 0.0)) throw ConfigError("slot_period must be positive");
  if (max_transmissions < 1) throw ConfigError("max_transmissions must be >= 1");
  if (backoff_ms < 0) throw ConfigError("backoff_ms must be >= 0");
}

std::int64_t RachConfig::slots_for(double seconds) const {
  return static_cast<std::int64_t>(std::llround(seconds / slot_period));
}

ContentionResult contend(std::size_t transmitters, const RachConfig& rach, Rng& rng) {
  ContentionResult out;
  out.success.assign(transmitters, 0);
  if (transmitters == 0) return out;

  std::uniform_int_distribution<int> pick(0, rach.preambles - 1);
  std::vector<int> choice(transmitters);
  std::vector<std::int32_t> load(static_cast<std::size_t>(rach.preambles), 0);
  for (auto& c : choice) {
    c = pick(rng);
    ++load[static_cast<std::size_t>(c)];
  }
  for (std::size_t i = 0; i < transmitters; ++i) {
    out.success[i] = load[static_cast<std::size_t>(choice[i])] == 1 ? 1 : 0;
  }
  for (auto n : load) {
    if (n == 1) ++out.detected;
    if (n >= 2) ++out.collided_preambles;
  }
  return out;
}

}  // namespace rachpred::sim
