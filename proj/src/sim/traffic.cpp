#include "rachpred/sim/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "rachpred/common/errors.hpp"

namespace rachpred::sim {

std::int64_t CellConfig::total_devices() const {
  std::int64_t total = 0;
  for (const auto& g : groups) {
    if (g.size > std::numeric_limits<std::int64_t>::max() - total) {
      throw ConfigError("device count overflows 64-bit counter");
    }
    total += g.size;
  }
  return total;
}

void CellConfig::validate() const {
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    const std::string where = "group " + std::to_string(i) + ": ";
    if (g.size < 0) throw ConfigError(where + "negative size");
    if (!(g.event_probability >= 0.0 && g.event_probability <= 1.0)) {
      throw ConfigError(where + "event_probability outside [0,1]");
    }
    if (!(g.periodic_rate >= 0.0)) throw ConfigError(where + "negative periodic_rate");
  }
  // Per-slot counters are 32-bit inside the simulator.
  if (total_devices() > std::numeric_limits<std::int32_t>::max()) {
    throw ConfigError("total device count exceeds simulator counter range");
  }
  if (!(alpha > 1.0 && beta > 1.0)) throw ConfigError("beta shapes must exceed 1");
  if (!(min_event_duration > 0.0 && max_event_duration >= min_event_duration)) {
    throw ConfigError("invalid event duration range");
  }
}

CellConfig CellConfig::reference() {
  CellConfig cell;
  const std::int64_t sizes[] = {15000, 8000, 3000, 3000, 3000, 15000, 8000, 3000, 2000, 2000};
  const double probs[] = {0.006, 0.009, 0.09, 0.1, 0.2, 0.004, 0.004, 0.05, 0.1, 0.2};
  for (int i = 0; i < 10; ++i) {
    cell.groups.push_back({sizes[i], probs[i], 1.0 / 60.0});
  }
  return cell;
}

double beta_intensity(double t, const BurstEvent& ev) {
  const double T = ev.duration;
  if (!(t >= 0.0 && t <= T)) {
    throw std::domain_error("beta_intensity: t outside [0, T]");
  }
  const double a = ev.alpha;
  const double b = ev.beta;
  return std::pow(t, a - 1.0) * std::pow(T - t, b - 1.0) /
         (std::pow(T, a + b - 1.0) * std::beta(a, b));
}

double beta_mass(double t0, double t1, const BurstEvent& ev) {
  const double T = ev.duration;
  const double lo = std::clamp(t0, 0.0, T);
  const double hi = std::clamp(t1, 0.0, T);
  if (hi <= lo) return 0.0;
  const auto cdf = [&](double t) {
    if (t <= 0.0) return 0.0;
    if (t >= T) return 1.0;
    return boost::math::ibeta(ev.alpha, ev.beta, t / T);
  };
  return cdf(hi) - cdf(lo);
}

double expected_arrivals(std::int64_t slot, double slot_period, const BurstEvent& ev,
                         const DeviceGroup& group) {
  if (group.size == 0) return 0.0;
  const double t0 = static_cast<double>(slot) * slot_period - ev.start;
  const double t1 = static_cast<double>(slot + 1) * slot_period - ev.start;
  return static_cast<double>(group.size) * beta_mass(t0, t1, ev);
}

std::vector<BurstEvent> draw_events(const CellConfig& cell, double horizon, Rng& rng) {
  std::vector<BurstEvent> events;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> duration(cell.min_event_duration,
                                                  cell.max_event_duration);
  const auto seconds = static_cast<std::int64_t>(std::ceil(horizon));
  for (std::int64_t s = 0; s < seconds; ++s) {
    for (std::size_t g = 0; g < cell.groups.size(); ++g) {
      // Every trial consumes the same number of draws so that group order
      // does not shift later streams.
      const double trial = unit(rng);
      const double offset = unit(rng);
      const double length = duration(rng);
      if (trial < cell.groups[g].event_probability) {
        events.push_back({g, static_cast<double>(s) + offset, length, cell.alpha, cell.beta});
      }
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const BurstEvent& a, const BurstEvent& b) { return a.start < b.start; });
  return events;
}

}  // namespace rachpred::sim
