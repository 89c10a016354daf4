#include "rachpred/sim/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "rachpred/common/errors.hpp"

namespace rachpred::sim {

namespace {

std::int32_t draw_poisson(double mean, Rng& rng) {
  if (!(mean > 0.0)) return 0;
  std::poisson_distribution<std::int32_t> dist(mean);
  return dist(rng);
}

std::int32_t draw_binomial(std::int64_t n, double p, Rng& rng) {
  if (n <= 0 || !(p > 0.0)) return 0;
  std::binomial_distribution<std::int32_t> dist(static_cast<std::int32_t>(n), std::min(p, 1.0));
  return dist(rng);
}

}  // namespace

SimulationResult run_simulation(const CellConfig& cell, const RachConfig& rach,
                                std::int64_t total_slots, std::uint64_t seed) {
  cell.validate();
  rach.validate();
  auto event_rng = make_rng(seed, "sim/events");
  auto events = draw_events(cell, static_cast<double>(std::max<std::int64_t>(total_slots, 0)) *
                                      rach.slot_period,
                            event_rng);
  return run_simulation(cell, rach, total_slots, seed, std::move(events));
}

SimulationResult run_simulation(const CellConfig& cell, const RachConfig& rach,
                                std::int64_t total_slots, std::uint64_t seed,
                                std::vector<BurstEvent> events) {
  cell.validate();
  rach.validate();
  if (total_slots < 0) throw ConfigError("total_slots must be >= 0");
  for (const auto& ev : events) {
    if (ev.group >= cell.groups.size()) throw ConfigError("event refers to unknown group");
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const BurstEvent& a, const BurstEvent& b) { return a.start < b.start; });

  auto arrival_rng = make_rng(seed, "sim/arrivals");
  auto channel_rng = make_rng(seed, "sim/channel");

  const double dt = rach.slot_period;
  const double slot_ms = dt * 1000.0;
  // Retransmissions are bucketed by due slot in a ring; each entry holds the
  // number of transmissions already made by that device.
  const auto max_delay =
      static_cast<std::size_t>(std::floor(static_cast<double>(rach.backoff_ms) / slot_ms)) + 1;
  std::vector<std::vector<std::uint16_t>> ring(max_delay + 1);
  std::uniform_int_distribution<int> backoff(0, rach.backoff_ms);

  SimulationResult result;
  result.records.reserve(static_cast<std::size_t>(total_slots));

  std::vector<double> burst_mean(cell.groups.size());
  std::size_t next_event = 0;
  std::vector<const BurstEvent*> active;
  std::vector<std::uint16_t> transmitters;

  for (std::int64_t slot = 0; slot < total_slots; ++slot) {
    const double t0 = static_cast<double>(slot) * dt;
    const double t1 = t0 + dt;
    while (next_event < events.size() && events[next_event].start < t1) {
      active.push_back(&events[next_event]);
      ++next_event;
    }
    std::erase_if(active, [t0](const BurstEvent* ev) { return ev->end() <= t0; });

    std::fill(burst_mean.begin(), burst_mean.end(), 0.0);
    for (const BurstEvent* ev : active) {
      burst_mean[ev->group] += expected_arrivals(slot, dt, *ev, cell.groups[ev->group]);
    }

    std::int32_t arrivals = 0;
    for (std::size_t g = 0; g < cell.groups.size(); ++g) {
      const auto& group = cell.groups[g];
      arrivals += draw_binomial(group.size, group.periodic_rate * dt, arrival_rng);
      arrivals += draw_poisson(burst_mean[g], arrival_rng);
    }
    result.generated += arrivals;

    auto& due = ring[static_cast<std::size_t>(slot) % ring.size()];
    transmitters.assign(static_cast<std::size_t>(arrivals), 0);
    transmitters.insert(transmitters.end(), due.begin(), due.end());
    due.clear();

    const auto outcome = contend(transmitters.size(), rach, channel_rng);

    TraceRecord rec;
    rec.slot = slot;
    rec.arrivals = arrivals;
    rec.attempts = static_cast<std::int32_t>(transmitters.size());
    rec.detected = outcome.detected;
    rec.collided = outcome.collided_preambles;
    for (std::size_t i = 0; i < transmitters.size(); ++i) {
      if (outcome.success[i]) continue;
      const auto sent = static_cast<std::uint16_t>(transmitters[i] + 1);
      if (sent >= rach.max_transmissions) {
        ++rec.dropped;
        continue;
      }
      const auto delay = 1 + static_cast<std::size_t>(
                                 std::floor(static_cast<double>(backoff(channel_rng)) / slot_ms));
      ring[(static_cast<std::size_t>(slot) + delay) % ring.size()].push_back(sent);
    }
    result.records.push_back(rec);
  }

  for (const auto& bucket : ring) result.backlog_at_end += static_cast<std::int64_t>(bucket.size());
  result.events = std::move(events);
  return result;
}

}  // namespace rachpred::sim
