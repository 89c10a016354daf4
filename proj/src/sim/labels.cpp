#include "rachpred/sim/labels.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "rachpred/common/errors.hpp"

namespace rachpred::sim {

void LabelConfig::validate() const {
  if (!(window_seconds > 0.0)) throw ConfigError("label window must be positive");
  if (!(collision_threshold >= 0.0)) throw ConfigError("collision threshold must be >= 0");
  if (!(t_pred >= 0.0)) throw ConfigError("t_pred must be >= 0");
  if (overload_run_slots < 1) throw ConfigError("overload run length must be >= 1");
}

namespace {

std::vector<std::uint8_t> windowed_flags(std::span<const TraceRecord> trace,
                                         const LabelConfig& cfg, const RachConfig& rach) {
  const auto n = static_cast<std::int64_t>(trace.size());
  const std::int64_t window = std::max<std::int64_t>(1, rach.slots_for(cfg.window_seconds));
  const std::int64_t before = window / 2;
  const std::int64_t after = window - 1 - before;

  std::vector<double> prefix(trace.size() + 1, 0.0);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    prefix[i + 1] = prefix[i] + static_cast<double>(trace[i].attempts - trace[i].detected);
  }
  std::vector<std::uint8_t> flags(trace.size(), 0);
  for (std::int64_t s = 0; s < n; ++s) {
    const std::int64_t lo = std::max<std::int64_t>(0, s - before);
    const std::int64_t hi = std::min<std::int64_t>(n, s + after + 1);
    const double seconds = static_cast<double>(hi - lo) * rach.slot_period;
    const double per_second = (prefix[static_cast<std::size_t>(hi)] -
                               prefix[static_cast<std::size_t>(lo)]) / seconds;
    flags[static_cast<std::size_t>(s)] = per_second > cfg.collision_threshold ? 1 : 0;
  }
  return flags;
}

std::vector<std::uint8_t> overload_flags(std::span<const TraceRecord> trace,
                                         const LabelConfig& cfg, const RachConfig& rach) {
  std::vector<std::uint8_t> flags(trace.size(), 0);
  std::size_t run_start = 0;
  for (std::size_t i = 0; i <= trace.size(); ++i) {
    const bool over = i < trace.size() && trace[i].attempts > rach.preambles;
    if (over) continue;
    if (static_cast<std::int64_t>(i - run_start) >= cfg.overload_run_slots) {
      std::fill(flags.begin() + static_cast<std::ptrdiff_t>(run_start),
                flags.begin() + static_cast<std::ptrdiff_t>(i), 1);
    }
    run_start = i + 1;
  }
  return flags;
}

}  // namespace

CongestionLabels label_congestion(std::span<const TraceRecord> trace, const LabelConfig& cfg,
                                  const RachConfig& rach) {
  if (trace.empty()) throw std::invalid_argument("label_congestion: empty trace");
  cfg.validate();
  rach.validate();

  CongestionLabels out;
  out.congested = cfg.rule == CongestionRule::WindowedCollisions
                      ? windowed_flags(trace, cfg, rach)
                      : overload_flags(trace, cfg, rach);

  // expected[s] = any congested flag in (s, s + lead]
  const auto n = static_cast<std::int64_t>(trace.size());
  const std::int64_t lead = rach.slots_for(cfg.t_pred);
  out.expected.assign(trace.size(), 0);
  std::int64_t next_flag = std::numeric_limits<std::int64_t>::max() / 2;  // nearest flag after s
  for (std::int64_t s = n - 1; s >= 0; --s) {
    if (next_flag - s <= lead) out.expected[static_cast<std::size_t>(s)] = 1;
    if (out.congested[static_cast<std::size_t>(s)]) next_flag = s;
  }
  return out;
}

}  // namespace rachpred::sim
