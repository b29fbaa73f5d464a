#include "mlpsched/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace mlpsched {

void validate_config(const SystemConfig& config) {
  if (config.num_processors < 1) {
    throw ConfigError("num_processors: must be >= 1");
  }
  if (config.slots_per_processor < 1) {
    throw ConfigError("slots_per_processor: must be >= 1");
  }
  if (config.mshrs_per_processor < 1) {
    throw ConfigError("mshrs_per_processor: must be >= 1");
  }
  if (config.memory_latency < 1) {
    throw ConfigError("memory_latency: must be >= 1");
  }
  if (config.quantum_cycles < 1) {
    throw ConfigError("quantum_cycles: must be >= 1");
  }
  if (config.window_cycles < 1) {
    throw ConfigError("window_cycles: must be >= 1");
  }
  if (config.window_cycles > config.quantum_cycles) {
    throw ConfigError(fmt::format(
        "window_cycles: {} exceeds quantum_cycles {}", config.window_cycles,
        config.quantum_cycles));
  }
}

MlpVector::MlpVector(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw std::invalid_argument(
          fmt::format("MLP value for thread {} must be finite and >= 0, got {}",
                      i, values_[i]));
    }
  }
}

double MlpVector::total() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

bool MlpVector::within_pool(const SystemConfig& config) const {
  const double cap = config.mshrs_per_processor;
  return std::all_of(values_.begin(), values_.end(),
                     [cap](double v) { return v <= cap; });
}

Schedule Schedule::row_major(const SystemConfig& config) {
  const std::size_t n = config.num_threads();
  std::vector<Placement> placement(n);
  for (std::size_t t = 0; t < n; ++t) {
    placement[t] = {static_cast<std::uint32_t>(t % config.num_processors),
                    static_cast<std::uint32_t>(t / config.num_processors)};
  }
  return Schedule(std::move(placement));
}

std::vector<ThreadId> Schedule::threads_on(std::uint32_t processor) const {
  std::vector<ThreadId> out;
  for (ThreadId t = 0; t < placement_.size(); ++t) {
    if (placement_[t].processor == processor) out.push_back(t);
  }
  std::sort(out.begin(), out.end(), [this](ThreadId a, ThreadId b) {
    return placement_[a].slot < placement_[b].slot;
  });
  return out;
}

ScheduleVerdict validate_schedule(const Schedule& schedule,
                                  const SystemConfig& config) {
  const std::size_t k = config.num_processors;
  const std::size_t l = config.slots_per_processor;
  const std::size_t n = k * l;

  if (schedule.size() < n) {
    return {ScheduleViolation::kMissingThread,
            fmt::format("missing thread T{}: {} of {} threads placed",
                        schedule.size(), schedule.size(), n)};
  }
  if (schedule.size() > n) {
    return {ScheduleViolation::kExtraThread,
            fmt::format("{} threads placed but only {} slots exist",
                        schedule.size(), n)};
  }

  std::vector<std::optional<ThreadId>> owner(n);
  std::vector<std::size_t> load(k, 0);
  for (ThreadId t = 0; t < n; ++t) {
    const Placement& p = schedule[t];
    if (p.processor >= k) {
      return {ScheduleViolation::kProcessorOutOfRange,
              fmt::format("T{} placed on processor {} but K={}", t,
                          p.processor, k)};
    }
    if (p.slot >= l) {
      return {ScheduleViolation::kSlotOutOfRange,
              fmt::format("T{} placed in slot {} but L={}", t, p.slot, l)};
    }
    auto& cell = owner[p.processor * l + p.slot];
    if (cell) {
      return {ScheduleViolation::kDuplicateSlot,
              fmt::format("duplicate slot ({},{}) held by T{} and T{}",
                          p.processor, p.slot, *cell, t)};
    }
    cell = t;
    ++load[p.processor];
  }
  // Unreachable once the grid is a bijection, kept so a verdict always names
  // the processor whose load is off.
  for (std::size_t p = 0; p < k; ++p) {
    if (load[p] != l) {
      return {ScheduleViolation::kProcessorLoad,
              fmt::format("processor {} holds {} threads, expected {}", p,
                          load[p], l)};
    }
  }
  return {};
}

void require_valid(const Schedule& schedule, const SystemConfig& config) {
  if (auto verdict = validate_schedule(schedule, config); !verdict) {
    throw std::invalid_argument("invalid schedule: " + verdict.message);
  }
}

double ScheduleQuality::mean_oversubscription() const {
  if (per_processor_oversubscription.empty()) return 0.0;
  return std::accumulate(per_processor_oversubscription.begin(),
                         per_processor_oversubscription.end(), 0.0) /
         static_cast<double>(per_processor_oversubscription.size());
}

ScheduleQuality processor_load(const Schedule& schedule, const MlpVector& mlp,
                               const SystemConfig& config) {
  if (mlp.size() != schedule.size()) {
    throw DimensionError(fmt::format("MLP vector has {} entries, schedule {}",
                                     mlp.size(), schedule.size()));
  }
  require_valid(schedule, config);

  ScheduleQuality q;
  q.per_processor_mlp_sum.assign(config.num_processors, 0.0);
  // Accumulate in thread order so equal groupings give bit-identical sums
  // regardless of slot assignment.
  for (ThreadId t = 0; t < schedule.size(); ++t) {
    q.per_processor_mlp_sum[schedule[t].processor] += mlp[t];
  }
  auto [lo, hi] = std::minmax_element(q.per_processor_mlp_sum.begin(),
                                      q.per_processor_mlp_sum.end());
  q.min_sum = *lo;
  q.max_sum = *hi;
  q.gap = q.max_sum - q.min_sum;
  q.per_processor_oversubscription.reserve(config.num_processors);
  const double cap = config.mshrs_per_processor;
  for (double sum : q.per_processor_mlp_sum) {
    q.per_processor_oversubscription.push_back(std::max(0.0, sum - cap));
  }
  return q;
}

}  // namespace mlpsched
