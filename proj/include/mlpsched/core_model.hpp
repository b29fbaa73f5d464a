#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mlpsched {

/// Thrown when inputs disagree on the number of threads or processors.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when a SystemConfig or workload violates its invariants.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using ThreadId = std::size_t;

/// Machine shape and timing parameters.
///
/// Each of the `num_processors` cores exposes `slots_per_processor` hardware
/// thread slots that share one pool of `mshrs_per_processor` miss status
/// holding registers.
struct SystemConfig {
  std::uint32_t num_processors = 4;
  std::uint32_t slots_per_processor = 4;
  std::uint32_t mshrs_per_processor = 16;
  std::uint64_t memory_latency = 200;
  std::uint64_t quantum_cycles = 100'000;
  std::uint64_t window_cycles = 10'000;
  std::uint64_t migration_penalty = 0;

  std::size_t num_threads() const {
    return static_cast<std::size_t>(num_processors) * slots_per_processor;
  }

  bool operator==(const SystemConfig&) const = default;
};

/// Throws ConfigError naming the offending field.
void validate_config(const SystemConfig& config);

/// Per-thread average MSHR occupancy readings, indexed by ThreadId.
class MlpVector {
 public:
  MlpVector() = default;
  /// Throws std::invalid_argument on a negative or non-finite entry.
  explicit MlpVector(std::vector<double> values);
  MlpVector(std::initializer_list<double> values)
      : MlpVector(std::vector<double>(values)) {}

  std::size_t size() const { return values_.size(); }
  double operator[](ThreadId t) const { return values_[t]; }
  const std::vector<double>& values() const { return values_; }
  double total() const;

  /// True when every entry fits in a single processor's MSHR pool.
  bool within_pool(const SystemConfig& config) const;

  bool operator==(const MlpVector&) const = default;

 private:
  std::vector<double> values_;
};

struct Placement {
  std::uint32_t processor = 0;
  std::uint32_t slot = 0;

  bool operator==(const Placement&) const = default;
  auto operator<=>(const Placement&) const = default;
};

/// Thread-to-(processor, slot) mapping; entry i is where thread i runs.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<Placement> placement)
      : placement_(std::move(placement)) {}

  /// Thread i on processor i mod K, slot i / K.
  static Schedule row_major(const SystemConfig& config);

  std::size_t size() const { return placement_.size(); }
  const Placement& operator[](ThreadId t) const { return placement_[t]; }
  Placement& operator[](ThreadId t) { return placement_[t]; }
  const std::vector<Placement>& placement() const { return placement_; }

  /// Thread ids on `processor`, ordered by slot.
  std::vector<ThreadId> threads_on(std::uint32_t processor) const;

  bool operator==(const Schedule&) const = default;

 private:
  std::vector<Placement> placement_;
};

enum class ScheduleViolation {
  kMissingThread,
  kExtraThread,
  kProcessorOutOfRange,
  kSlotOutOfRange,
  kDuplicateSlot,
  kProcessorLoad,
};

struct ScheduleVerdict {
  std::optional<ScheduleViolation> violation;
  std::string message;

  bool ok() const { return !violation.has_value(); }
  explicit operator bool() const { return ok(); }
};

/// Checks that the schedule is a total bijection onto the K x L slot grid.
/// Reports the first violation found.
ScheduleVerdict validate_schedule(const Schedule& schedule,
                                  const SystemConfig& config);

/// Throws std::invalid_argument carrying the verdict message if invalid.
void require_valid(const Schedule& schedule, const SystemConfig& config);

struct ScheduleQuality {
  std::vector<double> per_processor_mlp_sum;
  double max_sum = 0.0;
  double min_sum = 0.0;
  double gap = 0.0;
  std::vector<double> per_processor_oversubscription;

  double mean_oversubscription() const;

  bool operator==(const ScheduleQuality&) const = default;
};

/// Per-processor MLP sums, balance gap and oversubscription against the
/// per-processor MSHR pool.
ScheduleQuality processor_load(const Schedule& schedule, const MlpVector& mlp,
                               const SystemConfig& config);

}  // namespace mlpsched
