#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlpsched/simulator.hpp"

namespace mlpsched {

template <typename T>
struct Range {
  T min{};
  T max{};

  bool operator==(const Range&) const = default;
};

/// Per-thread workload template. When `explicit_phases` is set, every
/// generated thread receives exactly those phases and the ranges are
/// ignored.
struct WorkloadSpec {
  std::size_t num_phases = 1;
  Range<std::uint64_t> duration{1, 1};
  Range<std::uint32_t> demand{0, 0};
  bool repeat = true;
  std::optional<std::vector<Phase>> explicit_phases;
};

/// Throws ConfigError on an empty range, zero phase count or zero duration.
/// With `demand_cap`, also rejects demands above the cap.
void validate_spec(const WorkloadSpec& spec,
                   std::optional<std::uint32_t> demand_cap = std::nullopt);

/// Durations and demands are drawn uniformly from the inclusive ranges with
/// Rng(seed), thread by thread, phase by phase, duration before demand.
std::vector<ThreadWorkload> generate_synthetic(const WorkloadSpec& spec,
                                               std::size_t n_threads,
                                               std::uint64_t seed);

/// Raised by load_trace; `line()` is 1-based, 0 when not tied to a line.
class TraceError : public std::runtime_error {
 public:
  TraceError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what
                                : what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr const char* kTraceFormat = "mlpsched-trace";
inline constexpr int kTraceVersion = 1;

/// Writes one JSON object per line; see docs/trace_format.md.
void save_trace(const std::vector<ThreadWorkload>& workloads,
                const std::filesystem::path& path);

std::vector<ThreadWorkload> load_trace(
    const std::filesystem::path& path,
    std::optional<std::uint32_t> demand_cap = std::nullopt);

}  // namespace mlpsched
