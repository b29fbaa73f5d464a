#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "mlpsched/core_model.hpp"

namespace mlpsched {

enum class PolicyId {
  kSerpentine,
  kNaiveSorted,
  kRoundRobin,
  kRandom,
  kOptimal,
  /// Keeps the previous schedule forever. Used to pin a fixed placement
  /// (e.g. a worst-case co-schedule) as a comparison baseline.
  kStatic,
};

/// Throws ConfigError for names outside the closed set.
PolicyId parse_policy(std::string_view name);
std::string_view policy_name(PolicyId id);

inline constexpr std::size_t kMaxOptimalThreads = 12;

/// Thread ids ordered by MLP descending, ties by ascending id.
std::vector<ThreadId> rank_by_mlp(const MlpVector& mlp);

/// MLP-aware schedule. Sorted ranks are dealt to processors in rounds of K,
/// alternating direction each round (P0..P(K-1), then P(K-1)..P0, ...).
/// The slot within a processor is the round number. Every processor gets
/// exactly L threads; the MSHR pool is not enforced as a cap.
Schedule serpentine_schedule(const MlpVector& mlp, const SystemConfig& config);

/// Same rounds as serpentine_schedule but always dealt P0..P(K-1).
Schedule naive_sorted_schedule(const MlpVector& mlp,
                               const SystemConfig& config);

/// Moves every thread at (p, s) to ((p + 1) mod K, s).
Schedule round_robin_schedule(const SystemConfig& config, const Schedule& prev);

/// Uniformly random bijection onto the slot grid: Fisher-Yates over the
/// N flattened positions (p * L + s) driven by Rng(seed).
Schedule random_schedule(const SystemConfig& config, std::uint64_t seed);

/// Exhaustive min-max balanced partition into K groups of L threads.
/// Ties resolve to the lexicographically smallest list of sorted groups;
/// group g lands on processor g with slots in ascending thread order.
/// Throws DimensionError when N exceeds kMaxOptimalThreads.
Schedule optimal_partition(const MlpVector& mlp, const SystemConfig& config);

/// Dispatches to the policy. `prev` is the schedule that ran during the
/// quantum the counters were sampled in.
Schedule apply_policy(PolicyId policy, const MlpVector& mlp,
                      const SystemConfig& config, const Schedule& prev,
                      std::uint64_t seed);

}  // namespace mlpsched
