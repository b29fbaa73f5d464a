#include "mlpsched/policies.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "mlpsched/rng.hpp"

namespace mlpsched {

namespace {

constexpr std::array<std::pair<PolicyId, std::string_view>, 6> kPolicyNames{{
    {PolicyId::kSerpentine, "serpentine"},
    {PolicyId::kNaiveSorted, "naive_sorted"},
    {PolicyId::kRoundRobin, "round_robin"},
    {PolicyId::kRandom, "random"},
    {PolicyId::kOptimal, "optimal"},
    {PolicyId::kStatic, "static"},
}};

void require_full(const MlpVector& mlp, const SystemConfig& config) {
  if (mlp.size() != config.num_threads()) {
    throw DimensionError(fmt::format(
        "MLP vector has {} entries but K*L = {}*{} = {}", mlp.size(),
        config.num_processors, config.slots_per_processor,
        config.num_threads()));
  }
}

Schedule deal_in_rounds(const MlpVector& mlp, const SystemConfig& config,
                        bool alternate) {
  require_full(mlp, config);
  const std::uint32_t k = config.num_processors;
  const std::vector<ThreadId> order = rank_by_mlp(mlp);
  std::vector<Placement> placement(order.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto round = static_cast<std::uint32_t>(rank / k);
    const auto column = static_cast<std::uint32_t>(rank % k);
    const bool reversed = alternate && (round % 2 == 1);
    placement[order[rank]] = {reversed ? k - 1 - column : column, round};
  }
  return Schedule(std::move(placement));
}

// Depth-first enumeration of unlabeled equal-size partitions in
// lexicographic order. Each group opens with the smallest unassigned thread,
// so every partition is visited once.
class PartitionSearch {
 public:
  PartitionSearch(const MlpVector& mlp, std::size_t groups,
                  std::size_t group_size)
      : mlp_(mlp),
        groups_(groups),
        group_size_(group_size),
        used_(mlp.size(), false) {}

  std::vector<std::vector<ThreadId>> run() {
    current_.assign(groups_, {});
    open_group(0, 0.0);
    return best_;
  }

 private:
  void open_group(std::size_t g, double max_closed) {
    if (g == groups_) {
      if (max_closed < best_max_) {
        best_max_ = max_closed;
        best_ = current_;
      }
      return;
    }
    const auto first = static_cast<ThreadId>(
        std::find(used_.begin(), used_.end(), false) - used_.begin());
    used_[first] = true;
    current_[g].push_back(first);
    extend(g, first + 1, 0.0 + mlp_[first], max_closed);
    current_[g].pop_back();
    used_[first] = false;
  }

  void extend(std::size_t g, ThreadId from, double sum, double max_closed) {
    if (std::max(sum, max_closed) >= best_max_) return;
    if (current_[g].size() == group_size_) {
      open_group(g + 1, std::max(sum, max_closed));
      return;
    }
    for (ThreadId t = from; t < mlp_.size(); ++t) {
      if (used_[t]) continue;
      used_[t] = true;
      current_[g].push_back(t);
      extend(g, t + 1, sum + mlp_[t], max_closed);
      current_[g].pop_back();
      used_[t] = false;
    }
  }

  const MlpVector& mlp_;
  std::size_t groups_;
  std::size_t group_size_;
  std::vector<bool> used_;
  std::vector<std::vector<ThreadId>> current_;
  std::vector<std::vector<ThreadId>> best_;
  double best_max_ = std::numeric_limits<double>::infinity();
};

}  // namespace

PolicyId parse_policy(std::string_view name) {
  for (const auto& [id, text] : kPolicyNames) {
    if (text == name) return id;
  }
  throw ConfigError(fmt::format("unknown policy '{}'", name));
}

std::string_view policy_name(PolicyId id) {
  for (const auto& [candidate, text] : kPolicyNames) {
    if (candidate == id) return text;
  }
  return "unknown";
}

std::vector<ThreadId> rank_by_mlp(const MlpVector& mlp) {
  std::vector<ThreadId> order(mlp.size());
  std::iota(order.begin(), order.end(), ThreadId{0});
  std::stable_sort(order.begin(), order.end(), [&mlp](ThreadId a, ThreadId b) {
    return mlp[a] > mlp[b];
  });
  return order;
}

Schedule serpentine_schedule(const MlpVector& mlp, const SystemConfig& config) {
  return deal_in_rounds(mlp, config, /*alternate=*/true);
}

Schedule naive_sorted_schedule(const MlpVector& mlp,
                               const SystemConfig& config) {
  return deal_in_rounds(mlp, config, /*alternate=*/false);
}

Schedule round_robin_schedule(const SystemConfig& config,
                              const Schedule& prev) {
  require_valid(prev, config);
  Schedule next = prev;
  for (ThreadId t = 0; t < next.size(); ++t) {
    next[t].processor = (next[t].processor + 1) % config.num_processors;
  }
  return next;
}

Schedule random_schedule(const SystemConfig& config, std::uint64_t seed) {
  const std::size_t n = config.num_threads();
  std::vector<std::uint32_t> position(n);
  std::iota(position.begin(), position.end(), 0u);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(position[i - 1], position[j]);
  }
  const std::uint32_t l = config.slots_per_processor;
  std::vector<Placement> placement(n);
  for (std::size_t t = 0; t < n; ++t) {
    placement[t] = {position[t] / l, position[t] % l};
  }
  return Schedule(std::move(placement));
}

Schedule optimal_partition(const MlpVector& mlp, const SystemConfig& config) {
  require_full(mlp, config);
  if (mlp.size() > kMaxOptimalThreads) {
    throw DimensionError(
        fmt::format("optimal_partition: N = {} exceeds exhaustive limit {}",
                    mlp.size(), kMaxOptimalThreads));
  }
  const auto groups = PartitionSearch(mlp, config.num_processors,
                                      config.slots_per_processor)
                          .run();
  std::vector<Placement> placement(mlp.size());
  for (std::uint32_t g = 0; g < groups.size(); ++g) {
    for (std::uint32_t s = 0; s < groups[g].size(); ++s) {
      placement[groups[g][s]] = {g, s};
    }
  }
  return Schedule(std::move(placement));
}

Schedule apply_policy(PolicyId policy, const MlpVector& mlp,
                      const SystemConfig& config, const Schedule& prev,
                      std::uint64_t seed) {
  switch (policy) {
    case PolicyId::kSerpentine:
      return serpentine_schedule(mlp, config);
    case PolicyId::kNaiveSorted:
      return naive_sorted_schedule(mlp, config);
    case PolicyId::kRoundRobin:
      return round_robin_schedule(config, prev);
    case PolicyId::kRandom:
      return random_schedule(config, seed);
    case PolicyId::kOptimal:
      return optimal_partition(mlp, config);
    case PolicyId::kStatic:
      require_valid(prev, config);
      return prev;
  }
  throw ConfigError("unknown policy id");
}

}  // namespace mlpsched
