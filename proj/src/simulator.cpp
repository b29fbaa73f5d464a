#include "mlpsched/simulator.hpp"

#include <algorithm>
#include <cassert>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "mlpsched/rng.hpp"

namespace mlpsched {

void validate_workloads(const std::vector<ThreadWorkload>& workloads,
                        const SystemConfig& config) {
  for (std::size_t i = 0; i < workloads.size(); ++i) {
    const ThreadWorkload& w = workloads[i];
    if (w.thread != i) {
      throw ConfigError(fmt::format(
          "workload {}: thread id {} out of order (expected {})", i, w.thread,
          i));
    }
    if (w.phases.empty()) {
      throw ConfigError(fmt::format("thread {}: phase list is empty", i));
    }
    for (std::size_t j = 0; j < w.phases.size(); ++j) {
      const Phase& ph = w.phases[j];
      if (ph.duration < 1) {
        throw ConfigError(
            fmt::format("thread {} phase {}: duration must be >= 1", i, j));
      }
      if (ph.demand > config.mshrs_per_processor) {
        throw ConfigError(fmt::format(
            "thread {} phase {}: demand {} exceeds mshrs_per_processor {}", i,
            j, ph.demand, config.mshrs_per_processor));
      }
    }
  }
}

std::vector<ThreadWorkload> pad_workloads(std::vector<ThreadWorkload> workloads,
                                          const SystemConfig& config) {
  const std::size_t n = config.num_threads();
  if (workloads.size() > n) {
    throw ConfigError(fmt::format(
        "{} threads supplied but K*L = {} slots; slots are never "
        "oversubscribed",
        workloads.size(), n));
  }
  for (std::size_t t = workloads.size(); t < n; ++t) {
    workloads.push_back({t, {Phase{1, 0}}, true});
  }
  return workloads;
}

SimState SimState::initial(const SystemConfig& config,
                           const std::vector<ThreadWorkload>& workloads,
                           Schedule schedule) {
  const std::size_t n = config.num_threads();
  if (workloads.size() != n) {
    throw DimensionError(fmt::format("{} workloads for {} thread slots",
                                     workloads.size(), n));
  }
  SimState s;
  s.in_flight.resize(config.num_processors);
  s.arbitration_start.assign(config.num_processors, 0);
  s.outstanding.assign(n, 0);
  s.occupancy_accum.assign(n, 0);
  s.frozen_until.assign(n, 0);
  s.phase_index.assign(n, 0);
  s.phase_elapsed.assign(n, 0);
  s.completed.assign(n, 0);
  s.stall_cycles.assign(n, 0);
  s.occupancy_cycles.assign(n, 0);
  s.processor_occupancy_cycles.assign(config.num_processors, 0);
  require_valid(schedule, config);
  s.schedule = std::move(schedule);
  s.slot_owner.assign(n, 0);
  for (ThreadId t = 0; t < n; ++t) {
    const Placement& p = s.schedule[t];
    s.slot_owner[p.processor * config.slots_per_processor + p.slot] = t;
  }
  return s;
}

void SimState::set_schedule(Schedule next, const SystemConfig& config) {
  require_valid(next, config);
  for (ThreadId t = 0; t < next.size(); ++t) {
    if (next[t].processor != schedule[t].processor) {
      frozen_until[t] = cycle + config.migration_penalty;
    }
    slot_owner[next[t].processor * config.slots_per_processor + next[t].slot] =
        t;
  }
  schedule = std::move(next);
}

std::uint32_t SimState::current_demand(
    ThreadId t, const std::vector<ThreadWorkload>& workloads) const {
  const auto& phases = workloads[t].phases;
  if (phase_index[t] >= phases.size()) return 0;
  return phases[phase_index[t]].demand;
}

std::vector<std::uint64_t> SimState::in_flight_residue(
    const SystemConfig& config) const {
  std::vector<std::uint64_t> residue(outstanding.size(), 0);
  for (const auto& pool : in_flight) {
    for (const InFlightRequest& r : pool) {
      residue[r.owner] += config.memory_latency - (r.completes_at - cycle);
    }
  }
  return residue;
}

void step_cycle(SimState& state, const std::vector<ThreadWorkload>& workloads,
                const SystemConfig& config) {
  const std::uint32_t k = config.num_processors;
  const std::uint32_t l = config.slots_per_processor;
  const std::uint64_t now = state.cycle;

  // 1. Retire.
  for (auto& pool : state.in_flight) {
    while (!pool.empty() && pool.front().completes_at == now) {
      const ThreadId owner = pool.front().owner;
      --state.outstanding[owner];
      ++state.completed[owner];
      pool.pop_front();
    }
  }

  // 2. Arbitrate and issue.
  for (std::uint32_t p = 0; p < k; ++p) {
    auto& pool = state.in_flight[p];
    std::uint32_t free_mshrs =
        config.mshrs_per_processor - static_cast<std::uint32_t>(pool.size());
    const std::uint32_t start = state.arbitration_start[p];
    bool allocated = false;
    for (std::uint32_t i = 0; i < l; ++i) {
      const ThreadId t = state.slot_owner[p * l + (start + i) % l];
      if (now < state.frozen_until[t]) continue;
      const std::uint32_t demand = state.current_demand(t, workloads);
      if (state.outstanding[t] >= demand) continue;
      const std::uint32_t grant =
          std::min(demand - state.outstanding[t], free_mshrs);
      if (grant == 0) {
        ++state.stall_cycles[t];
        continue;
      }
      for (std::uint32_t r = 0; r < grant; ++r) {
        pool.push_back({t, now + config.memory_latency});
      }
      state.outstanding[t] += grant;
      free_mshrs -= grant;
      allocated = true;
    }
    if (allocated) state.arbitration_start[p] = (start + 1) % l;
    assert(pool.size() <= config.mshrs_per_processor);
  }

  // 3. Occupancy.
  const bool in_window = now % config.quantum_cycles >=
                         config.quantum_cycles - config.window_cycles;
  for (ThreadId t = 0; t < state.outstanding.size(); ++t) {
    state.occupancy_cycles[t] += state.outstanding[t];
    if (in_window) state.occupancy_accum[t] += state.outstanding[t];
  }
  for (std::uint32_t p = 0; p < k; ++p) {
    state.processor_occupancy_cycles[p] += state.in_flight[p].size();
  }

  // 4. Phase clocks.
  for (ThreadId t = 0; t < workloads.size(); ++t) {
    const auto& w = workloads[t];
    if (state.phase_index[t] >= w.phases.size()) continue;
    if (++state.phase_elapsed[t] < w.phases[state.phase_index[t]].duration) {
      continue;
    }
    state.phase_elapsed[t] = 0;
    ++state.phase_index[t];
    if (w.repeat && state.phase_index[t] == w.phases.size()) {
      state.phase_index[t] = 0;
    }
  }
  ++state.cycle;
}

MlpVector sample_mlp(SimState& state, const SystemConfig& config) {
  if (state.cycle == 0 || state.cycle % config.quantum_cycles != 0) {
    throw std::logic_error(fmt::format(
        "sample_mlp called at cycle {}, not a quantum boundary (quantum {})",
        state.cycle, config.quantum_cycles));
  }
  std::vector<double> values(state.occupancy_accum.size());
  const auto window = static_cast<double>(config.window_cycles);
  for (std::size_t t = 0; t < values.size(); ++t) {
    values[t] = static_cast<double>(state.occupancy_accum[t]) / window;
  }
  std::fill(state.occupancy_accum.begin(), state.occupancy_accum.end(), 0);
  return MlpVector(std::move(values));
}

std::optional<std::string> check_state(const SimState& state,
                                       const SystemConfig& config) {
  std::vector<std::uint32_t> counted(state.outstanding.size(), 0);
  for (std::size_t p = 0; p < state.in_flight.size(); ++p) {
    const auto& pool = state.in_flight[p];
    if (pool.size() > config.mshrs_per_processor) {
      return fmt::format("cycle {}: processor {} holds {} requests, pool {}",
                         state.cycle, p, pool.size(),
                         config.mshrs_per_processor);
    }
    std::uint64_t last = 0;
    for (const InFlightRequest& r : pool) {
      if (r.completes_at < last || r.completes_at < state.cycle ||
          r.completes_at > state.cycle + config.memory_latency) {
        return fmt::format("cycle {}: processor {} request completion {} "
                           "out of order or range",
                           state.cycle, p, r.completes_at);
      }
      last = r.completes_at;
      ++counted[r.owner];
    }
  }
  for (ThreadId t = 0; t < counted.size(); ++t) {
    if (counted[t] != state.outstanding[t]) {
      return fmt::format("cycle {}: thread {} outstanding {} but {} in pools",
                         state.cycle, t, state.outstanding[t], counted[t]);
    }
  }
  return std::nullopt;
}

namespace {

std::vector<std::uint64_t> delta(const std::vector<std::uint64_t>& now,
                                 std::vector<std::uint64_t>& mark) {
  std::vector<std::uint64_t> d(now.size());
  for (std::size_t i = 0; i < now.size(); ++i) d[i] = now[i] - mark[i];
  mark = now;
  return d;
}

std::uint64_t sum(const std::vector<std::uint64_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::uint64_t{0});
}

}  // namespace

SimulationReport run_simulation(const SystemConfig& config,
                                std::vector<ThreadWorkload> workloads,
                                PolicyId policy, std::uint64_t seed,
                                std::uint64_t total_quanta,
                                const std::optional<Schedule>& initial) {
  validate_config(config);
  if (total_quanta < 1) {
    throw ConfigError("total_quanta: must be >= 1");
  }
  workloads = pad_workloads(std::move(workloads), config);
  validate_workloads(workloads, config);
  if (policy == PolicyId::kOptimal &&
      config.num_threads() > kMaxOptimalThreads) {
    throw DimensionError(fmt::format(
        "policy optimal needs K*L <= {}, got {}", kMaxOptimalThreads,
        config.num_threads()));
  }

  SimState state = SimState::initial(
      config, workloads, initial ? *initial : Schedule::row_major(config));

  SimulationReport report;
  report.config = config;
  report.policy = policy;
  report.seed = seed;
  report.per_quantum.reserve(total_quanta);

  const std::size_t n = config.num_threads();
  std::vector<std::uint64_t> mark_completed(n, 0);
  std::vector<std::uint64_t> mark_stalls(n, 0);
  std::vector<std::uint64_t> mark_occupancy(n, 0);
  std::vector<std::uint64_t> mark_proc(config.num_processors, 0);

  for (std::uint64_t q = 0; q < total_quanta; ++q) {
    for (std::uint64_t c = 0; c < config.quantum_cycles; ++c) {
      step_cycle(state, workloads, config);
    }
    QuantumRecord rec;
    rec.index = q;
    rec.schedule = state.schedule;
    rec.sampled = sample_mlp(state, config);
    rec.chosen = apply_policy(policy, rec.sampled, config, state.schedule,
                              mix_seed(seed, q));
    rec.quality = processor_load(rec.chosen, rec.sampled, config);
    rec.completed = delta(state.completed, mark_completed);
    rec.stall_cycles = delta(state.stall_cycles, mark_stalls);
    rec.occupancy_cycles = delta(state.occupancy_cycles, mark_occupancy);
    rec.processor_occupancy_cycles =
        delta(state.processor_occupancy_cycles, mark_proc);
    state.set_schedule(rec.chosen, config);
    report.per_quantum.push_back(std::move(rec));
  }

  ReportTotals& tot = report.totals;
  tot.total_cycles = total_quanta * config.quantum_cycles;
  tot.completed = state.completed;
  tot.completed_total = sum(state.completed);
  tot.stall_cycles = state.stall_cycles;
  tot.stall_cycles_total = sum(state.stall_cycles);
  tot.occupancy_cycles = state.occupancy_cycles;
  tot.in_flight_residue = state.in_flight_residue(config);
  for (std::uint64_t occ : state.processor_occupancy_cycles) {
    tot.mean_occupancy_per_processor.push_back(
        static_cast<double>(occ) / static_cast<double>(tot.total_cycles));
  }
  tot.throughput = static_cast<double>(tot.completed_total) /
                   static_cast<double>(tot.total_cycles);
  double gap_sum = 0.0;
  double over_sum = 0.0;
  for (const QuantumRecord& rec : report.per_quantum) {
    gap_sum += rec.quality.gap;
    over_sum += rec.quality.mean_oversubscription();
  }
  tot.mean_gap = gap_sum / static_cast<double>(total_quanta);
  tot.mean_oversubscription = over_sum / static_cast<double>(total_quanta);
  return report;
}

double throughput(const SimulationReport& report) {
  if (report.totals.total_cycles == 0) {
    throw std::invalid_argument("throughput: report covers zero cycles");
  }
  return static_cast<double>(report.totals.completed_total) /
         static_cast<double>(report.totals.total_cycles);
}

bool totals_consistent(const SimulationReport& report) {
  const ReportTotals& tot = report.totals;
  const std::size_t n = tot.completed.size();
  std::vector<std::uint64_t> completed(n, 0), stalls(n, 0), occupancy(n, 0);
  std::vector<std::uint64_t> proc(tot.mean_occupancy_per_processor.size(), 0);
  std::uint64_t cycles = 0;
  for (const QuantumRecord& rec : report.per_quantum) {
    if (rec.completed.size() != n || rec.stall_cycles.size() != n ||
        rec.occupancy_cycles.size() != n ||
        rec.processor_occupancy_cycles.size() != proc.size()) {
      return false;
    }
    for (std::size_t t = 0; t < n; ++t) {
      completed[t] += rec.completed[t];
      stalls[t] += rec.stall_cycles[t];
      occupancy[t] += rec.occupancy_cycles[t];
    }
    for (std::size_t p = 0; p < proc.size(); ++p) {
      proc[p] += rec.processor_occupancy_cycles[p];
    }
    cycles += report.config.quantum_cycles;
  }
  if (cycles != tot.total_cycles || completed != tot.completed ||
      stalls != tot.stall_cycles || occupancy != tot.occupancy_cycles ||
      sum(completed) != tot.completed_total ||
      sum(stalls) != tot.stall_cycles_total) {
    return false;
  }
  for (std::size_t p = 0; p < proc.size(); ++p) {
    if (static_cast<double>(proc[p]) / static_cast<double>(cycles) !=
        tot.mean_occupancy_per_processor[p]) {
      return false;
    }
  }
  return true;
}

}  // namespace mlpsched
