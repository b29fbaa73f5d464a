#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "mlpsched/core_model.hpp"
#include "mlpsched/policies.hpp"

namespace mlpsched {

/// A stretch of execution during which a thread tries to keep `demand`
/// memory requests outstanding.
struct Phase {
  std::uint64_t duration = 1;
  std::uint32_t demand = 0;

  bool operator==(const Phase&) const = default;
};

struct ThreadWorkload {
  ThreadId thread = 0;
  std::vector<Phase> phases;
  /// Cycle through `phases` until the run ends. Otherwise the thread goes
  /// idle (demand 0) after its last phase.
  bool repeat = false;

  bool operator==(const ThreadWorkload&) const = default;
};

/// Checks thread ids are 0..n-1 in order, phases are non-empty with
/// duration >= 1, and no demand exceeds the per-processor MSHR pool.
/// Throws ConfigError.
void validate_workloads(const std::vector<ThreadWorkload>& workloads,
                        const SystemConfig& config);

/// Appends idle threads (one phase, demand 0, repeating) up to K*L.
/// Throws ConfigError when there are already more than K*L threads.
std::vector<ThreadWorkload> pad_workloads(std::vector<ThreadWorkload> workloads,
                                          const SystemConfig& config);

struct InFlightRequest {
  ThreadId owner = 0;
  std::uint64_t completes_at = 0;
};

/// Mutable engine state. Construct with SimState::initial().
struct SimState {
  std::uint64_t cycle = 0;
  Schedule schedule;

  /// Per processor, ordered by completion cycle (fixed latency keeps each
  /// pool FIFO).
  std::vector<std::deque<InFlightRequest>> in_flight;
  /// thread at (p, s) is slot_owner[p * L + s]; rebuilt by set_schedule().
  std::vector<ThreadId> slot_owner;
  /// Per processor arbitration start slot.
  std::vector<std::uint32_t> arbitration_start;

  std::vector<std::uint32_t> outstanding;
  std::vector<std::uint64_t> occupancy_accum;
  std::vector<std::uint64_t> frozen_until;
  std::vector<std::size_t> phase_index;
  std::vector<std::uint64_t> phase_elapsed;

  // Running totals since cycle 0.
  std::vector<std::uint64_t> completed;
  std::vector<std::uint64_t> stall_cycles;
  std::vector<std::uint64_t> occupancy_cycles;
  std::vector<std::uint64_t> processor_occupancy_cycles;

  static SimState initial(const SystemConfig& config,
                          const std::vector<ThreadWorkload>& workloads,
                          Schedule schedule);

  /// Installs a new schedule. Threads whose processor changed are frozen for
  /// the migration penalty; their in-flight requests stay in the old pool.
  void set_schedule(Schedule next, const SystemConfig& config);

  /// Demand of the thread's current phase, 0 once a non-repeating thread
  /// has run out of phases.
  std::uint32_t current_demand(ThreadId t,
                               const std::vector<ThreadWorkload>& workloads) const;

  /// Cycles already counted in occupancy for requests still in flight.
  std::vector<std::uint64_t> in_flight_residue(const SystemConfig& config) const;
};

/// Advances one cycle: retire, arbitrate and issue, accumulate occupancy,
/// advance phase clocks and the cycle counter.
///
/// Within a processor, slots are visited starting at the processor's
/// arbitration_start slot and wrapping; each visited thread takes MSHRs up
/// to its demand while any remain. The start slot advances by one after
/// every cycle in which the processor allocated at least one MSHR. A thread
/// below demand that gets nothing in a cycle accrues one stall cycle.
/// Threads frozen after a migration neither issue nor stall.
void step_cycle(SimState& state, const std::vector<ThreadWorkload>& workloads,
                const SystemConfig& config);

/// Window-averaged occupancy per thread. Must be called exactly at a
/// quantum boundary (cycle a positive multiple of quantum_cycles); the
/// accumulator covers the final window_cycles of the quantum and is reset.
/// Throws std::logic_error off-boundary.
MlpVector sample_mlp(SimState& state, const SystemConfig& config);

/// Returns a description of the first violated engine invariant, if any:
/// pool over capacity, per-thread counts out of sync, or requests not
/// ordered by completion.
std::optional<std::string> check_state(const SimState& state,
                                       const SystemConfig& config);

struct QuantumRecord {
  std::uint64_t index = 0;
  /// Schedule in effect while the quantum ran.
  Schedule schedule;
  MlpVector sampled;
  /// Policy output for the next quantum.
  Schedule chosen;
  /// Balance of `chosen` under `sampled`.
  ScheduleQuality quality;
  std::vector<std::uint64_t> completed;
  std::vector<std::uint64_t> stall_cycles;
  std::vector<std::uint64_t> occupancy_cycles;
  std::vector<std::uint64_t> processor_occupancy_cycles;

  bool operator==(const QuantumRecord&) const = default;
};

struct ReportTotals {
  std::uint64_t total_cycles = 0;
  std::vector<std::uint64_t> completed;
  std::uint64_t completed_total = 0;
  std::vector<std::uint64_t> stall_cycles;
  std::uint64_t stall_cycles_total = 0;
  std::vector<std::uint64_t> occupancy_cycles;
  std::vector<std::uint64_t> in_flight_residue;
  std::vector<double> mean_occupancy_per_processor;
  double throughput = 0.0;
  double mean_gap = 0.0;
  double mean_oversubscription = 0.0;

  bool operator==(const ReportTotals&) const = default;
};

struct SimulationReport {
  SystemConfig config;
  PolicyId policy = PolicyId::kSerpentine;
  std::uint64_t seed = 0;
  std::vector<QuantumRecord> per_quantum;
  ReportTotals totals;

  bool operator==(const SimulationReport&) const = default;
};

/// Runs `total_quanta` quanta of the sample-then-reschedule loop.
///
/// Workloads are idle-padded to K*L threads. The first quantum runs under
/// `initial` if given, else Schedule::row_major. The random policy draws
/// quantum q from Rng(mix_seed(seed, q)).
SimulationReport run_simulation(const SystemConfig& config,
                                std::vector<ThreadWorkload> workloads,
                                PolicyId policy, std::uint64_t seed,
                                std::uint64_t total_quanta,
                                const std::optional<Schedule>& initial = {});

/// Completed requests per cycle. Throws std::invalid_argument on a report
/// with zero cycles.
double throughput(const SimulationReport& report);

/// True when totals match the sums and means of the per-quantum records.
bool totals_consistent(const SimulationReport& report);

}  // namespace mlpsched
