#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mlpsched/core_model.hpp"
#include "mlpsched/policies.hpp"
#include "mlpsched/simulator.hpp"
#include "mlpsched/workload.hpp"

namespace mlpsched {

struct TraceSource {
  std::filesystem::path path;
};

/// Inline per-thread phase lists.
struct InlineThreads {
  std::vector<ThreadWorkload> threads;
};

/// Synthetic template plus the number of threads to generate (default K*L).
struct SyntheticSource {
  WorkloadSpec spec;
  std::optional<std::size_t> num_threads;
};

using WorkloadSource = std::variant<SyntheticSource, InlineThreads, TraceSource>;

struct SweepAxis {
  std::string field;
  std::vector<std::uint64_t> values;
};

/// Random MLP instances for oracle-check instead of simulated quanta.
struct OracleCorpus {
  std::size_t instances = 200;
  std::uint64_t seed = 0;
  double max_value = 16.0;
};

struct ExperimentConfig {
  SystemConfig system;
  std::vector<PolicyId> policies{PolicyId::kSerpentine};
  std::uint64_t seed = 0;
  std::uint64_t total_quanta = 10;
  WorkloadSource workload = SyntheticSource{};
  std::optional<Schedule> initial_schedule;
  std::vector<SweepAxis> sweep;
  std::optional<OracleCorpus> oracle_corpus;
};

/// Parses a JSON config document. Relative trace paths resolve against
/// `base_dir`. Throws ConfigError naming the offending field.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Materializes the workload for `system`, idle padding not applied.
std::vector<ThreadWorkload> resolve_workloads(const ExperimentConfig& config,
                                              const SystemConfig& system);

/// Runs every listed policy on identical workloads and seed. Runs execute
/// concurrently; results come back in policy-list order.
std::vector<SimulationReport> run_policies(const ExperimentConfig& config,
                                           const SystemConfig& system);

/// throughput / baseline, with 0/0 defined as 1.
double speedup(double throughput, double baseline);

// Table writers. Column order is fixed; see docs/output_format.md.
void write_quanta_csv(const std::vector<SimulationReport>& runs,
                      std::ostream& os);
void write_processors_csv(const std::vector<SimulationReport>& runs,
                          std::ostream& os);
void write_comparison_csv(const std::vector<SimulationReport>& runs,
                          std::ostream& os);
std::string summary_json(const std::string& command,
                         const ExperimentConfig& config,
                         const std::vector<SimulationReport>& runs);

/// quanta.csv, processors.csv, summary.json.
void cmd_simulate(const ExperimentConfig& config,
                  const std::filesystem::path& out_dir);
/// As cmd_simulate plus comparison.csv. Needs at least two policies.
void cmd_compare(const ExperimentConfig& config,
                 const std::filesystem::path& out_dir);
/// sweep.csv and summary.json over the cartesian product of sweep axes.
void cmd_sweep(const ExperimentConfig& config,
               const std::filesystem::path& out_dir);

struct OracleRow {
  double serpentine_max = 0.0;
  double optimal_max = 0.0;
  /// serpentine_max / optimal_max, 1.0 when both are zero.
  double ratio = 1.0;
};

OracleRow oracle_compare(const MlpVector& mlp, const SystemConfig& system);

struct OracleInstance {
  SystemConfig system;
  MlpVector mlp;
};

/// Deterministic random instances with K*L <= kMaxOptimalThreads.
std::vector<OracleInstance> oracle_corpus(const OracleCorpus& corpus);

/// Prints one line per sampled vector (or corpus instance) and a final
/// `corpus_max_ratio=` line. Returns the corpus maximum ratio.
double cmd_oracle_check(const ExperimentConfig& config, std::ostream& os);

}  // namespace mlpsched
