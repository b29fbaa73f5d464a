#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mlpsched/experiment.hpp"

using namespace mlpsched;

namespace {

const std::filesystem::path kSourceDir = MLPSCHED_SOURCE_DIR;

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mlpsched_test_experiment" /
             name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(slurp(p));
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

ExperimentConfig parse(const std::string& text) {
  return parse_experiment_config(text, kSourceDir);
}

constexpr const char* kTiny = R"({
  "num_processors": 2, "slots_per_processor": 2,
  "quantum_cycles": 5000, "window_cycles": 1000, "memory_latency": 50,
  "policies": ["serpentine", "naive_sorted"],
  "seed": 5, "total_quanta": 4,
  "workload": {"num_phases": 3, "duration": [500, 4000], "demand": [0, 12]}
})";

}  // namespace

TEST_CASE("config parsing fills defaults and fields") {
  const auto cfg = parse(R"({"workload": {"phases": [{"duration": 10, "demand": 1}]}})");
  CHECK(cfg.system == SystemConfig{});
  CHECK(cfg.policies == std::vector<PolicyId>{PolicyId::kSerpentine});
  CHECK(cfg.total_quanta == 10);

  const auto tiny = parse(kTiny);
  CHECK(tiny.system.num_processors == 2);
  CHECK(tiny.system.memory_latency == 50);
  CHECK(tiny.policies ==
        std::vector<PolicyId>{PolicyId::kSerpentine, PolicyId::kNaiveSorted});
  CHECK(tiny.seed == 5);
  REQUIRE(std::holds_alternative<SyntheticSource>(tiny.workload));
  CHECK(std::get<SyntheticSource>(tiny.workload).spec.num_phases == 3);
}

TEST_CASE("config errors name the field") {
  CHECK_THROWS_WITH_AS(
      parse(R"({"policies": ["serpentine", "fastest"], "workload": {"phases": [{"duration": 1, "demand": 0}]}})"),
      doctest::Contains("policies[1]: unknown policy 'fastest'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"mshrs": 4, "workload": {}})"),
                       doctest::Contains("mshrs"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse(R"({"window_cycles": 200000, "workload": {"phases": [{"duration": 1, "demand": 0}]}})"),
      doctest::Contains("window_cycles"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse(R"({"memory_latency": -5, "workload": {"phases": [{"duration": 1, "demand": 0}]}})"),
      doctest::Contains("memory_latency"), ConfigError);
  CHECK_THROWS_WITH_AS(parse(R"({"workload": {"demand": [0, 4]}})"),
                       doctest::Contains("workload"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse(R"({"num_processors": 1, "slots_per_processor": 2,
                "initial_schedule": [[0, 0], [0, 0]],
                "workload": {"phases": [{"duration": 1, "demand": 0}]}})"),
      doctest::Contains("initial_schedule"), ConfigError);
  CHECK_THROWS_WITH_AS(
      parse(R"({"sweep": {"colour": [1]}, "workload": {"phases": [{"duration": 1, "demand": 0}]}})"),
      doctest::Contains("sweep.colour"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("not json"), doctest::Contains("JSON"),
                       ConfigError);

  // Demand above the pool is caught when the workload is resolved.
  const auto cfg = parse(
      R"({"mshrs_per_processor": 4, "workload": {"phases": [{"duration": 1, "demand": 9}]}})");
  CHECK_THROWS_WITH_AS(resolve_workloads(cfg, cfg.system),
                       doctest::Contains("workload"), ConfigError);
}

TEST_CASE("trace workloads resolve relative to the config file") {
  const auto dir = scratch("trace_source");
  std::vector<ThreadWorkload> w{{0, {{100, 3}, {50, 0}}, true},
                                {1, {{70, 5}}, false}};
  save_trace(w, dir / "w.trace");
  std::ofstream(dir / "exp.json") << R"({
    "num_processors": 1, "slots_per_processor": 2,
    "workload": {"trace": "w.trace"}
  })";
  const auto cfg = load_experiment_config(dir / "exp.json");
  CHECK(resolve_workloads(cfg, cfg.system) == w);

  SystemConfig small = cfg.system;
  small.mshrs_per_processor = 4;
  CHECK_THROWS_WITH_AS(resolve_workloads(cfg, small),
                       doctest::Contains("line 4"), ConfigError);
}

TEST_CASE("simulate writes schema-stable, deterministic outputs") {
  const auto cfg = parse(kTiny);
  const auto a = scratch("simulate_a");
  const auto b = scratch("simulate_b");
  cmd_simulate(cfg, a);
  cmd_simulate(cfg, b);
  for (const char* f : {"quanta.csv", "processors.csv", "summary.json"}) {
    REQUIRE(std::filesystem::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }

  const auto quanta = read_csv(a / "quanta.csv");
  CHECK(quanta[0] == std::vector<std::string>{
                         "policy_index", "policy", "quantum", "thread",
                         "processor", "slot", "sampled_mlp", "next_processor",
                         "next_slot", "completed", "stall_cycles",
                         "occupancy_cycles"});
  CHECK(quanta.size() == 1 + 2 * 4 * 4);  // policies x quanta x threads
  CHECK(quanta[1][1] == "serpentine");
  CHECK(quanta.back()[1] == "naive_sorted");

  const auto summary = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(summary["command"] == "simulate");
  REQUIRE(summary["runs"].size() == 2);
  for (const auto& run : summary["runs"]) {
    CHECK(run.contains("throughput"));
    CHECK(run.contains("mean_oversubscription"));
    CHECK(run["throughput"].get<double>() > 0.0);
  }
}

TEST_CASE("compare reports speedups against the first policy") {
  SUBCASE("policy against itself") {
    auto cfg = parse(kTiny);
    cfg.policies = {PolicyId::kSerpentine, PolicyId::kSerpentine};
    const auto dir = scratch("compare_self");
    cmd_compare(cfg, dir);
    const auto rows = read_csv(dir / "comparison.csv");
    CHECK(rows[0] == std::vector<std::string>{"policy_index", "policy",
                                              "throughput", "total_stalls",
                                              "mean_gap",
                                              "mean_oversubscription",
                                              "speedup"});
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][6] == "1");
    CHECK(rows[2][6] == "1");
    CHECK(rows[1][2] == rows[2][2]);
  }
  SUBCASE("crowded static placement against serpentine") {
    const auto cfg =
        load_experiment_config(kSourceDir / "configs" / "speedup_12_12_2_2.json");
    auto two = cfg;
    two.policies = {PolicyId::kStatic, PolicyId::kSerpentine};
    const auto dir = scratch("compare_speedup");
    cmd_compare(two, dir);
    const auto rows = read_csv(dir / "comparison.csv");
    REQUIRE(rows.size() == 3);
    CHECK(std::stod(rows[2][6]) == doctest::Approx(1.4).epsilon(0.05));
  }
  SUBCASE("needs two policies") {
    auto cfg = parse(kTiny);
    cfg.policies = {PolicyId::kSerpentine};
    CHECK_THROWS_AS(cmd_compare(cfg, scratch("compare_one")), ConfigError);
  }
  CHECK(speedup(0.0, 0.0) == 1.0);
  CHECK(speedup(0.2, 0.1) == 2.0);
}

TEST_CASE("serpentine mean gap never exceeds naive on the seeded corpus") {
  auto cfg = parse(kTiny);
  cfg.system.num_processors = 3;
  cfg.system.slots_per_processor = 3;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    cfg.seed = seed;
    const auto runs = run_policies(cfg, cfg.system);
    REQUIRE(runs.size() == 2);
    CHECK(runs[0].totals.mean_gap <= runs[1].totals.mean_gap);
  }
}

TEST_CASE("sweep covers the cartesian product") {
  auto cfg = parse(kTiny);
  cfg.sweep = {{"mshrs_per_processor", {12, 16}}, {"memory_latency", {20, 40, 60}}};
  const auto dir = scratch("sweep");
  cmd_sweep(cfg, dir);
  const auto rows = read_csv(dir / "sweep.csv");
  CHECK(rows[0] == std::vector<std::string>{"point", "mshrs_per_processor",
                                            "memory_latency", "policy_index",
                                            "policy", "throughput",
                                            "total_stalls", "mean_gap",
                                            "mean_oversubscription"});
  REQUIRE(rows.size() == 1 + 6 * 2);
  CHECK(rows[1][1] == "12");
  CHECK(rows[1][2] == "20");
  CHECK(rows[3][2] == "40");
  CHECK(rows.back()[1] == "16");
  CHECK(rows.back()[2] == "60");

  const auto again = scratch("sweep_again");
  cmd_sweep(cfg, again);
  CHECK(slurp(dir / "sweep.csv") == slurp(again / "sweep.csv"));
  CHECK(slurp(dir / "summary.json") == slurp(again / "summary.json"));

  cfg.sweep = {{"mshrs_per_processor", {16, 8}}};
  CHECK_THROWS_WITH_AS(cmd_sweep(cfg, scratch("sweep_bad")),
                       doctest::Contains("sweep point 1"), ConfigError);
}

TEST_CASE("oracle comparison rows") {
  SystemConfig c;
  c.num_processors = 2;
  c.slots_per_processor = 2;
  const auto row = oracle_compare({8, 6, 4, 2}, c);
  CHECK(row.serpentine_max == 10);
  CHECK(row.optimal_max == 10);
  CHECK(row.ratio == 1.0);
  CHECK(oracle_compare({3, 3, 3, 3}, c).ratio == 1.0);
  const auto zero = oracle_compare({0, 0, 0, 0}, c);
  CHECK(zero.serpentine_max == 0);
  CHECK(zero.optimal_max == 0);
  CHECK(zero.ratio == 1.0);

  c.slots_per_processor = 3;
  // Serpentine {9,3,2 | 7,5,1} peaks at 14, the ceiling of 27 / 2.
  CHECK(oracle_compare({9, 7, 5, 3, 2, 1}, c).ratio == 1.0);
}

TEST_CASE("oracle-check over simulated quanta") {
  auto cfg = parse(kTiny);
  std::ostringstream os;
  const double worst = cmd_oracle_check(cfg, os);
  const std::string out = os.str();
  CHECK(out.find("quantum 0 serpentine_max=") == 0);
  CHECK(out.find("quantum 3 ") != std::string::npos);
  CHECK(out.find("corpus_max_ratio=") != std::string::npos);
  CHECK(worst >= 1.0);

  cfg.system.num_processors = 4;
  cfg.system.slots_per_processor = 4;
  std::ostringstream sink;
  CHECK_THROWS_AS(cmd_oracle_check(cfg, sink), ConfigError);
}

TEST_CASE("oracle corpus is deterministic and bounded") {
  const OracleCorpus spec{50, 9, 16.0};
  const auto a = oracle_corpus(spec);
  const auto b = oracle_corpus(spec);
  REQUIRE(a.size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].system == b[i].system);
    CHECK(a[i].mlp == b[i].mlp);
    CHECK(a[i].system.num_threads() <= kMaxOptimalThreads);
    CHECK(a[i].mlp.size() == a[i].system.num_threads());
  }
}
