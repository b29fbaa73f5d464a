#include "mlpsched/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "mlpsched/rng.hpp"

namespace mlpsched {

using nlohmann::ordered_json;

namespace {

constexpr std::array<const char*, 14> kTopLevelKeys{
    "num_processors", "slots_per_processor", "mshrs_per_processor",
    "memory_latency", "quantum_cycles",      "window_cycles",
    "migration_penalty", "policies",         "seed",
    "total_quanta",   "workload",            "initial_schedule",
    "sweep",          "oracle_corpus"};

std::uint64_t as_u64(const ordered_json& j, const std::string& field) {
  if (!j.is_number_unsigned()) {
    throw ConfigError(fmt::format("{}: expected a non-negative integer, got {}",
                                  field, j.dump()));
  }
  return j.get<std::uint64_t>();
}

std::uint32_t as_u32(const ordered_json& j, const std::string& field) {
  const std::uint64_t v = as_u64(j, field);
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError(fmt::format("{}: {} is out of range", field, v));
  }
  return static_cast<std::uint32_t>(v);
}

bool as_bool(const ordered_json& j, const std::string& field) {
  if (!j.is_boolean()) {
    throw ConfigError(fmt::format("{}: expected true or false", field));
  }
  return j.get<bool>();
}

const ordered_json& as_array(const ordered_json& j, const std::string& field) {
  if (!j.is_array()) {
    throw ConfigError(fmt::format("{}: expected an array", field));
  }
  return j;
}

void reject_unknown(const ordered_json& obj,
                    std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw ConfigError(fmt::format("{}{}: unknown field", where, key));
    }
  }
}

// Sets a SystemConfig field (or seed / total_quanta) by name.
bool set_field(ExperimentConfig& cfg, SystemConfig& sys,
               const std::string& name, std::uint64_t value) {
  auto narrow = [&](std::uint64_t v) {
    if (v > std::numeric_limits<std::uint32_t>::max()) {
      throw ConfigError(fmt::format("{}: {} is out of range", name, v));
    }
    return static_cast<std::uint32_t>(v);
  };
  if (name == "num_processors") sys.num_processors = narrow(value);
  else if (name == "slots_per_processor") sys.slots_per_processor = narrow(value);
  else if (name == "mshrs_per_processor") sys.mshrs_per_processor = narrow(value);
  else if (name == "memory_latency") sys.memory_latency = value;
  else if (name == "quantum_cycles") sys.quantum_cycles = value;
  else if (name == "window_cycles") sys.window_cycles = value;
  else if (name == "migration_penalty") sys.migration_penalty = value;
  else if (name == "seed") cfg.seed = value;
  else if (name == "total_quanta") cfg.total_quanta = value;
  else return false;
  return true;
}

std::vector<Phase> parse_phases(const ordered_json& j,
                                const std::string& field) {
  std::vector<Phase> phases;
  for (std::size_t i = 0; i < as_array(j, field).size(); ++i) {
    const std::string at = fmt::format("{}[{}]", field, i);
    const ordered_json& ph = j[i];
    if (!ph.is_object()) throw ConfigError(at + ": expected an object");
    reject_unknown(ph, {"duration", "demand"}, at + ".");
    if (!ph.contains("duration") || !ph.contains("demand")) {
      throw ConfigError(at + ": needs duration and demand");
    }
    phases.push_back({as_u64(ph["duration"], at + ".duration"),
                      as_u32(ph["demand"], at + ".demand")});
  }
  return phases;
}

template <typename T>
Range<T> parse_range(const ordered_json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(fmt::format("{}: expected [min, max]", field));
  }
  auto bound = [&](std::size_t i) {
    const std::string at = fmt::format("{}[{}]", field, i);
    const std::uint64_t v = as_u64(j[i], at);
    if (v > std::numeric_limits<T>::max()) {
      throw ConfigError(fmt::format("{}: {} is out of range", at, v));
    }
    return static_cast<T>(v);
  };
  return {bound(0), bound(1)};
}

WorkloadSource parse_workload(const ordered_json& j,
                              const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("workload: expected an object");
  if (j.contains("trace")) {
    reject_unknown(j, {"trace"}, "workload.");
    if (!j["trace"].is_string()) {
      throw ConfigError("workload.trace: expected a path string");
    }
    std::filesystem::path p = j["trace"].get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    return TraceSource{p};
  }
  if (j.contains("threads")) {
    reject_unknown(j, {"threads"}, "workload.");
    InlineThreads out;
    const auto& threads = as_array(j["threads"], "workload.threads");
    for (std::size_t t = 0; t < threads.size(); ++t) {
      const std::string at = fmt::format("workload.threads[{}]", t);
      const ordered_json& th = threads[t];
      if (!th.is_object()) throw ConfigError(at + ": expected an object");
      reject_unknown(th, {"phases", "repeat"}, at + ".");
      if (!th.contains("phases")) throw ConfigError(at + ".phases: missing");
      ThreadWorkload w{t, parse_phases(th["phases"], at + ".phases"), true};
      if (w.phases.empty()) {
        throw ConfigError(at + ".phases: phase list is empty");
      }
      if (th.contains("repeat")) w.repeat = as_bool(th["repeat"], at + ".repeat");
      out.threads.push_back(std::move(w));
    }
    return out;
  }
  reject_unknown(j, {"phases", "num_phases", "duration", "demand", "repeat",
                     "num_threads"},
                 "workload.");
  SyntheticSource src;
  if (j.contains("phases")) {
    src.spec.explicit_phases = parse_phases(j["phases"], "workload.phases");
  } else {
    if (j.contains("num_phases")) {
      src.spec.num_phases = as_u64(j["num_phases"], "workload.num_phases");
    }
    if (!j.contains("duration") || !j.contains("demand")) {
      throw ConfigError(
          "workload: needs trace, threads, phases, or duration+demand ranges");
    }
    src.spec.duration =
        parse_range<std::uint64_t>(j["duration"], "workload.duration");
    src.spec.demand = parse_range<std::uint32_t>(j["demand"], "workload.demand");
  }
  if (j.contains("repeat")) src.spec.repeat = as_bool(j["repeat"], "workload.repeat");
  if (j.contains("num_threads")) {
    src.num_threads = as_u64(j["num_threads"], "workload.num_threads");
  }
  validate_spec(src.spec);
  return src;
}

// Bounded worker pool; results and exceptions land at their index so the
// outcome never depends on completion order.
template <typename R>
std::vector<R> parallel_map(std::size_t count,
                            const std::function<R(std::size_t)>& fn) {
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(
      count, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& writer) {
  auto os = open_output(path);
  writer(os);
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

ordered_json system_json(const SystemConfig& s) {
  return {{"num_processors", s.num_processors},
          {"slots_per_processor", s.slots_per_processor},
          {"mshrs_per_processor", s.mshrs_per_processor},
          {"memory_latency", s.memory_latency},
          {"quantum_cycles", s.quantum_cycles},
          {"window_cycles", s.window_cycles},
          {"migration_penalty", s.migration_penalty}};
}

ordered_json run_json(std::size_t index, const SimulationReport& r) {
  return {{"policy_index", index},
          {"policy", policy_name(r.policy)},
          {"throughput", r.totals.throughput},
          {"completed_total", r.totals.completed_total},
          {"stall_cycles_total", r.totals.stall_cycles_total},
          {"mean_gap", r.totals.mean_gap},
          {"mean_oversubscription", r.totals.mean_oversubscription},
          {"mean_occupancy_per_processor",
           r.totals.mean_occupancy_per_processor}};
}

ordered_json metadata_json() {
  return {{"tool", "mlpsched"}, {"output_format_version", 1}};
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: not valid JSON");
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(kTopLevelKeys.begin(), kTopLevelKeys.end(),
                     [&](const char* k) { return key == k; })) {
      throw ConfigError(key + ": unknown field");
    }
  }

  ExperimentConfig cfg;
  for (const char* name :
       {"num_processors", "slots_per_processor", "mshrs_per_processor",
        "memory_latency", "quantum_cycles", "window_cycles",
        "migration_penalty", "seed", "total_quanta"}) {
    if (j.contains(name)) set_field(cfg, cfg.system, name, as_u64(j[name], name));
  }
  validate_config(cfg.system);
  if (cfg.total_quanta < 1) throw ConfigError("total_quanta: must be >= 1");

  if (j.contains("policies")) {
    cfg.policies.clear();
    const auto& arr = as_array(j["policies"], "policies");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = fmt::format("policies[{}]", i);
      if (!arr[i].is_string()) throw ConfigError(at + ": expected a string");
      try {
        cfg.policies.push_back(parse_policy(arr[i].get<std::string>()));
      } catch (const ConfigError& e) {
        throw ConfigError(at + ": " + e.what());
      }
    }
    if (cfg.policies.empty()) throw ConfigError("policies: list is empty");
  }

  if (!j.contains("workload")) throw ConfigError("workload: missing");
  cfg.workload = parse_workload(j["workload"], base_dir);

  if (j.contains("initial_schedule")) {
    const auto& arr = as_array(j["initial_schedule"], "initial_schedule");
    std::vector<Placement> placement;
    for (std::size_t t = 0; t < arr.size(); ++t) {
      const std::string at = fmt::format("initial_schedule[{}]", t);
      if (!arr[t].is_array() || arr[t].size() != 2) {
        throw ConfigError(at + ": expected [processor, slot]");
      }
      placement.push_back({as_u32(arr[t][0], at), as_u32(arr[t][1], at)});
    }
    Schedule s(std::move(placement));
    if (auto verdict = validate_schedule(s, cfg.system); !verdict) {
      throw ConfigError("initial_schedule: " + verdict.message);
    }
    cfg.initial_schedule = std::move(s);
  }

  if (j.contains("sweep")) {
    if (!j["sweep"].is_object()) throw ConfigError("sweep: expected an object");
    for (const auto& [key, values] : j["sweep"].items()) {
      const std::string at = "sweep." + key;
      SystemConfig probe;
      ExperimentConfig probe_cfg;
      if (!set_field(probe_cfg, probe, key, 1)) {
        throw ConfigError(at + ": not a sweepable field");
      }
      SweepAxis axis{key, {}};
      for (std::size_t i = 0; i < as_array(values, at).size(); ++i) {
        axis.values.push_back(as_u64(values[i], fmt::format("{}[{}]", at, i)));
      }
      if (axis.values.empty()) throw ConfigError(at + ": no values");
      cfg.sweep.push_back(std::move(axis));
    }
  }

  if (j.contains("oracle_corpus")) {
    const ordered_json& oc = j["oracle_corpus"];
    if (!oc.is_object()) throw ConfigError("oracle_corpus: expected an object");
    reject_unknown(oc, {"instances", "seed", "max_value"}, "oracle_corpus.");
    OracleCorpus corpus;
    if (oc.contains("instances")) {
      corpus.instances = as_u64(oc["instances"], "oracle_corpus.instances");
    }
    if (oc.contains("seed")) corpus.seed = as_u64(oc["seed"], "oracle_corpus.seed");
    if (oc.contains("max_value")) {
      if (!oc["max_value"].is_number() || oc["max_value"].get<double>() <= 0) {
        throw ConfigError("oracle_corpus.max_value: expected a positive number");
      }
      corpus.max_value = oc["max_value"].get<double>();
    }
    cfg.oracle_corpus = corpus;
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_experiment_config(buf.str(), path.parent_path());
}

std::vector<ThreadWorkload> resolve_workloads(const ExperimentConfig& config,
                                              const SystemConfig& system) {
  std::vector<ThreadWorkload> out;
  if (const auto* src = std::get_if<SyntheticSource>(&config.workload)) {
    validate_spec(src->spec, system.mshrs_per_processor);
    out = generate_synthetic(src->spec,
                             src->num_threads.value_or(system.num_threads()),
                             config.seed);
  } else if (const auto* inl = std::get_if<InlineThreads>(&config.workload)) {
    out = inl->threads;
  } else {
    const auto& trace = std::get<TraceSource>(config.workload);
    try {
      out = load_trace(trace.path, system.mshrs_per_processor);
    } catch (const TraceError& e) {
      throw ConfigError(fmt::format("workload.trace ({}): {}",
                                    trace.path.string(), e.what()));
    }
  }
  try {
    validate_workloads(out, system);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("workload: ") + e.what());
  }
  return out;
}

std::vector<SimulationReport> run_policies(const ExperimentConfig& config,
                                           const SystemConfig& system) {
  const auto workloads = resolve_workloads(config, system);
  return parallel_map<SimulationReport>(
      config.policies.size(), [&](std::size_t i) {
        return run_simulation(system, workloads, config.policies[i],
                              config.seed, config.total_quanta,
                              config.initial_schedule);
      });
}

double speedup(double throughput, double baseline) {
  if (baseline == 0.0) {
    return throughput == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  return throughput / baseline;
}

void write_quanta_csv(const std::vector<SimulationReport>& runs,
                      std::ostream& os) {
  os << "policy_index,policy,quantum,thread,processor,slot,sampled_mlp,"
        "next_processor,next_slot,completed,stall_cycles,occupancy_cycles\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto name = policy_name(runs[i].policy);
    for (const QuantumRecord& q : runs[i].per_quantum) {
      for (ThreadId t = 0; t < q.sampled.size(); ++t) {
        os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", i, name,
                          q.index, t, q.schedule[t].processor,
                          q.schedule[t].slot, q.sampled[t],
                          q.chosen[t].processor, q.chosen[t].slot,
                          q.completed[t], q.stall_cycles[t],
                          q.occupancy_cycles[t]);
      }
    }
  }
}

void write_processors_csv(const std::vector<SimulationReport>& runs,
                          std::ostream& os) {
  os << "policy_index,policy,quantum,processor,occupancy_cycles,"
        "next_mlp_sum,next_oversubscription\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto name = policy_name(runs[i].policy);
    for (const QuantumRecord& q : runs[i].per_quantum) {
      for (std::size_t p = 0; p < q.processor_occupancy_cycles.size(); ++p) {
        os << fmt::format("{},{},{},{},{},{},{}\n", i, name, q.index, p,
                          q.processor_occupancy_cycles[p],
                          q.quality.per_processor_mlp_sum[p],
                          q.quality.per_processor_oversubscription[p]);
      }
    }
  }
}

void write_comparison_csv(const std::vector<SimulationReport>& runs,
                          std::ostream& os) {
  os << "policy_index,policy,throughput,total_stalls,mean_gap,"
        "mean_oversubscription,speedup\n";
  if (runs.empty()) return;
  const double base = runs.front().totals.throughput;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const ReportTotals& t = runs[i].totals;
    os << fmt::format("{},{},{},{},{},{},{}\n", i, policy_name(runs[i].policy),
                      t.throughput, t.stall_cycles_total, t.mean_gap,
                      t.mean_oversubscription, speedup(t.throughput, base));
  }
}

std::string summary_json(const std::string& command,
                         const ExperimentConfig& config,
                         const std::vector<SimulationReport>& runs) {
  ordered_json doc;
  doc["command"] = command;
  doc["system"] = system_json(runs.empty() ? config.system : runs.front().config);
  doc["seed"] = config.seed;
  doc["total_quanta"] = config.total_quanta;
  doc["runs"] = ordered_json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    doc["runs"].push_back(run_json(i, runs[i]));
  }
  doc["metadata"] = metadata_json();
  return doc.dump(2) + "\n";
}

void cmd_simulate(const ExperimentConfig& config,
                  const std::filesystem::path& out_dir) {
  const auto runs = run_policies(config, config.system);
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "quanta.csv",
             [&](std::ostream& os) { write_quanta_csv(runs, os); });
  write_file(out_dir / "processors.csv",
             [&](std::ostream& os) { write_processors_csv(runs, os); });
  write_file(out_dir / "summary.json", [&](std::ostream& os) {
    os << summary_json("simulate", config, runs);
  });
}

void cmd_compare(const ExperimentConfig& config,
                 const std::filesystem::path& out_dir) {
  if (config.policies.size() < 2) {
    throw ConfigError("policies: compare needs at least two policies");
  }
  const auto runs = run_policies(config, config.system);
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "quanta.csv",
             [&](std::ostream& os) { write_quanta_csv(runs, os); });
  write_file(out_dir / "processors.csv",
             [&](std::ostream& os) { write_processors_csv(runs, os); });
  write_file(out_dir / "comparison.csv",
             [&](std::ostream& os) { write_comparison_csv(runs, os); });
  write_file(out_dir / "summary.json", [&](std::ostream& os) {
    os << summary_json("compare", config, runs);
  });
}

void cmd_sweep(const ExperimentConfig& config,
               const std::filesystem::path& out_dir) {
  if (config.sweep.empty()) throw ConfigError("sweep: no axes given");

  // Cartesian product, last axis fastest.
  struct Point {
    ExperimentConfig cfg;
    std::vector<std::uint64_t> values;
  };
  std::vector<Point> points;
  std::vector<std::size_t> idx(config.sweep.size(), 0);
  for (;;) {
    Point pt{config, {}};
    for (std::size_t a = 0; a < config.sweep.size(); ++a) {
      const std::uint64_t v = config.sweep[a].values[idx[a]];
      set_field(pt.cfg, pt.cfg.system, config.sweep[a].field, v);
      pt.values.push_back(v);
    }
    points.push_back(std::move(pt));
    std::size_t a = config.sweep.size();
    while (a > 0 && ++idx[a - 1] == config.sweep[a - 1].values.size()) {
      idx[--a] = 0;
    }
    if (a == 0) break;
  }

  auto describe = [&](std::size_t p) {
    std::string s;
    for (std::size_t a = 0; a < config.sweep.size(); ++a) {
      s += fmt::format("{}{}={}", a ? ", " : "", config.sweep[a].field,
                       points[p].values[a]);
    }
    return s;
  };
  for (std::size_t p = 0; p < points.size(); ++p) {
    try {
      validate_config(points[p].cfg.system);
      if (points[p].cfg.total_quanta < 1) {
        throw ConfigError("total_quanta: must be >= 1");
      }
      if (points[p].cfg.initial_schedule) {
        require_valid(*points[p].cfg.initial_schedule, points[p].cfg.system);
      }
      resolve_workloads(points[p].cfg, points[p].cfg.system);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(
          fmt::format("sweep point {} ({}): {}", p, describe(p), e.what()));
    }
  }

  const std::size_t np = config.policies.size();
  const auto runs = parallel_map<SimulationReport>(
      points.size() * np, [&](std::size_t i) {
        const ExperimentConfig& c = points[i / np].cfg;
        return run_simulation(c.system, resolve_workloads(c, c.system),
                              c.policies[i % np], c.seed, c.total_quanta,
                              c.initial_schedule);
      });

  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "sweep.csv", [&](std::ostream& os) {
    os << "point";
    for (const auto& axis : config.sweep) os << ',' << axis.field;
    os << ",policy_index,policy,throughput,total_stalls,mean_gap,"
          "mean_oversubscription\n";
    for (std::size_t i = 0; i < runs.size(); ++i) {
      os << i / np;
      for (std::uint64_t v : points[i / np].values) os << ',' << v;
      const ReportTotals& t = runs[i].totals;
      os << fmt::format(",{},{},{},{},{},{}\n", i % np,
                        policy_name(runs[i].policy), t.throughput,
                        t.stall_cycles_total, t.mean_gap,
                        t.mean_oversubscription);
    }
  });
  write_file(out_dir / "summary.json", [&](std::ostream& os) {
    ordered_json doc;
    doc["command"] = "sweep";
    doc["system"] = system_json(config.system);
    doc["seed"] = config.seed;
    doc["total_quanta"] = config.total_quanta;
    doc["points"] = ordered_json::array();
    for (std::size_t p = 0; p < points.size(); ++p) {
      ordered_json point;
      point["point"] = p;
      for (std::size_t a = 0; a < config.sweep.size(); ++a) {
        point["values"][config.sweep[a].field] = points[p].values[a];
      }
      point["runs"] = ordered_json::array();
      for (std::size_t k = 0; k < np; ++k) {
        point["runs"].push_back(run_json(k, runs[p * np + k]));
      }
      doc["points"].push_back(std::move(point));
    }
    doc["metadata"] = metadata_json();
    os << doc.dump(2) << '\n';
  });
}

OracleRow oracle_compare(const MlpVector& mlp, const SystemConfig& system) {
  OracleRow row;
  row.serpentine_max =
      processor_load(serpentine_schedule(mlp, system), mlp, system).max_sum;
  row.optimal_max =
      processor_load(optimal_partition(mlp, system), mlp, system).max_sum;
  if (row.optimal_max == 0.0) {
    row.ratio = row.serpentine_max == 0.0
                    ? 1.0
                    : std::numeric_limits<double>::infinity();
  } else {
    row.ratio = row.serpentine_max / row.optimal_max;
  }
  return row;
}

std::vector<OracleInstance> oracle_corpus(const OracleCorpus& corpus) {
  Rng rng(corpus.seed);
  std::vector<OracleInstance> out;
  out.reserve(corpus.instances);
  for (std::size_t i = 0; i < corpus.instances; ++i) {
    SystemConfig sys;
    sys.num_processors = static_cast<std::uint32_t>(rng.uniform_in(1, 4));
    const std::uint64_t max_l =
        std::min<std::uint64_t>(4, kMaxOptimalThreads / sys.num_processors);
    sys.slots_per_processor = static_cast<std::uint32_t>(rng.uniform_in(1, max_l));
    std::vector<double> values(sys.num_threads());
    for (double& v : values) {
      // 53 random mantissa bits -> [0, 1).
      v = static_cast<double>(rng.next() >> 11) * 0x1.0p-53 * corpus.max_value;
    }
    out.push_back({sys, MlpVector(std::move(values))});
  }
  return out;
}

double cmd_oracle_check(const ExperimentConfig& config, std::ostream& os) {
  double corpus_max = 1.0;
  auto emit = [&](const std::string& label, const MlpVector& mlp,
                  const SystemConfig& sys) {
    const OracleRow row = oracle_compare(mlp, sys);
    corpus_max = std::max(corpus_max, row.ratio);
    os << fmt::format("{} serpentine_max={} optimal_max={} ratio={}\n", label,
                      row.serpentine_max, row.optimal_max, row.ratio);
  };

  if (config.oracle_corpus) {
    const auto instances = oracle_corpus(*config.oracle_corpus);
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto& inst = instances[i];
      emit(fmt::format("instance {} K={} L={}", i, inst.system.num_processors,
                       inst.system.slots_per_processor),
           inst.mlp, inst.system);
    }
  } else {
    if (config.system.num_threads() > kMaxOptimalThreads) {
      throw ConfigError(fmt::format(
          "num_processors*slots_per_processor: {} threads exceeds the "
          "exhaustive oracle limit {}",
          config.system.num_threads(), kMaxOptimalThreads));
    }
    const SimulationReport report = run_simulation(
        config.system, resolve_workloads(config, config.system),
        PolicyId::kSerpentine, config.seed, config.total_quanta,
        config.initial_schedule);
    for (const QuantumRecord& q : report.per_quantum) {
      emit(fmt::format("quantum {}", q.index), q.sampled, config.system);
    }
  }
  os << fmt::format("corpus_max_ratio={}\n", corpus_max);
  return corpus_max;
}

}  // namespace mlpsched
