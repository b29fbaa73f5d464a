#include "mlpsched/workload.hpp"

#include <fstream>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "mlpsched/rng.hpp"

namespace mlpsched {

using nlohmann::json;

void validate_spec(const WorkloadSpec& spec,
                   std::optional<std::uint32_t> demand_cap) {
  auto check_demand = [&](std::uint32_t demand, const std::string& where) {
    if (demand_cap && demand > *demand_cap) {
      throw ConfigError(fmt::format("{}: demand {} exceeds MSHR pool {}",
                                    where, demand, *demand_cap));
    }
  };
  if (spec.explicit_phases) {
    if (spec.explicit_phases->empty()) {
      throw ConfigError("workload.phases: phase list is empty");
    }
    for (std::size_t j = 0; j < spec.explicit_phases->size(); ++j) {
      const Phase& ph = (*spec.explicit_phases)[j];
      if (ph.duration < 1) {
        throw ConfigError(
            fmt::format("workload.phases[{}]: duration must be >= 1", j));
      }
      check_demand(ph.demand, fmt::format("workload.phases[{}]", j));
    }
    return;
  }
  if (spec.num_phases < 1) {
    throw ConfigError("workload.num_phases: must be >= 1");
  }
  if (spec.duration.min < 1 || spec.duration.min > spec.duration.max) {
    throw ConfigError(fmt::format(
        "workload.duration: range [{}, {}] is empty or starts below 1",
        spec.duration.min, spec.duration.max));
  }
  if (spec.demand.min > spec.demand.max) {
    throw ConfigError(fmt::format("workload.demand: range [{}, {}] is empty",
                                  spec.demand.min, spec.demand.max));
  }
  check_demand(spec.demand.max, "workload.demand");
}

std::vector<ThreadWorkload> generate_synthetic(const WorkloadSpec& spec,
                                               std::size_t n_threads,
                                               std::uint64_t seed) {
  validate_spec(spec);
  std::vector<ThreadWorkload> out;
  out.reserve(n_threads);
  if (spec.explicit_phases) {
    for (ThreadId t = 0; t < n_threads; ++t) {
      out.push_back({t, *spec.explicit_phases, spec.repeat});
    }
    return out;
  }
  Rng rng(seed);
  for (ThreadId t = 0; t < n_threads; ++t) {
    ThreadWorkload w{t, {}, spec.repeat};
    w.phases.reserve(spec.num_phases);
    for (std::size_t j = 0; j < spec.num_phases; ++j) {
      Phase ph;
      ph.duration = rng.uniform_in(spec.duration.min, spec.duration.max);
      ph.demand = static_cast<std::uint32_t>(
          rng.uniform_in(spec.demand.min, spec.demand.max));
      w.phases.push_back(ph);
    }
    out.push_back(std::move(w));
  }
  return out;
}

void save_trace(const std::vector<ThreadWorkload>& workloads,
                const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw TraceError(0, "cannot open " + path.string() + " for writing");
  os << json{{"format", kTraceFormat}, {"version", kTraceVersion}}.dump()
     << '\n';
  for (const ThreadWorkload& w : workloads) {
    for (std::size_t j = 0; j < w.phases.size(); ++j) {
      json rec = {{"thread", w.thread},
                  {"phase", j},
                  {"duration", w.phases[j].duration},
                  {"demand", w.phases[j].demand},
                  {"repeat", w.repeat}};
      os << rec.dump() << '\n';
    }
  }
  if (!os) throw TraceError(0, "write failed for " + path.string());
}

namespace {

std::uint64_t unsigned_field(const json& rec, const char* name,
                             std::size_t line) {
  auto it = rec.find(name);
  if (it == rec.end()) {
    throw TraceError(line, fmt::format("missing field '{}'", name));
  }
  if (!it->is_number_unsigned()) {
    throw TraceError(line, fmt::format("field '{}' must be a non-negative "
                                       "integer, got {}",
                                       name, it->dump()));
  }
  return it->get<std::uint64_t>();
}

}  // namespace

std::vector<ThreadWorkload> load_trace(const std::filesystem::path& path,
                                       std::optional<std::uint32_t> demand_cap) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw TraceError(0, "cannot open " + path.string());

  std::string text;
  std::size_t line = 0;
  if (!std::getline(is, text)) throw TraceError(1, "missing header line");
  ++line;
  {
    json header = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (!header.is_object() || header.value("format", "") != kTraceFormat) {
      throw TraceError(line, fmt::format("header must name format '{}'",
                                         kTraceFormat));
    }
    if (!header.contains("version") || header["version"] != kTraceVersion) {
      throw TraceError(line, fmt::format("unsupported version (expected {})",
                                         kTraceVersion));
    }
  }

  std::vector<ThreadWorkload> out;
  while (std::getline(is, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (rec.is_discarded() || !rec.is_object()) {
      throw TraceError(line, "record is not a JSON object");
    }
    const auto thread = unsigned_field(rec, "thread", line);
    const auto phase = unsigned_field(rec, "phase", line);
    const auto duration = unsigned_field(rec, "duration", line);
    const auto demand = unsigned_field(rec, "demand", line);
    auto rep = rec.find("repeat");
    if (rep == rec.end() || !rep->is_boolean()) {
      throw TraceError(line, "field 'repeat' must be true or false");
    }
    if (duration < 1) {
      throw TraceError(line, "field 'duration' must be >= 1");
    }
    if (demand > std::numeric_limits<std::uint32_t>::max()) {
      throw TraceError(line, fmt::format("field 'demand' = {} out of range",
                                         demand));
    }
    if (demand_cap && demand > *demand_cap) {
      throw TraceError(line, fmt::format("field 'demand' = {} exceeds MSHR "
                                         "pool {}",
                                         demand, *demand_cap));
    }

    if (out.empty() || out.back().thread != thread) {
      if (thread < out.size()) {
        throw TraceError(line, fmt::format("field 'thread' = {} out of order",
                                           thread));
      }
      if (thread > out.size()) {
        throw TraceError(line, fmt::format("thread {} has an empty phase list",
                                           out.size()));
      }
      out.push_back({thread, {}, rep->get<bool>()});
    }
    ThreadWorkload& w = out.back();
    if (phase != w.phases.size()) {
      throw TraceError(line, fmt::format("field 'phase' = {}, expected {}",
                                         phase, w.phases.size()));
    }
    if (rep->get<bool>() != w.repeat) {
      throw TraceError(line, fmt::format("field 'repeat' differs from earlier "
                                         "records of thread {}",
                                         thread));
    }
    w.phases.push_back({duration, static_cast<std::uint32_t>(demand)});
  }
  return out;
}

}  // namespace mlpsched
