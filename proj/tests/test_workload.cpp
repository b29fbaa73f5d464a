#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mlpsched/workload.hpp"

using namespace mlpsched;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mlpsched_test_workload";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::filesystem::path write_text(const std::string& name,
                                 const std::string& text) {
  auto path = scratch(name);
  std::ofstream(path, std::ios::binary) << text;
  return path;
}

constexpr const char* kHeader =
    "{\"format\":\"mlpsched-trace\",\"version\":1}\n";

}  // namespace

TEST_CASE("explicit phases pass through unchanged") {
  WorkloadSpec spec;
  spec.explicit_phases = std::vector<Phase>{{1'000'000, 4}};
  const auto w = generate_synthetic(spec, 1, 0);
  REQUIRE(w.size() == 1);
  CHECK(w[0].thread == 0);
  CHECK(w[0].phases == std::vector<Phase>{{1'000'000, 4}});
}

TEST_CASE("synthetic generation is seeded and stays in range") {
  WorkloadSpec spec;
  spec.num_phases = 5;
  spec.duration = {100, 5000};
  spec.demand = {2, 12};
  const auto a = generate_synthetic(spec, 16, 123);
  CHECK(a == generate_synthetic(spec, 16, 123));
  CHECK(a != generate_synthetic(spec, 16, 124));
  REQUIRE(a.size() == 16);
  std::uint32_t lo = 99, hi = 0;
  for (ThreadId t = 0; t < a.size(); ++t) {
    CHECK(a[t].thread == t);
    REQUIRE(a[t].phases.size() == 5);
    for (const Phase& p : a[t].phases) {
      CHECK(p.demand >= 2);
      CHECK(p.demand <= 12);
      CHECK(p.duration >= 100);
      CHECK(p.duration <= 5000);
      lo = std::min(lo, p.demand);
      hi = std::max(hi, p.demand);
    }
  }
  // 80 draws from 11 values reach both ends.
  CHECK(lo == 2);
  CHECK(hi == 12);
}

TEST_CASE("invalid specs are rejected") {
  WorkloadSpec spec;
  spec.duration = {10, 5};
  CHECK_THROWS_AS(generate_synthetic(spec, 1, 0), ConfigError);
  spec.duration = {0, 5};
  CHECK_THROWS_AS(generate_synthetic(spec, 1, 0), ConfigError);
  spec.duration = {1, 5};
  spec.demand = {4, 3};
  CHECK_THROWS_AS(generate_synthetic(spec, 1, 0), ConfigError);
  spec.demand = {0, 20};
  CHECK_NOTHROW(validate_spec(spec));
  CHECK_THROWS_WITH_AS(validate_spec(spec, 16), doctest::Contains("20"),
                       ConfigError);
  spec.num_phases = 0;
  CHECK_THROWS_AS(validate_spec(spec), ConfigError);
  WorkloadSpec empty;
  empty.explicit_phases = std::vector<Phase>{};
  CHECK_THROWS_AS(validate_spec(empty), ConfigError);
}

TEST_CASE("trace round trip is the identity") {
  WorkloadSpec spec;
  spec.num_phases = 3;
  spec.duration = {1, 1'000'000'000'000ULL};
  spec.demand = {0, 16};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.repeat = seed % 2 == 0;
    const auto w = generate_synthetic(spec, 1 + seed % 9, seed);
    const auto path = scratch("roundtrip.trace");
    save_trace(w, path);
    CHECK(load_trace(path) == w);
    CHECK(load_trace(path, 16) == w);
  }
  save_trace({}, scratch("empty.trace"));
  CHECK(load_trace(scratch("empty.trace")).empty());
}

TEST_CASE("trace loader errors name the line") {
  SUBCASE("negative demand") {
    auto p = write_text("neg.trace",
                        std::string(kHeader) +
                            R"({"thread":0,"phase":0,"duration":10,"demand":2,"repeat":true})"
                            "\n"
                            R"({"thread":0,"phase":1,"duration":10,"demand":-3,"repeat":true})"
                            "\n");
    try {
      load_trace(p);
      FAIL("expected TraceError");
    } catch (const TraceError& e) {
      CHECK(e.line() == 3);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
      CHECK(std::string(e.what()).find("demand") != std::string::npos);
    }
  }
  SUBCASE("thread with an empty phase list") {
    auto p = write_text("gap.trace",
                        std::string(kHeader) +
                            R"({"thread":0,"phase":0,"duration":10,"demand":2,"repeat":true})"
                            "\n"
                            R"({"thread":2,"phase":0,"duration":10,"demand":2,"repeat":true})"
                            "\n");
    CHECK_THROWS_WITH_AS(load_trace(p), doctest::Contains("thread 1 has an empty"),
                         TraceError);
  }
  SUBCASE("demand over the MSHR cap") {
    auto p = write_text("cap.trace",
                        std::string(kHeader) +
                            R"({"thread":0,"phase":0,"duration":10,"demand":17,"repeat":false})"
                            "\n");
    CHECK_NOTHROW(load_trace(p));
    CHECK_THROWS_WITH_AS(load_trace(p, 16), doctest::Contains("line 2"),
                         TraceError);
  }
  SUBCASE("malformed JSON") {
    auto p = write_text("bad.trace", std::string(kHeader) + "{thread: 0}\n");
    CHECK_THROWS_WITH_AS(load_trace(p), doctest::Contains("line 2"), TraceError);
  }
  SUBCASE("missing field") {
    auto p = write_text("missing.trace",
                        std::string(kHeader) +
                            R"({"thread":0,"phase":0,"demand":2,"repeat":true})"
                            "\n");
    CHECK_THROWS_WITH_AS(load_trace(p), doctest::Contains("duration"),
                         TraceError);
  }
  SUBCASE("phase out of order") {
    auto p = write_text("order.trace",
                        std::string(kHeader) +
                            R"({"thread":0,"phase":1,"duration":10,"demand":2,"repeat":true})"
                            "\n");
    CHECK_THROWS_WITH_AS(load_trace(p), doctest::Contains("phase"), TraceError);
  }
  SUBCASE("inconsistent repeat flag") {
    auto p = write_text("repeat.trace",
                        std::string(kHeader) +
                            R"({"thread":0,"phase":0,"duration":10,"demand":2,"repeat":true})"
                            "\n"
                            R"({"thread":0,"phase":1,"duration":10,"demand":2,"repeat":false})"
                            "\n");
    CHECK_THROWS_WITH_AS(load_trace(p), doctest::Contains("line 3"), TraceError);
  }
  SUBCASE("wrong header") {
    auto p = write_text("header.trace", "{\"format\":\"csv\",\"version\":1}\n");
    CHECK_THROWS_WITH_AS(load_trace(p), doctest::Contains("line 1"), TraceError);
    auto q = write_text("version.trace",
                        "{\"format\":\"mlpsched-trace\",\"version\":2}\n");
    CHECK_THROWS_AS(load_trace(q), TraceError);
  }
  CHECK_THROWS_AS(load_trace(scratch("does-not-exist.trace")), TraceError);
}
