#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gjra/model.hpp"

using namespace gjra;
using Catch::Approx;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gjra_model_" + name);
}

struct FileGuard {
  std::filesystem::path path;
  ~FileGuard() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("seeded generation") {
  const TaskRanges ranges;
  const Scenario s = generate_scenario(50, 4, std::sqrt(1000.0), 7,
                                       PhysicsConfig{}, UavBudget{}, ranges);
  REQUIRE(s.n() == 50);
  REQUIRE(s.m() == 4);
  for (const Device& d : s.devices) {
    CHECK(d.position.x >= 0.0);
    CHECK(d.position.x <= std::sqrt(1000.0));
    CHECK(d.task_bits >= ranges.bits_min);
    CHECK(d.task_bits <= ranges.bits_max);
    CHECK(d.task_cycles >= ranges.cycles_min);
    CHECK(d.task_cycles <= ranges.cycles_max);
  }

  SECTION("same arguments give identical serialized bytes") {
    const Scenario s2 = generate_scenario(50, 4, std::sqrt(1000.0), 7,
                                          PhysicsConfig{}, UavBudget{}, ranges);
    CHECK(s == s2);
    CHECK(to_json(s).dump() == to_json(s2).dump());
  }

  SECTION("different seed moves the devices") {
    const Scenario s3 = generate_scenario(50, 4, std::sqrt(1000.0), 8,
                                          PhysicsConfig{}, UavBudget{}, ranges);
    CHECK_FALSE(s == s3);
  }
}

TEST_CASE("degenerate square collapses to the origin") {
  const Scenario s = generate_scenario(1, 1, 0.0, 3, PhysicsConfig{},
                                       UavBudget{}, TaskRanges{});
  CHECK(s.devices[0].position == Vec2{0.0, 0.0});
  CHECK(s.positions[0].position == Vec2{0.0, 0.0});
}

TEST_CASE("generation argument validation") {
  CHECK_THROWS_AS(generate_scenario(0, 1, 10.0, 1, PhysicsConfig{},
                                    UavBudget{}, TaskRanges{}),
                  ValidationError);
  CHECK_THROWS_AS(generate_scenario(1, 0, 10.0, 1, PhysicsConfig{},
                                    UavBudget{}, TaskRanges{}),
                  ValidationError);
  TaskRanges bad;
  bad.bits_min = 10.0;
  bad.bits_max = 5.0;
  try {
    generate_scenario(1, 1, 10.0, 1, PhysicsConfig{}, UavBudget{}, bad);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "task_bits");
  }
}

TEST_CASE("scenario round-trips through JSON") {
  const Scenario s = generate_scenario(12, 3, 25.0, 11, PhysicsConfig{},
                                       UavBudget{}, TaskRanges{});
  FileGuard guard{temp_file("roundtrip.json")};
  save_scenario(s, guard.path);
  const Scenario loaded = load_scenario(guard.path);
  CHECK(loaded == s);
}

TEST_CASE("load rejects invariant violations naming the field") {
  const Scenario s = generate_scenario(2, 1, 10.0, 5, PhysicsConfig{},
                                       UavBudget{}, TaskRanges{});
  nlohmann::json j = to_json(s);
  j["physics"]["eh_efficiency"] = 1.5;
  FileGuard guard{temp_file("bad_eta.json")};
  {
    std::ofstream out(guard.path);
    out << j.dump();
  }
  try {
    load_scenario(guard.path);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "eh_efficiency");
  }
}

TEST_CASE("load rejects unknown schema versions") {
  const Scenario s = generate_scenario(1, 1, 10.0, 5, PhysicsConfig{},
                                       UavBudget{}, TaskRanges{});
  nlohmann::json j = to_json(s);
  j["version"] = 999;
  FileGuard guard{temp_file("bad_version.json")};
  {
    std::ofstream out(guard.path);
    out << j.dump();
  }
  CHECK_THROWS_AS(load_scenario(guard.path), VersionError);

  SECTION("missing version tag") {
    j.erase("version");
    {
      std::ofstream out(guard.path);
      out << j.dump();
    }
    CHECK_THROWS_AS(load_scenario(guard.path), VersionError);
  }
}

TEST_CASE("load reports missing files as IO errors") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), IoError);
}

TEST_CASE("positions are quantized to a micrometer") {
  const Scenario s = generate_scenario(20, 2, 31.6227766, 9, PhysicsConfig{},
                                       UavBudget{}, TaskRanges{});
  for (const Device& d : s.devices) {
    CHECK(d.position.x == Approx(std::round(d.position.x * 1e6) / 1e6));
    CHECK(d.task_bits == Approx(std::round(d.task_bits)));
  }
}
