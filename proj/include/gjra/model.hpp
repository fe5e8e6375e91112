#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gjra/common.hpp"
#include "json.hpp"

namespace gjra {

// ---------------------------------------------------------------------------
// Problem-instance data types. All immutable after construction and safely
// shareable across threads.
// ---------------------------------------------------------------------------

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2&) const = default;
};

/// A ground device with one computation task.
struct Device {
  int id = 0;
  Vec2 position;                  // meters
  double task_bits = 0.0;         // data size to upload when offloading
  double task_cycles = 0.0;       // CPU cycles the task needs
  double local_freq_hz = 0.0;     // on-chip frequency
  double uplink_power_w = 0.0;    // transmit power
  double capacitance_k = 0.0;     // effective switched capacitance
  bool operator==(const Device&) const = default;
};

/// One of the fixed stops the UAV hovers at.
struct HoverPosition {
  int id = 0;
  Vec2 position;  // meters
  bool operator==(const HoverPosition&) const = default;
};

/// How the elevation angle feeding the LoS probability is derived.
/// HorizontalDistance uses atan(H / ground distance), the standard
/// air-to-ground form; Paper3dDistance uses atan(H / slant distance).
enum class ElevationConvention { HorizontalDistance, Paper3dDistance };

struct PhysicsConfig {
  double altitude_m = 10.0;
  double bandwidth_hz = 1e7;
  double noise_power_w = 1e-9;  // -60 dBm
  double carrier_hz = 2e9;
  double eta_los_db = 0.1;    // excess attenuation, LoS
  double eta_nlos_db = 21.0;  // excess attenuation, NLoS
  double los_a = 4.88;        // environment constant (degrees offset)
  double los_b = 0.49;        // environment constant
  double ref_gain = 1e-3;     // linear channel gain at the 1 m reference
  double eh_efficiency = 0.8;
  double cpu_exponent = 3.0;  // v in the dynamic-power model
  ElevationConvention elevation_convention =
      ElevationConvention::HorizontalDistance;
  bool operator==(const PhysicsConfig&) const = default;
};

struct UavBudget {
  double cpu_max_hz = 3e6;    // total computing frequency the UAV can share
  double power_max_w = 0.1;   // total charging power per hovering position
  bool operator==(const UavBudget&) const = default;
};

struct SolverConfig {
  double eps_inner = 1e-6;    // connection-loop tolerance
  double eps_outer = 1e-10;   // outer-loop tolerance
  int k_max = 100;            // connection-loop iteration cap
  int r_max = 200;            // outer-loop round cap
  double step0 = 1.0;         // subgradient base step
  std::uint64_t rng_seed = 1;
};

struct Scenario {
  std::vector<Device> devices;
  std::vector<HoverPosition> positions;
  PhysicsConfig physics;
  UavBudget budget;

  int n() const noexcept { return static_cast<int>(devices.size()); }
  int m() const noexcept { return static_cast<int>(positions.size()); }

  bool operator==(const Scenario&) const = default;
};

struct TaskRanges {
  double bits_min = 1e5;
  double bits_max = 1e6;
  double cycles_min = 2e5;
  double cycles_max = 1e6;
};

/// Per-device constants applied uniformly by the generator.
struct DeviceDefaults {
  double local_freq_hz = 1e6;
  double uplink_power_w = 2.83e-3;
  double capacitance_k = 1e-28;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline void validate(const PhysicsConfig& p) {
  auto require = [](bool ok, const char* field, const char* what) {
    if (!ok) throw ValidationError(field, what);
  };
  require(p.altitude_m > 0 && std::isfinite(p.altitude_m), "altitude_m",
          "must be > 0");
  require(p.bandwidth_hz > 0, "bandwidth_hz", "must be > 0");
  require(p.noise_power_w > 0, "noise_power_w", "must be > 0");
  require(p.carrier_hz > 0, "carrier_hz", "must be > 0");
  require(p.los_a > 0, "los_a", "must be > 0");
  require(p.los_b > 0, "los_b", "must be > 0");
  require(p.ref_gain > 0, "ref_gain", "must be > 0");
  require(p.eh_efficiency > 0 && p.eh_efficiency <= 1.0, "eh_efficiency",
          "must be in (0, 1]");
  require(p.cpu_exponent >= 2.0, "cpu_exponent", "must be >= 2");
}

inline void validate(const UavBudget& b) {
  if (!(b.cpu_max_hz > 0))
    throw ValidationError("cpu_max_hz", "must be > 0");
  if (!(b.power_max_w > 0))
    throw ValidationError("power_max_w", "must be > 0");
}

inline void validate(const Scenario& s) {
  if (s.devices.empty()) throw ValidationError("devices", "need at least one");
  if (s.positions.empty())
    throw ValidationError("positions", "need at least one");
  validate(s.physics);
  validate(s.budget);
  for (int i = 0; i < s.n(); ++i) {
    const Device& d = s.devices[i];
    const std::string at = "devices[" + std::to_string(i) + "].";
    if (d.id != i) throw ValidationError(at + "id", "ids must be dense 0..N-1");
    if (!(std::isfinite(d.position.x) && std::isfinite(d.position.y) &&
          d.position.x >= 0 && d.position.y >= 0))
      throw ValidationError(at + "position",
                            "must be finite and non-negative");
    if (!(d.task_bits > 0)) throw ValidationError(at + "task_bits", "must be > 0");
    if (!(d.task_cycles > 0))
      throw ValidationError(at + "task_cycles", "must be > 0");
    if (!(d.local_freq_hz > 0 && std::isfinite(d.local_freq_hz)))
      throw ValidationError(at + "local_freq_hz", "must be > 0");
    if (!(d.uplink_power_w > 0))
      throw ValidationError(at + "uplink_power_w", "must be > 0");
    if (!(d.capacitance_k > 0))
      throw ValidationError(at + "capacitance_k", "must be > 0");
  }
  for (int j = 0; j < s.m(); ++j) {
    const HoverPosition& h = s.positions[j];
    const std::string at = "positions[" + std::to_string(j) + "].";
    if (h.id != j) throw ValidationError(at + "id", "ids must be dense 0..M-1");
    if (!(std::isfinite(h.position.x) && std::isfinite(h.position.y)))
      throw ValidationError(at + "position", "must be finite");
  }
}

// ---------------------------------------------------------------------------
// Seeded scenario generation. Positions are quantized to 1e-6 m and task
// draws to whole units before storage, so a fixed (seed, args) pair yields a
// byte-identical scenario on every platform.
// ---------------------------------------------------------------------------

inline double quantize_position(double x) { return std::round(x * 1e6) / 1e6; }

inline Scenario generate_scenario(int n, int m, double area_side_m,
                                  std::uint64_t seed,
                                  const PhysicsConfig& physics,
                                  const UavBudget& budget,
                                  const TaskRanges& ranges,
                                  const DeviceDefaults& defaults = {}) {
  if (n < 1) throw ValidationError("n", "must be >= 1");
  if (m < 1) throw ValidationError("m", "must be >= 1");
  if (!(area_side_m >= 0) || !std::isfinite(area_side_m))
    throw ValidationError("area_side_m", "must be finite and >= 0");
  if (!(ranges.bits_min > 0) || ranges.bits_min > ranges.bits_max)
    throw ValidationError("task_bits", "range must be positive with min <= max");
  if (!(ranges.cycles_min > 0) || ranges.cycles_min > ranges.cycles_max)
    throw ValidationError("task_cycles",
                          "range must be positive with min <= max");
  validate(physics);
  validate(budget);

  std::mt19937_64 gen(seed);
  Scenario s;
  s.physics = physics;
  s.budget = budget;
  s.devices.reserve(n);
  for (int i = 0; i < n; ++i) {
    Device d;
    d.id = i;
    d.position.x = quantize_position(uniform_real(gen, 0.0, area_side_m));
    d.position.y = quantize_position(uniform_real(gen, 0.0, area_side_m));
    d.task_bits =
        std::round(uniform_real(gen, ranges.bits_min, ranges.bits_max));
    d.task_cycles =
        std::round(uniform_real(gen, ranges.cycles_min, ranges.cycles_max));
    d.local_freq_hz = defaults.local_freq_hz;
    d.uplink_power_w = defaults.uplink_power_w;
    d.capacitance_k = defaults.capacitance_k;
    s.devices.push_back(d);
  }
  s.positions.reserve(m);
  for (int j = 0; j < m; ++j) {
    HoverPosition h;
    h.id = j;
    h.position.x = quantize_position(uniform_real(gen, 0.0, area_side_m));
    h.position.y = quantize_position(uniform_real(gen, 0.0, area_side_m));
    s.positions.push_back(h);
  }
  validate(s);
  return s;
}

// ---------------------------------------------------------------------------
// JSON persistence, schema v1. SI units throughout; dB-valued fields carry a
// _db suffix.
// ---------------------------------------------------------------------------

inline constexpr int kScenarioSchemaVersion = 1;

inline std::string to_string(ElevationConvention c) {
  return c == ElevationConvention::HorizontalDistance ? "horizontal"
                                                      : "paper3d";
}

inline ElevationConvention elevation_convention_from_string(
    const std::string& s) {
  if (s == "horizontal") return ElevationConvention::HorizontalDistance;
  if (s == "paper3d") return ElevationConvention::Paper3dDistance;
  throw ValidationError("elevation_convention",
                        "expected \"horizontal\" or \"paper3d\"");
}

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json j;
  j["version"] = kScenarioSchemaVersion;
  j["devices"] = nlohmann::json::array();
  for (const Device& d : s.devices) {
    j["devices"].push_back({{"id", d.id},
                            {"position", {d.position.x, d.position.y}},
                            {"task_bits", d.task_bits},
                            {"task_cycles", d.task_cycles},
                            {"local_freq_hz", d.local_freq_hz},
                            {"uplink_power_w", d.uplink_power_w},
                            {"capacitance_k", d.capacitance_k}});
  }
  j["positions"] = nlohmann::json::array();
  for (const HoverPosition& h : s.positions) {
    j["positions"].push_back(
        {{"id", h.id}, {"position", {h.position.x, h.position.y}}});
  }
  const PhysicsConfig& p = s.physics;
  j["physics"] = {{"altitude_m", p.altitude_m},
                  {"bandwidth_hz", p.bandwidth_hz},
                  {"noise_power_w", p.noise_power_w},
                  {"carrier_hz", p.carrier_hz},
                  {"eta_los_db", p.eta_los_db},
                  {"eta_nlos_db", p.eta_nlos_db},
                  {"los_a", p.los_a},
                  {"los_b", p.los_b},
                  {"ref_gain", p.ref_gain},
                  {"eh_efficiency", p.eh_efficiency},
                  {"cpu_exponent", p.cpu_exponent},
                  {"elevation_convention", to_string(p.elevation_convention)}};
  j["budget"] = {{"cpu_max_hz", s.budget.cpu_max_hz},
                 {"power_max_w", s.budget.power_max_w}};
  return j;
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version"))
    throw VersionError("scenario file has no schema version tag");
  const int version = j.at("version").get<int>();
  if (version != kScenarioSchemaVersion)
    throw VersionError("unsupported scenario schema version " +
                       std::to_string(version) + " (expected " +
                       std::to_string(kScenarioSchemaVersion) + ")");
  Scenario s;
  try {
    for (const auto& jd : j.at("devices")) {
      Device d;
      d.id = jd.at("id").get<int>();
      d.position.x = jd.at("position").at(0).get<double>();
      d.position.y = jd.at("position").at(1).get<double>();
      d.task_bits = jd.at("task_bits").get<double>();
      d.task_cycles = jd.at("task_cycles").get<double>();
      d.local_freq_hz = jd.at("local_freq_hz").get<double>();
      d.uplink_power_w = jd.at("uplink_power_w").get<double>();
      d.capacitance_k = jd.at("capacitance_k").get<double>();
      s.devices.push_back(d);
    }
    for (const auto& jh : j.at("positions")) {
      HoverPosition h;
      h.id = jh.at("id").get<int>();
      h.position.x = jh.at("position").at(0).get<double>();
      h.position.y = jh.at("position").at(1).get<double>();
      s.positions.push_back(h);
    }
    const auto& jp = j.at("physics");
    PhysicsConfig& p = s.physics;
    p.altitude_m = jp.at("altitude_m").get<double>();
    p.bandwidth_hz = jp.at("bandwidth_hz").get<double>();
    p.noise_power_w = jp.at("noise_power_w").get<double>();
    p.carrier_hz = jp.at("carrier_hz").get<double>();
    p.eta_los_db = jp.at("eta_los_db").get<double>();
    p.eta_nlos_db = jp.at("eta_nlos_db").get<double>();
    p.los_a = jp.at("los_a").get<double>();
    p.los_b = jp.at("los_b").get<double>();
    p.ref_gain = jp.at("ref_gain").get<double>();
    p.eh_efficiency = jp.at("eh_efficiency").get<double>();
    p.cpu_exponent = jp.at("cpu_exponent").get<double>();
    p.elevation_convention = elevation_convention_from_string(
        jp.at("elevation_convention").get<std::string>());
    const auto& jb = j.at("budget");
    s.budget.cpu_max_hz = jb.at("cpu_max_hz").get<double>();
    s.budget.power_max_w = jb.at("power_max_w").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario", std::string("malformed field: ") +
                                          e.what());
  }
  validate(s);
  return s;
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << to_json(s).dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario", std::string("not valid JSON: ") +
                                          e.what());
  }
  return scenario_from_json(j);
}

}  // namespace gjra
