#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "gjra/common.hpp"
#include "gjra/model.hpp"
#include "gjra/solver.hpp"
#include "json.hpp"

namespace gjra {

// Parameter-sweep harness: one scenario per (value, seed), solved under each
// requested scheme, emitted as plot-ready CSV plus a per-(value, scheme)
// median summary. Cells are independent and may run in parallel; rows are
// always written in spec order, so output bytes do not depend on --jobs.

enum class SweepParameter {
  NDevices,
  MPositions,
  TaskCycles,
  TaskBits,
  PMaxUav,
  Bandwidth,
  FUeMax,
  FUavMax
};

inline std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::NDevices: return "n_devices";
    case SweepParameter::MPositions: return "m_positions";
    case SweepParameter::TaskCycles: return "task_cycles";
    case SweepParameter::TaskBits: return "task_bits";
    case SweepParameter::PMaxUav: return "p_max_uav";
    case SweepParameter::Bandwidth: return "bandwidth";
    case SweepParameter::FUeMax: return "f_ue_max";
    case SweepParameter::FUavMax: return "f_uav_max";
  }
  return "?";
}

inline SweepParameter sweep_parameter_from_string(const std::string& s) {
  if (s == "n_devices") return SweepParameter::NDevices;
  if (s == "m_positions") return SweepParameter::MPositions;
  if (s == "task_cycles") return SweepParameter::TaskCycles;
  if (s == "task_bits") return SweepParameter::TaskBits;
  if (s == "p_max_uav") return SweepParameter::PMaxUav;
  if (s == "bandwidth") return SweepParameter::Bandwidth;
  if (s == "f_ue_max") return SweepParameter::FUeMax;
  if (s == "f_uav_max") return SweepParameter::FUavMax;
  throw ValidationError("parameter", "unknown sweep parameter \"" + s + "\"");
}

/// Scenario-generation knobs shared by every sweep point.
struct SweepBase {
  int n = 50;
  int m = 4;
  double area_side_m = 31.622776601683793;  // 1000 m^2 region
  PhysicsConfig physics;
  UavBudget budget;
  TaskRanges ranges;
  DeviceDefaults device_defaults;
  SolverConfig solver;
};

struct SweepSpec {
  SweepParameter parameter = SweepParameter::NDevices;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  std::vector<Scheme> schemes;
  SweepBase base;
};

/// Applies one swept value to the generation knobs. Task sweeps pin every
/// device to the swept size so the axis is exact.
inline SweepBase apply_parameter(const SweepSpec& spec, double value) {
  SweepBase b = spec.base;
  switch (spec.parameter) {
    case SweepParameter::NDevices:
      b.n = static_cast<int>(std::llround(value));
      break;
    case SweepParameter::MPositions:
      b.m = static_cast<int>(std::llround(value));
      break;
    case SweepParameter::TaskCycles:
      b.ranges.cycles_min = b.ranges.cycles_max = value;
      break;
    case SweepParameter::TaskBits:
      b.ranges.bits_min = b.ranges.bits_max = value;
      break;
    case SweepParameter::PMaxUav:
      b.budget.power_max_w = value;
      break;
    case SweepParameter::Bandwidth:
      b.physics.bandwidth_hz = value;
      break;
    case SweepParameter::FUeMax:
      b.device_defaults.local_freq_hz = value;
      break;
    case SweepParameter::FUavMax:
      b.budget.cpu_max_hz = value;
      break;
  }
  return b;
}

inline Scenario scenario_for_point(const SweepSpec& spec, double value,
                                   std::uint64_t seed) {
  const SweepBase b = apply_parameter(spec, value);
  return generate_scenario(b.n, b.m, b.area_side_m, seed, b.physics, b.budget,
                           b.ranges, b.device_defaults);
}

inline void validate(const SweepSpec& spec) {
  if (spec.values.empty()) throw ValidationError("values", "need at least one");
  if (spec.seeds.empty()) throw ValidationError("seeds", "need at least one");
  if (spec.schemes.empty())
    throw ValidationError("schemes", "need at least one");
  const bool has_ea = std::any_of(spec.schemes.begin(), spec.schemes.end(),
                                  [](Scheme s) { return s == Scheme::EA; });
  if (has_ea) {
    for (double v : spec.values) {
      const SweepBase b = apply_parameter(spec, v);
      if (b.n * std::log2(2.0 * b.m) > std::log2(kEaEnumerationCap) + 1e-12)
        throw SizeGuardError("sweep includes EA but point value " + fmt_g12(v) +
                             " exceeds the enumeration cap");
    }
  }
}

struct SweepRow {
  double value = 0.0;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::GJRA;
  double total_latency_s = 0.0;
  int rounds = 0;
  bool converged = false;
  double wall_time_s = 0.0;
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::NDevices;
  std::vector<SweepRow> rows;  // values x seeds x schemes, in spec order
};

inline SweepResult run_sweep(const SweepSpec& spec, int jobs = 1) {
  validate(spec);
  const std::size_t per_value = spec.seeds.size() * spec.schemes.size();
  const std::size_t total = spec.values.size() * per_value;

  SweepResult result;
  result.parameter = spec.parameter;
  result.rows.resize(total);

  auto run_cell = [&](std::size_t cell) {
    const std::size_t vi = cell / per_value;
    const std::size_t rest = cell % per_value;
    const std::size_t si = rest / spec.schemes.size();
    const std::size_t ci = rest % spec.schemes.size();
    const double value = spec.values[vi];
    const std::uint64_t seed = spec.seeds[si];

    SweepRow row;
    row.value = value;
    row.seed = seed;
    row.scheme = spec.schemes[ci];
    try {
      const Scenario s = scenario_for_point(spec, value, seed);
      SolverConfig cfg = spec.base.solver;
      cfg.rng_seed = seed;
      const SolveReport rep = solve_scheme(s, cfg, row.scheme);
      row.total_latency_s = rep.objective();
      row.rounds = rep.rounds;
      row.converged = rep.converged;
      row.wall_time_s = rep.wall_time_s;
    } catch (const Error&) {
      // Recorded as a non-converged row; the sweep continues.
      row.total_latency_s = std::numeric_limits<double>::quiet_NaN();
      row.rounds = 0;
      row.converged = false;
    }
    result.rows[cell] = std::move(row);
  };

  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (std::size_t cell = 0; cell < total; ++cell) run_cell(cell);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> workers;
    const int worker_count =
        static_cast<int>(std::min<std::size_t>(jobs, total));
    workers.reserve(worker_count);
    for (int w = 0; w < worker_count; ++w)
      workers.emplace_back([&] {
        for (std::size_t cell = cursor.fetch_add(1); cell < total;
             cell = cursor.fetch_add(1))
          run_cell(cell);
      });
    for (auto& th : workers) th.join();
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV emission (12 significant digits; wall time zeroed unless requested)
// ---------------------------------------------------------------------------

inline void write_sweep_csv(const SweepResult& result, std::ostream& out,
                            bool include_timing = false) {
  out << "param,value,seed,scheme,total_latency_s,rounds,converged,"
         "wall_time_s\n";
  const std::string param = to_string(result.parameter);
  for (const SweepRow& r : result.rows) {
    out << param << ',' << fmt_g12(r.value) << ',' << r.seed << ','
        << to_string(r.scheme) << ',' << fmt_g12(r.total_latency_s) << ','
        << r.rounds << ',' << (r.converged ? 1 : 0) << ','
        << fmt_g12(include_timing ? r.wall_time_s : 0.0) << '\n';
  }
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

/// Per-(value, scheme) medians over the converged seed rows.
inline void write_sweep_summary_csv(const SweepResult& result,
                                    std::ostream& out) {
  out << "param,value,scheme,n_seeds,median_total_latency_s\n";
  const std::string param = to_string(result.parameter);

  std::vector<std::pair<double, Scheme>> groups;
  for (const SweepRow& r : result.rows) {
    const auto key = std::make_pair(r.value, r.scheme);
    if (std::find(groups.begin(), groups.end(), key) == groups.end())
      groups.push_back(key);
  }
  for (const auto& [value, scheme] : groups) {
    std::vector<double> latencies;
    for (const SweepRow& r : result.rows)
      if (r.value == value && r.scheme == scheme && r.converged &&
          std::isfinite(r.total_latency_s))
        latencies.push_back(r.total_latency_s);
    out << param << ',' << fmt_g12(value) << ',' << to_string(scheme) << ','
        << latencies.size() << ',' << fmt_g12(median(latencies)) << '\n';
  }
}

/// Median GJRA latency per sweep value, in value order; used by trend checks.
inline std::vector<double> scheme_medians(const SweepSpec& spec,
                                          const SweepResult& result,
                                          Scheme scheme) {
  std::vector<double> out;
  for (double value : spec.values) {
    std::vector<double> latencies;
    for (const SweepRow& r : result.rows)
      if (r.value == value && r.scheme == scheme && r.converged &&
          std::isfinite(r.total_latency_s))
        latencies.push_back(r.total_latency_s);
    out.push_back(median(latencies));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spec file parsing
// ---------------------------------------------------------------------------

inline SweepSpec sweep_spec_from_json(const nlohmann::json& j) {
  SweepSpec spec;
  try {
    spec.parameter =
        sweep_parameter_from_string(j.at("parameter").get<std::string>());
    spec.values = j.at("values").get<std::vector<double>>();
    spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& name : j.at("schemes"))
      spec.schemes.push_back(scheme_from_string(name.get<std::string>()));

    if (j.contains("base")) {
      const auto& b = j.at("base");
      SweepBase& base = spec.base;
      if (b.contains("n")) base.n = b.at("n").get<int>();
      if (b.contains("m")) base.m = b.at("m").get<int>();
      if (b.contains("area_side_m"))
        base.area_side_m = b.at("area_side_m").get<double>();
      if (b.contains("task_bits")) {
        base.ranges.bits_min = b.at("task_bits").at(0).get<double>();
        base.ranges.bits_max = b.at("task_bits").at(1).get<double>();
      }
      if (b.contains("task_cycles")) {
        base.ranges.cycles_min = b.at("task_cycles").at(0).get<double>();
        base.ranges.cycles_max = b.at("task_cycles").at(1).get<double>();
      }
      if (b.contains("local_freq_hz"))
        base.device_defaults.local_freq_hz =
            b.at("local_freq_hz").get<double>();
      if (b.contains("uplink_power_w"))
        base.device_defaults.uplink_power_w =
            b.at("uplink_power_w").get<double>();
      if (b.contains("capacitance_k"))
        base.device_defaults.capacitance_k =
            b.at("capacitance_k").get<double>();
      if (b.contains("physics")) {
        const auto& p = b.at("physics");
        PhysicsConfig& ph = base.physics;
        if (p.contains("altitude_m")) ph.altitude_m = p.at("altitude_m");
        if (p.contains("bandwidth_hz")) ph.bandwidth_hz = p.at("bandwidth_hz");
        if (p.contains("noise_power_w"))
          ph.noise_power_w = p.at("noise_power_w");
        if (p.contains("carrier_hz")) ph.carrier_hz = p.at("carrier_hz");
        if (p.contains("eta_los_db")) ph.eta_los_db = p.at("eta_los_db");
        if (p.contains("eta_nlos_db")) ph.eta_nlos_db = p.at("eta_nlos_db");
        if (p.contains("los_a")) ph.los_a = p.at("los_a");
        if (p.contains("los_b")) ph.los_b = p.at("los_b");
        if (p.contains("ref_gain")) ph.ref_gain = p.at("ref_gain");
        if (p.contains("eh_efficiency"))
          ph.eh_efficiency = p.at("eh_efficiency");
        if (p.contains("cpu_exponent")) ph.cpu_exponent = p.at("cpu_exponent");
        if (p.contains("elevation_convention"))
          ph.elevation_convention = elevation_convention_from_string(
              p.at("elevation_convention").get<std::string>());
      }
      if (b.contains("budget")) {
        const auto& bu = b.at("budget");
        if (bu.contains("cpu_max_hz"))
          base.budget.cpu_max_hz = bu.at("cpu_max_hz");
        if (bu.contains("power_max_w"))
          base.budget.power_max_w = bu.at("power_max_w");
      }
      if (b.contains("solver")) {
        const auto& so = b.at("solver");
        if (so.contains("eps_inner")) base.solver.eps_inner = so.at("eps_inner");
        if (so.contains("eps_outer")) base.solver.eps_outer = so.at("eps_outer");
        if (so.contains("k_max")) base.solver.k_max = so.at("k_max");
        if (so.contains("r_max")) base.solver.r_max = so.at("r_max");
        if (so.contains("step0")) base.solver.step0 = so.at("step0");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("sweep spec",
                          std::string("malformed field: ") + e.what());
  }
  validate(spec);
  return spec;
}

inline SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sweep spec: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("sweep spec",
                          std::string("not valid JSON: ") + e.what());
  }
  return sweep_spec_from_json(j);
}

/// Companion summary path: "<stem>_summary<ext>".
inline std::filesystem::path summary_path_for(
    const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  const std::string stem = p.stem().string();
  const std::string ext = p.extension().string();
  p.replace_filename(stem + "_summary" + ext);
  return p;
}

}  // namespace gjra
