#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gjra/model.hpp"
#include "gjra/solver.hpp"
#include "gjra/sweep.hpp"
#include "gjra/verify.hpp"

namespace gjra::cli {

// Command-line harness. Exit codes: 0 ok, 1 internal/verify failure,
// 2 validation (including schema-version mismatch), 3 infeasible,
// 4 size-guard refusal, 5 missing file / IO failure. CLI11 parse errors use
// its own codes (>= 100).

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitSizeGuard = 4;
inline constexpr int kExitIo = 5;

enum class LogLevel { Off = 0, Error = 1, Info = 2, Debug = 3 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("GJRA_LOG");
    if (!env) return LogLevel::Error;
    const std::string v = env;
    if (v == "off") return LogLevel::Off;
    if (v == "info") return LogLevel::Info;
    if (v == "debug") return LogLevel::Debug;
    return LogLevel::Error;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::Info) std::cerr << "[gjra] " << msg << '\n';
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

inline void print_report_summary(std::ostream& out, const SolveReport& rep) {
  out << "scheme=" << to_string(rep.scheme)
      << " total_latency_s=" << fmt_g12(rep.objective())
      << " rounds=" << rep.rounds
      << " converged=" << (rep.converged ? "true" : "false");
  if (rep.guard_tripped) out << " guard_tripped=true";
  out << '\n';
}

inline void print_breakdown(std::ostream& out, const SolveReport& rep) {
  const LatencyBreakdown& b = rep.breakdown;
  out << "device,connected_position,offload,eh_s,local_s,tx_s,"
         "offload_compute_s,total_s\n";
  for (std::size_t i = 0; i < b.total_s.size(); ++i) {
    const int idx = static_cast<int>(i);
    out << idx << ',' << rep.final_alloc.connected_position(idx) << ','
        << int(rep.final_alloc.offload[i]) << ',' << fmt_g12(b.eh_s[i]) << ','
        << fmt_g12(b.local_s[i]) << ',' << fmt_g12(b.tx_s[i]) << ','
        << fmt_g12(b.offload_compute_s[i]) << ',' << fmt_g12(b.total_s[i])
        << '\n';
  }
  out << "total,,,,,,," << fmt_g12(b.scenario_total_s) << '\n';
}

}  // namespace detail

/// Runs one command; `args` excludes the program name.
inline int run(const std::vector<std::string>& args,
               std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"UAV-assisted edge offloading latency solver and benchmark"};
  app.require_subcommand(1);

  // --- generate ---------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "generate a random scenario file");
  struct {
    int n = 50;
    int m = 4;
    double side = 31.622776601683793;
    std::uint64_t seed = 1;
    std::string out_path;
    TaskRanges ranges;
    DeviceDefaults defaults;
    PhysicsConfig physics;
    UavBudget budget;
  } g;
  gen->add_option("--n", g.n, "number of devices");
  gen->add_option("--m", g.m, "number of hovering positions");
  gen->add_option("--side", g.side, "square side length, meters");
  gen->add_option("--seed", g.seed, "generator seed");
  gen->add_option("--out", g.out_path, "output scenario path")->required();
  gen->add_option("--bits-min", g.ranges.bits_min, "task data size lower bound");
  gen->add_option("--bits-max", g.ranges.bits_max, "task data size upper bound");
  gen->add_option("--cycles-min", g.ranges.cycles_min,
                  "task cycles lower bound");
  gen->add_option("--cycles-max", g.ranges.cycles_max,
                  "task cycles upper bound");
  gen->add_option("--f-ue", g.defaults.local_freq_hz, "device CPU frequency");
  gen->add_option("--uplink-power", g.defaults.uplink_power_w,
                  "device transmit power, W");
  gen->add_option("--capacitance", g.defaults.capacitance_k,
                  "switched capacitance constant");
  gen->add_option("--altitude", g.physics.altitude_m, "UAV altitude, m");
  gen->add_option("--bandwidth", g.physics.bandwidth_hz, "channel bandwidth");
  gen->add_option("--f-uav", g.budget.cpu_max_hz, "UAV CPU budget, Hz");
  gen->add_option("--p-max", g.budget.power_max_w, "UAV charging budget, W");

  // --- solve ------------------------------------------------------------
  auto* solve = app.add_subcommand("solve", "solve one scenario");
  struct {
    std::string scenario_path;
    std::string scheme = "gjra";
    std::string out_path;
    std::string emit;
    std::string dump_channel;
    bool timing = false;
    SolverConfig cfg;
  } sv;
  solve->add_option("scenario", sv.scenario_path, "scenario JSON path")
      ->required();
  solve->add_option("--scheme", sv.scheme, "gjra | rs | np | ea");
  solve->add_option("--out", sv.out_path, "write the solve report JSON here");
  solve->add_option("--emit", sv.emit, "extra output: breakdown")
      ->check(CLI::IsMember({"breakdown"}));
  solve->add_option("--dump-channel", sv.dump_channel,
                    "write the channel table CSV here");
  solve->add_flag("--timing", sv.timing,
                  "include measured wall time in outputs (breaks "
                  "byte-reproducibility)");
  solve->add_option("--seed", sv.cfg.rng_seed, "solver RNG seed");
  solve->add_option("--eps-inner", sv.cfg.eps_inner,
                    "connection-loop tolerance");
  solve->add_option("--eps-outer", sv.cfg.eps_outer, "outer-loop tolerance");
  solve->add_option("--k-max", sv.cfg.k_max, "connection-loop iteration cap");
  solve->add_option("--r-max", sv.cfg.r_max, "outer-loop round cap");
  solve->add_option("--step0", sv.cfg.step0, "subgradient base step");

  // --- sweep ------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  struct {
    std::string spec_path;
    std::string out_path;
    int jobs = 1;
    bool timing = false;
  } sw;
  sweep->add_option("spec", sw.spec_path, "sweep spec JSON path")->required();
  sweep->add_option("--out", sw.out_path, "output CSV path")->required();
  sweep->add_option("--jobs", sw.jobs, "parallel solve workers");
  sweep->add_flag("--timing", sw.timing,
                  "include measured wall time in the CSV");

  // --- compare ----------------------------------------------------------
  auto* compare =
      app.add_subcommand("compare", "objectives of all schemes on one scenario");
  struct {
    std::string scenario_path;
    SolverConfig cfg;
  } cp;
  compare->add_option("scenario", cp.scenario_path, "scenario JSON path")
      ->required();
  compare->add_option("--seed", cp.cfg.rng_seed, "solver RNG seed");

  // --- verify -----------------------------------------------------------
  auto* verify = app.add_subcommand(
      "verify", "closed forms vs numeric oracles on random instances");
  int verify_instances = 100;
  verify->add_option("--instances", verify_instances,
                     "number of random instances");

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("gjra");
  for (const std::string& a : args) argv_storage.push_back(a);
  std::vector<const char*> argv;
  for (const std::string& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (gen->parsed()) {
      const Scenario s = generate_scenario(g.n, g.m, g.side, g.seed, g.physics,
                                           g.budget, g.ranges, g.defaults);
      save_scenario(s, g.out_path);
      out << "wrote " << g.out_path << " (N=" << s.n() << ", M=" << s.m()
          << ")\n";
      return kExitOk;
    }

    if (solve->parsed()) {
      const Scenario s = load_scenario(sv.scenario_path);
      if (!sv.dump_channel.empty()) {
        const ChannelTable t = build_channel_table(s);
        std::ostringstream csv;
        dump_channel_csv(t, csv);
        detail::write_text_file(sv.dump_channel, csv.str());
      }
      const SolveReport rep =
          solve_scheme(s, sv.cfg, scheme_from_string(sv.scheme));
      detail::print_report_summary(out, rep);
      if (sv.emit == "breakdown") detail::print_breakdown(out, rep);
      if (!sv.out_path.empty())
        detail::write_text_file(sv.out_path,
                                report_to_json(rep, sv.timing).dump(2) + "\n");
      return kExitOk;
    }

    if (sweep->parsed()) {
      const SweepSpec spec = load_sweep_spec(sw.spec_path);
      log_info("sweep: " + std::to_string(spec.values.size()) + " values x " +
               std::to_string(spec.seeds.size()) + " seeds x " +
               std::to_string(spec.schemes.size()) + " schemes");
      const SweepResult result = run_sweep(spec, sw.jobs);
      std::ostringstream csv;
      write_sweep_csv(result, csv, sw.timing);
      detail::write_text_file(sw.out_path, csv.str());
      std::ostringstream summary;
      write_sweep_summary_csv(result, summary);
      const auto summary_path = summary_path_for(sw.out_path);
      detail::write_text_file(summary_path, summary.str());
      out << "wrote " << sw.out_path << " and " << summary_path.string()
          << " (" << result.rows.size() << " rows)\n";
      return kExitOk;
    }

    if (compare->parsed()) {
      const Scenario s = load_scenario(cp.scenario_path);
      const SolveReport ea = solve_ea(s, cp.cfg);  // size guard applies first
      const SolveReport gjra_rep = solve_gjra(s, cp.cfg);
      const SolveReport rs = solve_rs(s, cp.cfg);
      const SolveReport np = solve_np(s, cp.cfg);
      out << "scheme  total_latency_s     gap_to_EA\n";
      auto row = [&](const SolveReport& rep) {
        const double gap =
            (rep.objective() - ea.objective()) / ea.objective();
        out << std::left << std::setw(6) << to_string(rep.scheme) << "  "
            << std::setw(18) << fmt_g12(rep.objective()) << "  "
            << fmt_g12(gap) << '\n';
      };
      row(ea);
      row(gjra_rep);
      row(np);
      row(rs);
      return kExitOk;
    }

    if (verify->parsed()) {
      const auto reports = run_verify_suite(verify_instances, &out);
      const bool ok = all_passed(reports);
      out << (ok ? "verify: all comparisons passed"
                 : "verify: FAILURES detected")
          << " (" << reports.size() << " comparisons)\n";
      return ok ? kExitOk : kExitFailure;
    }
  } catch (const SizeGuardError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSizeGuard;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const VersionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace gjra::cli
