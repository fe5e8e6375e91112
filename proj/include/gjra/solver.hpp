#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gjra/channel.hpp"
#include "gjra/common.hpp"
#include "gjra/energy.hpp"
#include "gjra/model.hpp"
#include "gjra/subsolvers.hpp"
#include "json.hpp"

namespace gjra {

// Outer solver loop and the three baseline schemes.
//
// GJRA cycles the four block solvers until the objective settles. It starts
// from the nearest-position connection with every device marked offloading
// and budget-tight shares, so its first round passes through exactly the
// state the NP baseline reports; together with the monotonicity guard this
// makes GJRA <= NP hold on every instance.

enum class Scheme { GJRA, RS, NP, EA };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::GJRA: return "GJRA";
    case Scheme::RS: return "RS";
    case Scheme::NP: return "NP";
    case Scheme::EA: return "EA";
  }
  return "?";
}

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "GJRA" || s == "gjra") return Scheme::GJRA;
  if (s == "RS" || s == "rs") return Scheme::RS;
  if (s == "NP" || s == "np") return Scheme::NP;
  if (s == "EA" || s == "ea") return Scheme::EA;
  throw ValidationError("scheme", "expected one of GJRA, RS, NP, EA");
}

struct SolveReport {
  Scheme scheme = Scheme::GJRA;
  Allocation final_alloc;
  std::vector<double> objective_trace;  // accepted objective after each round
  int rounds = 0;
  bool converged = false;
  bool guard_tripped = false;
  int dual_infeasible_rounds = 0;
  LatencyBreakdown breakdown;
  double wall_time_s = 0.0;

  double objective() const { return objective_trace.back(); }
};

// ---------------------------------------------------------------------------
// Connection rules and initialization
// ---------------------------------------------------------------------------

/// Connect every device to its nearest hovering position (lowest index wins
/// distance ties).
inline Grid<std::uint8_t> nearest_connection(const Scenario& s,
                                             const ChannelTable& t) {
  Grid<std::uint8_t> c(s.n(), s.m(), 0);
  for (int i = 0; i < s.n(); ++i) {
    int best_j = 0;
    for (int j = 1; j < s.m(); ++j)
      if (t.dist_m(i, j) < t.dist_m(i, best_j)) best_j = j;
    c(i, best_j) = 1;
  }
  return c;
}

/// Uniform random position per device, from a stream derived from the seed.
inline Grid<std::uint8_t> random_connection(const Scenario& s,
                                            std::uint64_t seed) {
  constexpr std::uint64_t kRsStreamTag = 0x5253;
  std::mt19937_64 gen(mix_seed(seed, kRsStreamTag));
  Grid<std::uint8_t> c(s.n(), s.m(), 0);
  for (int i = 0; i < s.n(); ++i)
    c(i, static_cast<int>(uniform_index(gen, s.m()))) = 1;
  return c;
}

/// Starting allocation for a given connection: every device marked
/// offloading, budget-tight closed-form shares, then capacity repair (a no-op
/// for budget-tight shares, kept for degenerate inputs).
inline Allocation initial_allocation(const Scenario& s, const ChannelTable& t,
                                     Grid<std::uint8_t> connect) {
  Allocation a = make_allocation(s.n(), s.m());
  a.connect = std::move(connect);
  a.offload.assign(s.n(), 1);
  allocate_uav_cpu_into(s, a, a.cpu_share_hz);
  allocate_charging_into(s, t, a, a.charge_w);
  const ModeCosts mc = mode_costs(s, t, a);
  repair_offloading(s, a, mc, a.offload);
  return a;
}

/// One pass of the three per-device blocks: offload decisions, CPU shares,
/// charging powers.
inline void optimize_blocks(const Scenario& s, const ChannelTable& t,
                            Allocation& a) {
  a.offload = decide_offloading(s, t, a);
  allocate_uav_cpu_into(s, a, a.cpu_share_hz);
  allocate_charging_into(s, t, a, a.charge_w);
}

// ---------------------------------------------------------------------------
// Schemes
// ---------------------------------------------------------------------------

namespace detail {

inline double seconds_since(
    std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

inline SolveReport finish_single_round(const Scenario& s,
                                       const ChannelTable& t, Scheme scheme,
                                       Allocation alloc,
                                       std::chrono::steady_clock::time_point
                                           start) {
  SolveReport rep;
  rep.scheme = scheme;
  rep.objective_trace.push_back(total_objective(s, t, alloc));
  rep.rounds = 1;
  rep.converged = true;
  rep.breakdown = total_latency(s, t, alloc);
  rep.final_alloc = std::move(alloc);
  rep.wall_time_s = seconds_since(start);
  return rep;
}

}  // namespace detail

inline SolveReport solve_gjra(const Scenario& s, const SolverConfig& cfg) {
  validate(s);
  const auto start = std::chrono::steady_clock::now();
  const ChannelTable t = build_channel_table(s);

  Allocation alloc = initial_allocation(s, t, nearest_connection(s, t));
  SolveReport rep;
  rep.scheme = Scheme::GJRA;
  rep.objective_trace.push_back(total_objective(s, t, alloc));

  for (int r = 1; r <= cfg.r_max; ++r) {
    Allocation work = alloc;
    optimize_blocks(s, t, work);
    ConnectionResult cr = manage_connections(s, t, work, cfg);
    if (cr.dual_infeasible) ++rep.dual_infeasible_rounds;

    const double obj = total_objective(s, t, cr.alloc);
    const double prev = rep.objective_trace.back();
    rep.rounds = r;
    if (obj > prev) {
      // A regression: keep the incumbent and stop.
      rep.guard_tripped = true;
      rep.converged = true;
      break;
    }
    alloc = std::move(cr.alloc);
    rep.objective_trace.push_back(obj);
    if (std::abs(obj - prev) < cfg.eps_outer) {
      rep.converged = true;
      break;
    }
  }

  rep.breakdown = total_latency(s, t, alloc);
  rep.final_alloc = std::move(alloc);
  rep.wall_time_s = detail::seconds_since(start);
  return rep;
}

inline SolveReport solve_np(const Scenario& s, const SolverConfig& cfg) {
  (void)cfg;
  validate(s);
  const auto start = std::chrono::steady_clock::now();
  const ChannelTable t = build_channel_table(s);
  Allocation alloc = initial_allocation(s, t, nearest_connection(s, t));
  optimize_blocks(s, t, alloc);
  return detail::finish_single_round(s, t, Scheme::NP, std::move(alloc), start);
}

inline SolveReport solve_rs(const Scenario& s, const SolverConfig& cfg) {
  validate(s);
  const auto start = std::chrono::steady_clock::now();
  const ChannelTable t = build_channel_table(s);
  Allocation alloc =
      initial_allocation(s, t, random_connection(s, cfg.rng_seed));
  optimize_blocks(s, t, alloc);
  return detail::finish_single_round(s, t, Scheme::RS, std::move(alloc), start);
}

/// Largest candidate count solve_ea will enumerate.
inline constexpr double kEaEnumerationCap = 1e7;

/// Exhaustive search over every connection matrix and offload vector; shares
/// and powers come from the closed forms, which are optimal once the binary
/// variables are fixed, so the enumeration is exact.
inline SolveReport solve_ea(const Scenario& s, const SolverConfig& cfg) {
  (void)cfg;
  validate(s);
  const int n = s.n();
  const int m = s.m();
  if (n * std::log2(2.0 * m) > std::log2(kEaEnumerationCap) + 1e-12)
    throw SizeGuardError(
        "exhaustive search refused: (2M)^N exceeds " +
        fmt_g12(kEaEnumerationCap) + " candidates (N=" + std::to_string(n) +
        ", M=" + std::to_string(m) + ")");

  const auto start = std::chrono::steady_clock::now();
  const ChannelTable t = build_channel_table(s);

  Allocation work = make_allocation(n, m);
  std::vector<int> assign(n, 0);
  std::vector<int> best_assign;
  std::uint64_t best_mask = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  const std::uint64_t mask_end = std::uint64_t{1} << n;

  bool more = true;
  while (more) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) work.connect(i, j) = 0;
      work.connect(i, assign[i]) = 1;
    }
    for (std::uint64_t mask = 0; mask < mask_end; ++mask) {
      for (int i = 0; i < n; ++i)
        work.offload[i] = static_cast<std::uint8_t>((mask >> i) & 1u);
      allocate_uav_cpu_into(s, work, work.cpu_share_hz);
      allocate_charging_into(s, t, work, work.charge_w);
      double obj;
      try {
        obj = total_objective(s, t, work);
      } catch (const InfeasibleError&) {
        continue;
      }
      if (obj < best_obj) {
        best_obj = obj;
        best_assign = assign;
        best_mask = mask;
      }
    }
    // mixed-radix increment over connection choices
    more = false;
    for (int i = 0; i < n; ++i) {
      if (++assign[i] < m) {
        more = true;
        break;
      }
      assign[i] = 0;
    }
  }

  Allocation best = make_allocation(n, m);
  for (int i = 0; i < n; ++i) {
    best.connect(i, best_assign[i]) = 1;
    best.offload[i] = static_cast<std::uint8_t>((best_mask >> i) & 1u);
  }
  allocate_uav_cpu_into(s, best, best.cpu_share_hz);
  allocate_charging_into(s, t, best, best.charge_w);
  return detail::finish_single_round(s, t, Scheme::EA, std::move(best), start);
}

inline SolveReport solve_scheme(const Scenario& s, const SolverConfig& cfg,
                                Scheme scheme) {
  switch (scheme) {
    case Scheme::GJRA: return solve_gjra(s, cfg);
    case Scheme::RS: return solve_rs(s, cfg);
    case Scheme::NP: return solve_np(s, cfg);
    case Scheme::EA: return solve_ea(s, cfg);
  }
  throw Error("unknown scheme");
}

// ---------------------------------------------------------------------------
// Report serialization. Wall time is a measured quantity and breaks
// byte-for-byte reproducibility, so it is zeroed unless explicitly requested.
// ---------------------------------------------------------------------------

inline nlohmann::json report_to_json(const SolveReport& rep,
                                     bool include_timing = false) {
  const Allocation& a = rep.final_alloc;
  const int n = a.connect.rows();
  const int m = a.connect.cols();

  nlohmann::json jalloc;
  std::vector<int> connected(n);
  for (int i = 0; i < n; ++i) connected[i] = a.connected_position(i);
  jalloc["connected_position"] = connected;
  jalloc["offload"] = a.offload;
  auto mat = [&](const Grid<double>& g) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < m; ++j) row.push_back(g(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  jalloc["cpu_share_hz"] = mat(a.cpu_share_hz);
  jalloc["charge_w"] = mat(a.charge_w);

  nlohmann::json jb;
  jb["eh_s"] = rep.breakdown.eh_s;
  jb["local_s"] = rep.breakdown.local_s;
  jb["tx_s"] = rep.breakdown.tx_s;
  jb["offload_compute_s"] = rep.breakdown.offload_compute_s;
  jb["total_s"] = rep.breakdown.total_s;
  jb["scenario_total_s"] = rep.breakdown.scenario_total_s;

  nlohmann::json j;
  j["scheme"] = to_string(rep.scheme);
  j["objective_s"] = rep.objective();
  j["objective_trace"] = rep.objective_trace;
  j["rounds"] = rep.rounds;
  j["converged"] = rep.converged;
  j["guard_tripped"] = rep.guard_tripped;
  j["dual_infeasible_rounds"] = rep.dual_infeasible_rounds;
  j["wall_time_s"] = include_timing ? rep.wall_time_s : 0.0;
  j["allocation"] = std::move(jalloc);
  j["breakdown"] = std::move(jb);
  return j;
}

}  // namespace gjra
