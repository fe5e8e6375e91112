#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gjra/channel.hpp"
#include "gjra/common.hpp"
#include "gjra/energy.hpp"
#include "gjra/model.hpp"

namespace gjra {

// The four coordinate-descent block solvers:
//   1. offload decisions      (per-device mode rule + capacity repair)
//   2. UAV CPU shares         (closed form, sqrt-proportional)
//   3. charging powers        (closed form, sqrt-proportional)
//   4. connection management  (assignment rule + subgradient multiplier loop)
//
// The two closed forms saturate their per-position budgets exactly: with the
// budget binding, stationarity gives shares proportional to the square root
// of each device's coefficient (task cycles for CPU, energy demand for
// charging). Both are cross-checked against independent numeric solvers in
// verify.hpp.

struct ModeCosts {
  std::vector<double> h1;  // service latency if the device computes locally
  std::vector<double> h2;  // service latency if the device offloads
};

/// Multipliers of the connection-management dual. beta penalizes CPU
/// oversubscription, gamma charging-power oversubscription. Both are stored
/// cap-normalized: the cost rule applies beta[j] * (share / cpu budget), so a
/// multiplier's value is the latency penalty for claiming an entire budget.
struct DualState {
  std::vector<double> mu;      // CPU-cap multipliers (informational)
  std::vector<double> lambda;  // power-cap multipliers (informational)
  std::vector<double> beta;
  std::vector<double> gamma;
  double step0 = 1.0;
};

// ---------------------------------------------------------------------------
// Offload decisions
// ---------------------------------------------------------------------------

/// Latency of both working patterns for every device at its connected
/// position, under the allocation's current shares and charging powers.
/// A device whose hypothetical offload share is zero gets h2 = +infinity
/// (it cannot switch to offloading this round); a zero share on a device
/// already marked offloading makes the allocation unevaluable and throws.
inline ModeCosts mode_costs(const Scenario& s, const ChannelTable& t,
                            const Allocation& alloc) {
  const int n = s.n();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  ModeCosts mc;
  mc.h1.resize(n);
  mc.h2.resize(n);
  for (int i = 0; i < n; ++i) {
    const int j = alloc.connected_position(i);
    if (j < 0)
      throw InfeasibleError(i, -1,
                            "device must connect to exactly one position");
    const Device& d = s.devices[i];
    const double charge = alloc.charge_w(i, j);
    if (!(charge > 0.0))
      throw InfeasibleError(i, j, "no charging power at the connected position");

    mc.h1[i] = demand_coeff_at(s, t, i, j, 0.0) / charge +
               local_exec_time(d.task_cycles, d.local_freq_hz);

    const double share = alloc.cpu_share_hz(i, j);
    if (alloc.offload[i] && !(share > 0.0))
      throw InfeasibleError(i, j, "no cpu share for an offloading device");
    const double upload = tx_time(d.task_bits, t.rate_bps(i, j));
    const double compute = share > 0.0 ? d.task_cycles / share : kInf;
    mc.h2[i] = demand_coeff_at(s, t, i, j, 1.0) / charge + compute + upload;
  }
  return mc;
}

/// Per-device mode rule: offload whenever it is no slower than local
/// execution (ties offload).
inline std::vector<std::uint8_t> offload_rule(const ModeCosts& mc) {
  std::vector<std::uint8_t> rho(mc.h1.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    rho[i] = mc.h1[i] >= mc.h2[i] ? 1 : 0;
  return rho;
}

/// While a position's CPU budget is oversubscribed under the given shares,
/// flip to local the offloader connected there that loses least by the flip
/// (smallest h1 - h2; lowest index on ties). Flipping everyone local is
/// always feasible, so this terminates.
inline void repair_offloading(const Scenario& s, const Allocation& alloc,
                              const ModeCosts& mc,
                              std::vector<std::uint8_t>& rho) {
  const int n = s.n();
  const double f_max = s.budget.cpu_max_hz;
  for (int j = 0; j < s.m(); ++j) {
    double load = 0.0;
    for (int i = 0; i < n; ++i)
      if (alloc.connect(i, j) && rho[i]) load += alloc.cpu_share_hz(i, j);
    while (load > f_max * (1.0 + kCapSlack)) {
      int flip = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        if (!alloc.connect(i, j) || !rho[i]) continue;
        const double delta = mc.h1[i] - mc.h2[i];
        if (delta < best) {
          best = delta;
          flip = i;
        }
      }
      if (flip < 0) break;  // no offloaders left, load can only be zero
      rho[flip] = 0;
      load -= alloc.cpu_share_hz(flip, j);
    }
  }
}

/// Offload decision block: mode rule, then capacity repair against the
/// allocation's current shares.
inline std::vector<std::uint8_t> decide_offloading(const Scenario& s,
                                                   const ChannelTable& t,
                                                   const Allocation& alloc) {
  const ModeCosts mc = mode_costs(s, t, alloc);
  std::vector<std::uint8_t> rho = offload_rule(mc);
  repair_offloading(s, alloc, mc, rho);
  return rho;
}

// ---------------------------------------------------------------------------
// UAV CPU shares
// ---------------------------------------------------------------------------

/// Per position, grants the whole CPU budget to the connected offloaders in
/// proportion to the square root of their task cycles. Positions without
/// offloaders, and devices that compute locally, get zero.
inline void allocate_uav_cpu_into(const Scenario& s, const Allocation& alloc,
                                  Grid<double>& out) {
  const int n = s.n();
  const int m = s.m();
  out.fill(0.0);
  for (int j = 0; j < m; ++j) {
    double sum_sqrt = 0.0;
    for (int i = 0; i < n; ++i)
      if (alloc.connect(i, j) && alloc.offload[i])
        sum_sqrt += std::sqrt(s.devices[i].task_cycles);
    if (sum_sqrt == 0.0) continue;
    for (int i = 0; i < n; ++i)
      if (alloc.connect(i, j) && alloc.offload[i])
        out(i, j) = s.budget.cpu_max_hz * std::sqrt(s.devices[i].task_cycles) /
                    sum_sqrt;
  }
}

inline Grid<double> allocate_uav_cpu(const Scenario& s,
                                     const Allocation& alloc) {
  Grid<double> out(s.n(), s.m(), 0.0);
  allocate_uav_cpu_into(s, alloc, out);
  return out;
}

/// CPU-cap multipliers implied by the closed form; at a position with
/// offloaders, every granted share f satisfies f = sqrt(cycles / mu).
inline std::vector<double> implied_cpu_duals(const Scenario& s,
                                             const Allocation& alloc) {
  std::vector<double> mu(s.m(), 0.0);
  for (int j = 0; j < s.m(); ++j) {
    double sum_sqrt = 0.0;
    for (int i = 0; i < s.n(); ++i)
      if (alloc.connect(i, j) && alloc.offload[i])
        sum_sqrt += std::sqrt(s.devices[i].task_cycles);
    const double ratio = sum_sqrt / s.budget.cpu_max_hz;
    mu[j] = ratio * ratio;
  }
  return mu;
}

// ---------------------------------------------------------------------------
// Charging powers
// ---------------------------------------------------------------------------

/// Per position, grants the whole charging budget to the connected devices in
/// proportion to the square root of their energy demand coefficient. Devices
/// with zero demand get zero.
inline void allocate_charging_into(const Scenario& s, const ChannelTable& t,
                                   const Allocation& alloc, Grid<double>& out) {
  const int n = s.n();
  const int m = s.m();
  out.fill(0.0);
  for (int j = 0; j < m; ++j) {
    double sum_sqrt = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!alloc.connect(i, j)) continue;
      const double demand =
          demand_coeff_at(s, t, i, j, alloc.offload[i] ? 1.0 : 0.0);
      if (demand > 0.0) sum_sqrt += std::sqrt(demand);
    }
    if (sum_sqrt == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      if (!alloc.connect(i, j)) continue;
      const double demand =
          demand_coeff_at(s, t, i, j, alloc.offload[i] ? 1.0 : 0.0);
      if (demand > 0.0)
        out(i, j) = s.budget.power_max_w * std::sqrt(demand) / sum_sqrt;
    }
  }
}

inline Grid<double> allocate_charging(const Scenario& s, const ChannelTable& t,
                                      const Allocation& alloc) {
  Grid<double> out(s.n(), s.m(), 0.0);
  allocate_charging_into(s, t, alloc, out);
  return out;
}

/// Power-cap multipliers implied by the closed form; every granted power p
/// satisfies p = sqrt(demand / lambda).
inline std::vector<double> implied_power_duals(const Scenario& s,
                                               const ChannelTable& t,
                                               const Allocation& alloc) {
  std::vector<double> lambda(s.m(), 0.0);
  for (int j = 0; j < s.m(); ++j) {
    double sum_sqrt = 0.0;
    for (int i = 0; i < s.n(); ++i) {
      if (!alloc.connect(i, j)) continue;
      const double demand =
          demand_coeff_at(s, t, i, j, alloc.offload[i] ? 1.0 : 0.0);
      if (demand > 0.0) sum_sqrt += std::sqrt(demand);
    }
    const double ratio = sum_sqrt / s.budget.power_max_w;
    lambda[j] = ratio * ratio;
  }
  return lambda;
}

// ---------------------------------------------------------------------------
// Connection management
// ---------------------------------------------------------------------------

/// Candidate shares a device would receive at a position, computed as if the
/// device joined that position's column.
struct TrialShares {
  double cpu_share_hz = 0.0;
  double charge_w = 0.0;
  double demand_coeff = 0.0;
};

/// Assignment cost of device i at position j: the device's service latency
/// under the candidate shares, plus the multiplier penalties for the budget
/// fractions it would claim.
inline double connection_cost(const Scenario& s, const ChannelTable& t, int i,
                              int j, bool offload_i, const TrialShares& trial,
                              const DualState& dual) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const Device& d = s.devices[i];
  double h = 0.0;
  if (trial.demand_coeff > 0.0) {
    if (!(trial.charge_w > 0.0)) return kInf;
    h += trial.demand_coeff / trial.charge_w;
  }
  if (offload_i) {
    if (!(trial.cpu_share_hz > 0.0)) return kInf;
    h += d.task_cycles / trial.cpu_share_hz +
         tx_time(d.task_bits, t.rate_bps(i, j));
  } else {
    h += local_exec_time(d.task_cycles, d.local_freq_hz);
  }
  h += dual.beta[j] *
       ((offload_i ? trial.cpu_share_hz : 0.0) / s.budget.cpu_max_hz);
  h += dual.gamma[j] * (trial.charge_w / s.budget.power_max_w);
  return h;
}

struct ConnectionResult {
  Allocation alloc;  // new connections with shares and powers recomputed
  int iterations = 0;
  bool dual_infeasible = false;
  DualState duals;
};

/// Connection block: repeatedly reassign every device to its cheapest
/// position under the multiplier-penalized cost, then push the multipliers
/// along the (cap-normalized) constraint residuals with a diminishing step.
/// The best assignment seen, the input included, is returned with its shares
/// and powers recomputed, so the block never worsens the objective.
inline ConnectionResult manage_connections(const Scenario& s,
                                           const ChannelTable& t,
                                           const Allocation& input,
                                           const SolverConfig& cfg) {
  const int n = s.n();
  const int m = s.m();
  const double f_max = s.budget.cpu_max_hz;
  const double p_max = s.budget.power_max_w;
  const std::vector<std::uint8_t>& rho = input.offload;

  std::vector<int> assign(n);
  for (int i = 0; i < n; ++i) {
    assign[i] = input.connected_position(i);
    if (assign[i] < 0)
      throw InfeasibleError(i, -1,
                            "device must connect to exactly one position");
  }

  auto rebuild = [&](const std::vector<int>& as) {
    Allocation a = make_allocation(n, m);
    for (int i = 0; i < n; ++i) a.connect(i, as[i]) = 1;
    a.offload = rho;
    allocate_uav_cpu_into(s, a, a.cpu_share_hz);
    allocate_charging_into(s, t, a, a.charge_w);
    return a;
  };

  ConnectionResult res;
  res.duals.beta.assign(m, 0.0);
  res.duals.gamma.assign(m, 0.0);
  res.duals.step0 = cfg.step0;

  double obj = total_objective(s, t, rebuild(assign));
  double best_obj = obj;
  std::vector<int> best_assign = assign;

  if (m > 1) {
    // Demand coefficients are fixed by rho for the whole loop.
    Grid<double> demand(n, m), sqrt_demand(n, m);
    std::vector<double> sqrt_cycles(n);
    for (int i = 0; i < n; ++i) {
      sqrt_cycles[i] = std::sqrt(s.devices[i].task_cycles);
      for (int j = 0; j < m; ++j) {
        demand(i, j) = demand_coeff_at(s, t, i, j, rho[i] ? 1.0 : 0.0);
        sqrt_demand(i, j) = std::sqrt(demand(i, j));
      }
    }

    Grid<double> trial_f(n, m), trial_p(n, m);
    for (int k = 1; k <= cfg.k_max; ++k) {
      // Column occupancy sums under the current assignment.
      std::vector<double> col_sqrt_f(m, 0.0), col_sqrt_p(m, 0.0);
      for (int i = 0; i < n; ++i) {
        if (rho[i]) col_sqrt_f[assign[i]] += sqrt_cycles[i];
        if (demand(i, assign[i]) > 0.0)
          col_sqrt_p[assign[i]] += sqrt_demand(i, assign[i]);
      }

      std::vector<int> next(n);
      for (int i = 0; i < n; ++i) {
        double best_h = std::numeric_limits<double>::infinity();
        int best_j = 0;
        for (int j = 0; j < m; ++j) {
          double sf = col_sqrt_f[j];
          double sp = col_sqrt_p[j];
          if (assign[i] != j) {  // joining j: add this device to the column
            if (rho[i]) sf += sqrt_cycles[i];
            if (demand(i, j) > 0.0) sp += sqrt_demand(i, j);
          }
          TrialShares trial;
          trial.demand_coeff = demand(i, j);
          trial.cpu_share_hz =
              (rho[i] && sf > 0.0) ? f_max * sqrt_cycles[i] / sf : 0.0;
          trial.charge_w =
              demand(i, j) > 0.0 ? p_max * sqrt_demand(i, j) / sp : 0.0;
          trial_f(i, j) = trial.cpu_share_hz;
          trial_p(i, j) = trial.charge_w;
          const double h =
              connection_cost(s, t, i, j, rho[i] != 0, trial, res.duals);
          if (h < best_h) {  // strict: lowest index wins ties
            best_h = h;
            best_j = j;
          }
        }
        next[i] = best_j;
      }

      // Residuals of the claims devices carried into their new positions.
      std::vector<double> cpu_load(m, 0.0), p_load(m, 0.0);
      for (int i = 0; i < n; ++i) {
        if (rho[i]) cpu_load[next[i]] += trial_f(i, next[i]);
        p_load[next[i]] += trial_p(i, next[i]);
      }
      bool violated = false;
      for (int j = 0; j < m; ++j)
        if (cpu_load[j] > f_max * (1.0 + kCapSlack) ||
            p_load[j] > p_max * (1.0 + kCapSlack))
          violated = true;

      const double step = cfg.step0 / std::sqrt(static_cast<double>(k));
      for (int j = 0; j < m; ++j) {
        res.duals.beta[j] = std::max(
            0.0, res.duals.beta[j] + step * (cpu_load[j] - f_max) / f_max);
        res.duals.gamma[j] = std::max(
            0.0, res.duals.gamma[j] + step * (p_load[j] - p_max) / p_max);
      }

      const bool stable = next == assign;
      const double next_obj = total_objective(s, t, rebuild(next));
      if (next_obj < best_obj) {
        best_obj = next_obj;
        best_assign = next;
      }
      const double delta = std::abs(next_obj - obj);
      assign = std::move(next);
      obj = next_obj;
      res.iterations = k;
      if (stable || delta < cfg.eps_inner) break;
      if (k == cfg.k_max) res.dual_infeasible = violated;
    }
  }

  res.alloc = rebuild(best_assign);
  res.duals.mu = implied_cpu_duals(s, res.alloc);
  res.duals.lambda = implied_power_duals(s, t, res.alloc);
  return res;
}

}  // namespace gjra
