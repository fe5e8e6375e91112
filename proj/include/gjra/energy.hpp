#pragma once

#include <cmath>
#include <vector>

#include "gjra/channel.hpp"
#include "gjra/common.hpp"
#include "gjra/model.hpp"

namespace gjra {

// Energy, time, and latency primitives for the two working patterns (local
// execution vs offloading), plus whole-allocation latency evaluation.
//
// Harvesting time is always taken at its energy-balance lower bound: the
// charge a device needs divided by the power it is granted. Every scheme is
// therefore compared at its best possible harvesting time.

/// Relative slack applied to budget-cap comparisons so that closed forms that
/// saturate a cap exactly do not trip on rounding.
inline constexpr double kCapSlack = 1e-9;

// ---------------------------------------------------------------------------
// Candidate solution: connection matrix, offload decisions, UAV CPU shares,
// charging powers. A value type; solvers produce and consume copies.
// ---------------------------------------------------------------------------

struct Allocation {
  Grid<std::uint8_t> connect;         // one-hot rows: device i uses position j
  std::vector<std::uint8_t> offload;  // 1 = run on the UAV, 0 = run locally
  Grid<double> cpu_share_hz;          // UAV CPU granted, per (device, position)
  Grid<double> charge_w;              // charging power, per (device, position)

  /// Index of the single connected position of device i, or -1 if the row is
  /// not one-hot.
  int connected_position(int i) const {
    int found = -1;
    for (int j = 0; j < connect.cols(); ++j) {
      if (connect(i, j)) {
        if (found >= 0) return -1;
        found = j;
      }
    }
    return found;
  }

  bool operator==(const Allocation&) const = default;
};

inline Allocation make_allocation(int n, int m) {
  Allocation a;
  a.connect = Grid<std::uint8_t>(n, m, 0);
  a.offload.assign(n, 0);
  a.cpu_share_hz = Grid<double>(n, m, 0.0);
  a.charge_w = Grid<double>(n, m, 0.0);
  return a;
}

struct LatencyBreakdown {
  std::vector<double> eh_s;               // harvesting time
  std::vector<double> local_s;            // on-chip compute time
  std::vector<double> tx_s;               // upload time
  std::vector<double> offload_compute_s;  // UAV compute time
  std::vector<double> total_s;            // per-device service latency
  double scenario_total_s = 0.0;
};

// ---------------------------------------------------------------------------
// Scalar primitives
// ---------------------------------------------------------------------------

inline double local_exec_time(double task_cycles, double local_freq_hz) {
  return task_cycles / local_freq_hz;
}

/// Dynamic CPU energy k * F * f^(v-1).
inline double local_exec_energy(double capacitance_k, double task_cycles,
                                double local_freq_hz, double cpu_exponent) {
  return capacitance_k * task_cycles *
         std::pow(local_freq_hz, cpu_exponent - 1.0);
}

inline double tx_time(double task_bits, double rate_bps) {
  return task_bits / rate_bps;
}

inline double tx_energy(double uplink_power_w, double tx_time_s) {
  return uplink_power_w * tx_time_s;
}

inline double offload_compute_time(double task_cycles, double cpu_share_hz) {
  if (!(cpu_share_hz > 0.0))
    throw InfeasibleError(-1, -1, "cpu share is zero for an offloaded task");
  return task_cycles / cpu_share_hz;
}

/// Energy demand per unit of received charging power: the energy the device
/// must consume in its chosen mode, divided by the harvesting efficiency and
/// the charging-link gain. Harvesting time equals this coefficient divided by
/// the granted charging power.
inline double energy_demand_coeff(double rho, double capacitance_k,
                                  double task_cycles, double local_freq_hz,
                                  double uplink_power_w, double tx_time_s,
                                  double eta0, double gain,
                                  double cpu_exponent = 3.0) {
  const double local = local_exec_energy(capacitance_k, task_cycles,
                                         local_freq_hz, cpu_exponent);
  const double upload = tx_energy(uplink_power_w, tx_time_s);
  return ((1.0 - rho) * local + rho * upload) / (eta0 * gain);
}

/// Minimal harvesting time meeting the energy balance with equality.
inline double harvest_time(double demand_coeff, double charge_w) {
  if (demand_coeff == 0.0) return 0.0;
  if (!(charge_w > 0.0))
    throw InfeasibleError(-1, -1,
                          "device needs energy but receives no charging power");
  return demand_coeff / charge_w;
}

// ---------------------------------------------------------------------------
// Whole-allocation evaluation
// ---------------------------------------------------------------------------

/// Energy demand coefficient of device i at position j under offload flag rho.
inline double demand_coeff_at(const Scenario& s, const ChannelTable& t, int i,
                              int j, double rho) {
  const Device& d = s.devices[i];
  return energy_demand_coeff(rho, d.capacitance_k, d.task_cycles,
                             d.local_freq_hz, d.uplink_power_w,
                             tx_time(d.task_bits, t.rate_bps(i, j)),
                             s.physics.eh_efficiency, t.gain(i, j),
                             s.physics.cpu_exponent);
}

struct DeviceLatency {
  double eh_s = 0.0;
  double local_s = 0.0;
  double tx_s = 0.0;
  double offload_compute_s = 0.0;
  double total_s = 0.0;
};

inline DeviceLatency device_latency(const Scenario& s, const ChannelTable& t,
                                    const Allocation& alloc, int i) {
  const int j = alloc.connected_position(i);
  if (j < 0)
    throw InfeasibleError(i, -1, "device must connect to exactly one position");
  const Device& d = s.devices[i];
  const bool off = alloc.offload[i] != 0;
  DeviceLatency out;

  const double demand = demand_coeff_at(s, t, i, j, off ? 1.0 : 0.0);
  const double charge = alloc.charge_w(i, j);
  if (demand > 0.0 && !(charge > 0.0))
    throw InfeasibleError(i, j, "no charging power at the connected position");
  out.eh_s = demand > 0.0 ? demand / charge : 0.0;

  if (off) {
    const double share = alloc.cpu_share_hz(i, j);
    if (!(share > 0.0))
      throw InfeasibleError(i, j, "no cpu share for an offloading device");
    out.tx_s = tx_time(d.task_bits, t.rate_bps(i, j));
    out.offload_compute_s = d.task_cycles / share;
    out.total_s = out.eh_s + out.tx_s + out.offload_compute_s;
  } else {
    out.local_s = local_exec_time(d.task_cycles, d.local_freq_hz);
    out.total_s = out.eh_s + out.local_s;
  }
  return out;
}

/// Scalar objective: sum of per-device service latencies, accumulated in
/// device-id order. Uses the same per-device arithmetic as total_latency so
/// both routes produce bit-identical values.
inline double total_objective(const Scenario& s, const ChannelTable& t,
                              const Allocation& alloc) {
  double sum = 0.0;
  for (int i = 0; i < s.n(); ++i) sum += device_latency(s, t, alloc, i).total_s;
  return sum;
}

inline LatencyBreakdown total_latency(const Scenario& s, const ChannelTable& t,
                                      const Allocation& alloc) {
  const int n = s.n();
  LatencyBreakdown b;
  b.eh_s.resize(n);
  b.local_s.resize(n);
  b.tx_s.resize(n);
  b.offload_compute_s.resize(n);
  b.total_s.resize(n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const DeviceLatency dl = device_latency(s, t, alloc, i);
    b.eh_s[i] = dl.eh_s;
    b.local_s[i] = dl.local_s;
    b.tx_s[i] = dl.tx_s;
    b.offload_compute_s[i] = dl.offload_compute_s;
    b.total_s[i] = dl.total_s;
    sum += dl.total_s;
  }
  b.scenario_total_s = sum;
  return b;
}

}  // namespace gjra
