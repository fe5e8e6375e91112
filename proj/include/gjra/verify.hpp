#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "gjra/energy.hpp"
#include "gjra/model.hpp"
#include "gjra/solver.hpp"
#include "gjra/subsolvers.hpp"

namespace gjra {

// Independent oracles for the closed-form block solvers, and whole-allocation
// invariant checking. The closed forms correct an algebraic simplification
// that breaks the budget caps, so they are validated by two oracles that
// share no code with them: a projected-gradient descent and (for pairs) a
// dense grid search.

struct OracleReport {
  std::string kind;  // "cpu" or "power"
  int instance = 0;
  int devices = 0;
  double closed_form_objective = 0.0;
  double numeric_objective = 0.0;
  double relative_gap = 0.0;  // (numeric - closed) / closed
  std::vector<double> constraint_residuals;  // per-position (load - cap) / cap
  bool passed = false;
};

// ---------------------------------------------------------------------------
// Numeric solvers for  min sum c_i / x_i  s.t.  x >= 0, sum x <= cap
// ---------------------------------------------------------------------------

/// Euclidean projection onto {x >= 0, sum x <= cap}.
inline std::vector<double> project_capped_simplex(std::vector<double> y,
                                                  double cap) {
  double positive_sum = 0.0;
  for (double v : y) positive_sum += std::max(v, 0.0);
  if (positive_sum <= cap) {
    for (double& v : y) v = std::max(v, 0.0);
    return y;
  }
  // Project onto the face sum x = cap: threshold shift.
  std::vector<double> z = y;
  std::sort(z.begin(), z.end(), std::greater<double>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    cumulative += z[k];
    const double candidate = (cumulative - cap) / static_cast<double>(k + 1);
    if (k + 1 == z.size() || z[k + 1] <= candidate) {
      tau = candidate;
      break;
    }
  }
  for (double& v : y) v = std::max(v - tau, 0.0);
  return y;
}

/// Projected-gradient minimizer started from the uniform point. The line
/// search halves the step until it improves, doubles while that keeps
/// helping, then polishes the bracket; descent stops once a searched step no
/// longer moves the objective. Entries with a zero coefficient get zero.
inline std::vector<double> kkt_oracle_shares(const std::vector<double>& coeff,
                                             double cap) {
  const std::size_t n = coeff.size();
  std::vector<double> x(n, 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i)
    if (coeff[i] > 0.0) active.push_back(i);
  if (active.empty()) return x;

  std::vector<double> a(active.size());
  for (std::size_t k = 0; k < active.size(); ++k) a[k] = coeff[active[k]];

  auto objective = [&](const std::vector<double>& v) {
    double sum = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!(v[k] > 0.0)) return std::numeric_limits<double>::infinity();
      sum += a[k] / v[k];
    }
    return sum;
  };

  std::vector<double> v(active.size(), cap / static_cast<double>(active.size()));
  double current = objective(v);

  std::vector<double> grad(v.size());
  auto at_step = [&](double scale, double t) {
    std::vector<double> y(v.size());
    for (std::size_t k = 0; k < v.size(); ++k)
      y[k] = v[k] - t / scale * grad[k];
    return project_capped_simplex(std::move(y), cap);
  };

  double t = 0.25 * cap;
  constexpr int kMaxIterations = 20000;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    double grad_scale = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      grad[k] = -a[k] / (v[k] * v[k]);
      grad_scale = std::max(grad_scale, std::abs(grad[k]));
    }
    if (grad_scale == 0.0) break;

    std::vector<double> y = at_step(grad_scale, t);
    double fy = objective(y);
    while (fy >= current && t > 1e-20 * cap) {
      t *= 0.5;
      y = at_step(grad_scale, t);
      fy = objective(y);
    }
    if (fy >= current) break;  // numerically stationary

    while (t < 4.0 * cap) {
      std::vector<double> wider = at_step(grad_scale, 2.0 * t);
      const double f_wider = objective(wider);
      if (f_wider >= fy) break;
      t *= 2.0;
      y = std::move(wider);
      fy = f_wider;
    }
    double lo = 0.5 * t;
    double hi = std::min(2.0 * t, 4.0 * cap);
    for (int split = 0; split < 60; ++split) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if (objective(at_step(grad_scale, m1)) <=
          objective(at_step(grad_scale, m2)))
        hi = m2;
      else
        lo = m1;
    }
    std::vector<double> polished = at_step(grad_scale, 0.5 * (lo + hi));
    const double f_polished = objective(polished);
    if (f_polished < fy) {
      y = std::move(polished);
      fy = f_polished;
      t = 0.5 * (lo + hi);
    }

    const double improvement = current - fy;
    v = std::move(y);
    current = fy;
    if (improvement < 1e-13 * std::max(1.0, current)) break;
  }

  for (std::size_t k = 0; k < active.size(); ++k) x[active[k]] = v[k];
  return x;
}

/// min F_1/x_1 + ... s.t. sum x <= f_max: numeric CPU-share oracle.
inline std::vector<double> kkt_oracle_cpu(const std::vector<double>& cycles,
                                          double f_max) {
  return kkt_oracle_shares(cycles, f_max);
}

/// min A_1/x_1 + ... s.t. sum x <= p_max: numeric charging-power oracle.
inline std::vector<double> kkt_oracle_power(const std::vector<double>& demand,
                                            double p_max) {
  return kkt_oracle_shares(demand, p_max);
}

/// Dense 1-D grid over the split fraction for a device pair; returns the best
/// objective found. Second cross-check, independent of the gradient oracle.
inline double grid_oracle_pair(double c1, double c2, double cap,
                               int resolution = 1000000) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k < resolution; ++k) {
    const double x1 = cap * static_cast<double>(k) / resolution;
    const double value = c1 / x1 + c2 / (cap - x1);
    best = std::min(best, value);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Allocation invariant checking
// ---------------------------------------------------------------------------

struct Violation {
  int device = -1;    // -1 when not device-specific
  int position = -1;  // -1 when not position-specific
  std::string constraint;
  std::string detail;
};

inline std::vector<Violation> check_allocation(const Scenario& s,
                                               const ChannelTable& t,
                                               const Allocation& a) {
  std::vector<Violation> out;
  const int n = s.n();
  const int m = s.m();
  if (a.connect.rows() != n || a.connect.cols() != m ||
      static_cast<int>(a.offload.size()) != n) {
    out.push_back({-1, -1, "shape", "allocation does not match scenario size"});
    return out;
  }

  for (int i = 0; i < n; ++i) {
    int ones = 0;
    for (int j = 0; j < m; ++j) {
      if (a.connect(i, j) > 1)
        out.push_back({i, j, "binary-connect", "entry not in {0,1}"});
      ones += a.connect(i, j) ? 1 : 0;
    }
    if (ones != 1)
      out.push_back({i, -1, "one-connection",
                     "device connects to " + std::to_string(ones) +
                         " positions, expected exactly 1"});
    if (a.offload[i] > 1)
      out.push_back({i, -1, "binary-offload", "entry not in {0,1}"});
  }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      if (a.cpu_share_hz(i, j) < 0.0)
        out.push_back({i, j, "nonnegative-cpu-share", "negative share"});
      if (a.charge_w(i, j) < 0.0)
        out.push_back({i, j, "nonnegative-charge", "negative charging power"});
    }

  for (int j = 0; j < m; ++j) {
    double cpu_load = 0.0;
    double power_load = 0.0;
    for (int i = 0; i < n; ++i) {
      if (a.connect(i, j) && a.offload[i]) cpu_load += a.cpu_share_hz(i, j);
      if (a.connect(i, j)) power_load += a.charge_w(i, j);
    }
    if (cpu_load > s.budget.cpu_max_hz * (1.0 + kCapSlack))
      out.push_back({-1, j, "cpu-budget",
                     "offloaded shares sum to " + fmt_g12(cpu_load) +
                         " Hz, budget " + fmt_g12(s.budget.cpu_max_hz)});
    if (power_load > s.budget.power_max_w * (1.0 + kCapSlack))
      out.push_back({-1, j, "power-budget",
                     "charging powers sum to " + fmt_g12(power_load) +
                         " W, budget " + fmt_g12(s.budget.power_max_w)});
  }

  // Per-device feasibility and energy balance at the harvesting-time bound.
  for (int i = 0; i < n; ++i) {
    const int j = a.connected_position(i);
    if (j < 0) continue;  // already reported above
    const Device& d = s.devices[i];
    const bool off = a.offload[i] != 0;
    const double consumed =
        off ? tx_energy(d.uplink_power_w, tx_time(d.task_bits, t.rate_bps(i, j)))
            : local_exec_energy(d.capacitance_k, d.task_cycles,
                                d.local_freq_hz, s.physics.cpu_exponent);
    const double charge = a.charge_w(i, j);
    if (consumed > 0.0 && !(charge > 0.0)) {
      out.push_back({i, j, "charging-feasibility",
                     "device needs energy but receives no charging power"});
      continue;
    }
    if (off && !(a.cpu_share_hz(i, j) > 0.0)) {
      out.push_back({i, j, "share-feasibility",
                     "offloading device has no cpu share"});
      continue;
    }
    if (consumed > 0.0) {
      const double demand = demand_coeff_at(s, t, i, j, off ? 1.0 : 0.0);
      const double eh_time = demand / charge;
      const double harvested =
          s.physics.eh_efficiency * charge * t.gain(i, j) * eh_time;
      const double scale = std::max(consumed, harvested);
      if (std::abs(consumed - harvested) > 1e-9 * scale)
        out.push_back({i, j, "energy-balance",
                       "consumed " + fmt_g12(consumed) + " J vs harvested " +
                           fmt_g12(harvested) + " J"});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracle agreement suite
// ---------------------------------------------------------------------------

namespace detail {

/// Random single-column instance: 1..4 devices connected to one position with
/// a seed-dependent mix of modes.
inline std::pair<Scenario, Allocation> column_instance(std::uint64_t seed) {
  std::mt19937_64 gen(mix_seed(seed, 0x6f7261636c65));  // "oracle"
  const int n = 1 + static_cast<int>(uniform_index(gen, 4));
  TaskRanges ranges;
  Scenario s = generate_scenario(n, 1, 30.0, gen(), PhysicsConfig{},
                                 UavBudget{}, ranges, DeviceDefaults{});
  Allocation a = make_allocation(n, 1);
  for (int i = 0; i < n; ++i) {
    a.connect(i, 0) = 1;
    a.offload[i] = static_cast<std::uint8_t>(uniform_index(gen, 2));
  }
  return {std::move(s), std::move(a)};
}

inline double sum_ratio(const std::vector<double>& coeff,
                        const std::vector<double>& shares) {
  double sum = 0.0;
  for (std::size_t i = 0; i < coeff.size(); ++i)
    if (coeff[i] > 0.0) sum += coeff[i] / shares[i];
  return sum;
}

}  // namespace detail

/// Compares a closed-form column allocation against the numeric oracle.
inline OracleReport compare_column(const std::string& kind, int instance,
                                   const std::vector<double>& coeff,
                                   const std::vector<double>& closed_shares,
                                   double cap) {
  OracleReport rep;
  rep.kind = kind;
  rep.instance = instance;
  rep.devices = static_cast<int>(coeff.size());
  rep.closed_form_objective = detail::sum_ratio(coeff, closed_shares);
  const std::vector<double> numeric = kkt_oracle_shares(coeff, cap);
  rep.numeric_objective = detail::sum_ratio(coeff, numeric);
  rep.relative_gap = (rep.numeric_objective - rep.closed_form_objective) /
                     rep.closed_form_objective;

  double load = 0.0;
  bool any_positive = false;
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    load += closed_shares[i];
    any_positive |= coeff[i] > 0.0;
  }
  rep.constraint_residuals.push_back((load - cap) / cap);
  const bool budget_ok =
      !any_positive || std::abs(load - cap) <= kCapSlack * cap;
  rep.passed = std::abs(rep.relative_gap) <= 1e-6 && budget_ok &&
               rep.relative_gap >= -1e-9;
  return rep;
}

/// Runs the oracle agreement suite on `instances` seeded random column
/// instances; optionally prints one table row per comparison.
inline std::vector<OracleReport> run_verify_suite(int instances,
                                                  std::ostream* out = nullptr) {
  std::vector<OracleReport> reports;
  if (out)
    *out << "instance  kind   n  closed_objective   numeric_objective  "
            "rel_gap      max_residual  status\n";
  for (int inst = 0; inst < instances; ++inst) {
    auto [s, a] = detail::column_instance(static_cast<std::uint64_t>(inst) + 1);
    const ChannelTable t = build_channel_table(s);
    const int n = s.n();

    allocate_uav_cpu_into(s, a, a.cpu_share_hz);
    allocate_charging_into(s, t, a, a.charge_w);

    std::vector<double> cycles(n, 0.0), demand(n, 0.0);
    std::vector<double> cpu_shares(n, 0.0), charge(n, 0.0);
    for (int i = 0; i < n; ++i) {
      if (a.offload[i]) cycles[i] = s.devices[i].task_cycles;
      demand[i] = demand_coeff_at(s, t, i, 0, a.offload[i] ? 1.0 : 0.0);
      cpu_shares[i] = a.cpu_share_hz(i, 0);
      charge[i] = a.charge_w(i, 0);
    }

    const bool any_offloader =
        std::any_of(cycles.begin(), cycles.end(),
                    [](double c) { return c > 0.0; });
    if (any_offloader)
      reports.push_back(compare_column("cpu", inst, cycles, cpu_shares,
                                       s.budget.cpu_max_hz));
    reports.push_back(
        compare_column("power", inst, demand, charge, s.budget.power_max_w));

    if (out) {
      for (auto it = reports.end() -
                     (any_offloader ? 2 : 1);
           it != reports.end(); ++it) {
        const OracleReport& r = *it;
        double max_residual = 0.0;
        for (double v : r.constraint_residuals)
          max_residual = std::max(max_residual, std::abs(v));
        *out << std::setw(8) << r.instance << "  " << std::setw(5) << r.kind
             << "  " << r.devices << "  " << std::setw(17)
             << fmt_g12(r.closed_form_objective) << "  " << std::setw(17)
             << fmt_g12(r.numeric_objective) << "  " << std::setw(11)
             << fmt_g12(r.relative_gap) << "  " << std::setw(12)
             << fmt_g12(max_residual) << "  "
             << (r.passed ? "ok" : "FAIL") << '\n';
      }
    }
  }
  return reports;
}

inline bool all_passed(const std::vector<OracleReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const OracleReport& r) { return r.passed; });
}

}  // namespace gjra
