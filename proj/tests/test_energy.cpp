#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "gjra/energy.hpp"
#include "gjra/subsolvers.hpp"

using namespace gjra;
using Catch::Approx;

TEST_CASE("scalar time and energy primitives") {
  CHECK(local_exec_time(1e6, 1e6) == Approx(1.0));
  CHECK(local_exec_time(2e6, 1e6) == Approx(2.0));
  CHECK(local_exec_time(5e5, 1e6) == Approx(0.5));

  // k F f^(v-1); quadratic in f at v = 3.
  CHECK(local_exec_energy(1e-28, 1e6, 1e6, 3.0) == Approx(1e-10));
  CHECK(local_exec_energy(1e-28, 1e6, 2e6, 3.0) ==
        Approx(4.0 * local_exec_energy(1e-28, 1e6, 1e6, 3.0)));
  CHECK(local_exec_energy(1e-28, 1e6, 1e6, 2.0) == Approx(1e-28 * 1e6 * 1e6));

  CHECK(tx_time(1e6, 1e7) == Approx(0.1));
  CHECK(tx_time(1e7, 1e7) == Approx(1.0));
  CHECK(tx_time(1e6, 0.5e7) == Approx(2.0 * tx_time(1e6, 1e7)));

  CHECK(tx_energy(2.83e-3, 1.0) == Approx(2.83e-3));
  CHECK(tx_energy(2.83e-3, 0.0) == Approx(0.0));
  CHECK(tx_energy(2.0 * 2.83e-3, 1.0) == Approx(2.0 * tx_energy(2.83e-3, 1.0)));

  CHECK(offload_compute_time(3e6, 3e6) == Approx(1.0));
  CHECK(offload_compute_time(3e6, 3e6) ==
        Approx(offload_compute_time(3e6, 3e6)));
  CHECK_THROWS_AS(offload_compute_time(3e6, 0.0), InfeasibleError);
}

TEST_CASE("energy demand coefficient") {
  // Local mode: k F f^2 / (eta0 g) = 1e-10 / 8e-5.
  CHECK(energy_demand_coeff(0.0, 1e-28, 1e6, 1e6, 2.83e-3, 0.1, 0.8, 1e-4) ==
        Approx(1.25e-6).epsilon(1e-14));
  // Offload mode selects the upload energy.
  CHECK(energy_demand_coeff(1.0, 1e-28, 1e6, 1e6, 2.83e-3, 0.1, 0.8, 1e-4) ==
        Approx(2.83e-3 * 0.1 / (0.8 * 1e-4)).epsilon(1e-14));
  CHECK(energy_demand_coeff(0.0, 1e-28, 1e6, 1e6, 2.83e-3, 0.1, 0.8, 1e-4) >=
        0.0);
}

TEST_CASE("harvesting time at the energy-balance bound") {
  CHECK(harvest_time(1.25e-6, 0.1) == Approx(1.25e-5).epsilon(1e-14));
  CHECK(harvest_time(0.0, 0.0) == Approx(0.0));
  CHECK(harvest_time(1.0, 0.2) == Approx(0.5 * harvest_time(1.0, 0.1)));
  CHECK_THROWS_AS(harvest_time(1.0, 0.0), InfeasibleError);
}

namespace {

Scenario two_device_scenario() {
  Scenario s;
  for (int i = 0; i < 2; ++i) {
    Device d;
    d.id = i;
    d.position = {1.0, 2.0};  // co-located pair, symmetric by construction
    d.task_bits = 4e5;
    d.task_cycles = 8e5;
    d.local_freq_hz = 1e6;
    d.uplink_power_w = 2.83e-3;
    d.capacitance_k = 1e-28;
    s.devices.push_back(d);
  }
  s.positions.push_back({0, {0.0, 0.0}});
  return s;
}

}  // namespace

TEST_CASE("total latency composes the primitives") {
  Scenario s = two_device_scenario();
  s.devices.pop_back();
  const ChannelTable t = build_channel_table(s);
  const Device& d = s.devices[0];

  SECTION("local mode") {
    Allocation a = make_allocation(1, 1);
    a.connect(0, 0) = 1;
    a.offload[0] = 0;
    a.charge_w(0, 0) = s.budget.power_max_w;
    const LatencyBreakdown b = total_latency(s, t, a);
    const double demand = demand_coeff_at(s, t, 0, 0, 0.0);
    CHECK(b.eh_s[0] == Approx(demand / s.budget.power_max_w));
    CHECK(b.local_s[0] == Approx(d.task_cycles / d.local_freq_hz));
    CHECK(b.total_s[0] == Approx(b.eh_s[0] + b.local_s[0]));
    CHECK(b.scenario_total_s == Approx(b.total_s[0]));
    CHECK(b.tx_s[0] == 0.0);
    CHECK(b.offload_compute_s[0] == 0.0);
  }

  SECTION("offload mode with the full CPU budget") {
    Allocation a = make_allocation(1, 1);
    a.connect(0, 0) = 1;
    a.offload[0] = 1;
    a.charge_w(0, 0) = s.budget.power_max_w;
    a.cpu_share_hz(0, 0) = s.budget.cpu_max_hz;
    const LatencyBreakdown b = total_latency(s, t, a);
    const double demand = demand_coeff_at(s, t, 0, 0, 1.0);
    CHECK(b.eh_s[0] == Approx(demand / s.budget.power_max_w));
    CHECK(b.tx_s[0] == Approx(d.task_bits / t.rate_bps(0, 0)));
    CHECK(b.offload_compute_s[0] ==
          Approx(d.task_cycles / s.budget.cpu_max_hz));
    CHECK(b.total_s[0] ==
          Approx(b.eh_s[0] + b.tx_s[0] + b.offload_compute_s[0]));
    CHECK(b.local_s[0] == 0.0);
  }

  SECTION("infeasible allocations raise structured errors") {
    Allocation a = make_allocation(1, 1);
    a.connect(0, 0) = 1;
    a.offload[0] = 1;
    a.charge_w(0, 0) = s.budget.power_max_w;
    a.cpu_share_hz(0, 0) = 0.0;
    try {
      total_latency(s, t, a);
      FAIL("expected an infeasibility error");
    } catch (const InfeasibleError& e) {
      CHECK(e.device() == 0);
      CHECK(e.position() == 0);
    }

    a.offload[0] = 0;
    a.charge_w(0, 0) = 0.0;
    CHECK_THROWS_AS(total_latency(s, t, a), InfeasibleError);

    a.connect(0, 0) = 0;  // no connection at all
    CHECK_THROWS_AS(total_latency(s, t, a), InfeasibleError);
  }
}

TEST_CASE("identical devices with equal splits get equal latency") {
  const Scenario s = two_device_scenario();
  const ChannelTable t = build_channel_table(s);
  Allocation a = make_allocation(2, 1);
  for (int i = 0; i < 2; ++i) {
    a.connect(i, 0) = 1;
    a.offload[i] = 1;
    a.cpu_share_hz(i, 0) = s.budget.cpu_max_hz / 2.0;
    a.charge_w(i, 0) = s.budget.power_max_w / 2.0;
  }
  const LatencyBreakdown b = total_latency(s, t, a);
  CHECK(b.total_s[0] == b.total_s[1]);
}

TEST_CASE("latency decreases in charging power and cpu share") {
  const Scenario s = two_device_scenario();
  const ChannelTable t = build_channel_table(s);
  Allocation a = make_allocation(2, 1);
  for (int i = 0; i < 2; ++i) {
    a.connect(i, 0) = 1;
    a.offload[i] = i == 0 ? 0 : 1;
    a.cpu_share_hz(i, 0) = 1e6;
    a.charge_w(i, 0) = 0.05;
  }
  const LatencyBreakdown base = total_latency(s, t, a);

  Allocation more_charge = a;
  more_charge.charge_w(0, 0) *= 2.0;
  CHECK(total_latency(s, t, more_charge).total_s[0] < base.total_s[0]);

  Allocation more_cpu = a;
  more_cpu.cpu_share_hz(1, 0) *= 2.0;
  CHECK(total_latency(s, t, more_cpu).total_s[1] < base.total_s[1]);
}

TEST_CASE("mode switch changes latency by the recomputed component delta") {
  const Scenario s = two_device_scenario();
  const ChannelTable t = build_channel_table(s);
  Allocation offloaded = make_allocation(2, 1);
  for (int i = 0; i < 2; ++i) {
    offloaded.connect(i, 0) = 1;
    offloaded.offload[i] = 1;
    offloaded.cpu_share_hz(i, 0) = 1.5e6;
    offloaded.charge_w(i, 0) = 0.05;
  }
  Allocation local = offloaded;
  local.offload[0] = 0;

  const LatencyBreakdown before = total_latency(s, t, offloaded);
  const LatencyBreakdown after = total_latency(s, t, local);
  const Device& d = s.devices[0];

  const double eh_delta = demand_coeff_at(s, t, 0, 0, 0.0) / 0.05 -
                          demand_coeff_at(s, t, 0, 0, 1.0) / 0.05;
  const double expected_delta = d.task_cycles / d.local_freq_hz -
                                (d.task_bits / t.rate_bps(0, 0) +
                                 d.task_cycles / 1.5e6) +
                                eh_delta;
  CHECK(after.total_s[0] - before.total_s[0] ==
        Approx(expected_delta).epsilon(1e-12));
  CHECK(after.total_s[1] == before.total_s[1]);
}

TEST_CASE("energy balance holds after closed-form charging") {
  const Scenario s = two_device_scenario();
  const ChannelTable t = build_channel_table(s);
  Allocation a = make_allocation(2, 1);
  a.connect(0, 0) = 1;
  a.connect(1, 0) = 1;
  a.offload = {0, 1};
  allocate_uav_cpu_into(s, a, a.cpu_share_hz);
  allocate_charging_into(s, t, a, a.charge_w);

  const LatencyBreakdown b = total_latency(s, t, a);
  for (int i = 0; i < 2; ++i) {
    const Device& d = s.devices[i];
    const double consumed =
        a.offload[i]
            ? tx_energy(d.uplink_power_w, tx_time(d.task_bits, t.rate_bps(i, 0)))
            : local_exec_energy(d.capacitance_k, d.task_cycles,
                                d.local_freq_hz, s.physics.cpu_exponent);
    const double harvested = s.physics.eh_efficiency * a.charge_w(i, 0) *
                             t.gain(i, 0) * b.eh_s[i];
    CHECK(harvested == Approx(consumed).epsilon(1e-9));
  }
}
