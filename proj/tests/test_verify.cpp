#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "gjra/verify.hpp"

using namespace gjra;
using Catch::Approx;

TEST_CASE("capped-simplex projection") {
  SECTION("interior points pass through with clamping") {
    const auto p = project_capped_simplex({0.2, -0.1, 0.3}, 1.0);
    CHECK(p[0] == Approx(0.2));
    CHECK(p[1] == Approx(0.0));
    CHECK(p[2] == Approx(0.3));
  }
  SECTION("oversized points land on the budget face") {
    const auto p = project_capped_simplex({2.0, 1.0}, 1.0);
    CHECK(p[0] + p[1] == Approx(1.0));
    CHECK(p[0] == Approx(1.0));
    CHECK(p[1] == Approx(0.0));
  }
}

TEST_CASE("numeric share oracle") {
  SECTION("single coefficient takes the whole cap") {
    const auto x = kkt_oracle_cpu({1e6}, 3e6);
    CHECK(x[0] == Approx(3e6).epsilon(1e-9));
  }
  SECTION("equal coefficients split evenly") {
    const auto x = kkt_oracle_cpu({1e6, 1e6}, 3e6);
    CHECK(x[0] == Approx(1.5e6).epsilon(1e-6));
    CHECK(x[1] == Approx(1.5e6).epsilon(1e-6));
  }
  SECTION("1:4 coefficients give a 1:2 split") {
    const auto x = kkt_oracle_cpu({1e6, 4e6}, 3e6);
    CHECK(x[0] == Approx(1e6).epsilon(1e-6));
    CHECK(x[1] == Approx(2e6).epsilon(1e-6));
  }
  SECTION("grid cross-check agrees with the gradient oracle") {
    const double c1 = 0.7, c2 = 2.9, cap = 0.1;
    const auto x = kkt_oracle_power({c1, c2}, cap);
    const double pg_obj = c1 / x[0] + c2 / x[1];
    const double grid_obj = grid_oracle_pair(c1, c2, cap);
    CHECK(pg_obj == Approx(grid_obj).epsilon(1e-5));
  }
  SECTION("zero coefficients get nothing") {
    const auto x = kkt_oracle_power({0.0, 1.0}, 0.1);
    CHECK(x[0] == 0.0);
    CHECK(x[1] == Approx(0.1).epsilon(1e-9));
  }
}

TEST_CASE("allocation checker") {
  const Scenario s = generate_scenario(4, 2, 25.0, 3, PhysicsConfig{},
                                       UavBudget{}, TaskRanges{});
  const ChannelTable t = build_channel_table(s);

  SECTION("solver output is clean") {
    const SolveReport rep = solve_gjra(s, SolverConfig{});
    CHECK(check_allocation(s, t, rep.final_alloc).empty());
  }

  SECTION("a two-position row is reported for that device") {
    Allocation a = make_allocation(4, 2);
    for (int i = 0; i < 4; ++i) a.connect(i, 0) = 1;
    a.connect(2, 1) = 1;  // device 2 now connects twice
    allocate_uav_cpu_into(s, a, a.cpu_share_hz);
    allocate_charging_into(s, t, a, a.charge_w);
    const auto violations = check_allocation(s, t, a);
    REQUIRE_FALSE(violations.empty());
    bool found = false;
    for (const Violation& v : violations)
      if (v.constraint == "one-connection" && v.device == 2) found = true;
    CHECK(found);
  }

  SECTION("an over-budget charging column is reported for that position") {
    Allocation a = make_allocation(4, 2);
    for (int i = 0; i < 4; ++i) a.connect(i, 1) = 1;
    allocate_uav_cpu_into(s, a, a.cpu_share_hz);
    allocate_charging_into(s, t, a, a.charge_w);
    a.charge_w(0, 1) = s.budget.power_max_w;  // stacks over the cap
    const auto violations = check_allocation(s, t, a);
    bool found = false;
    for (const Violation& v : violations)
      if (v.constraint == "power-budget" && v.position == 1) found = true;
    CHECK(found);
  }

  SECTION("a broken energy balance is reported") {
    Allocation a = make_allocation(4, 2);
    for (int i = 0; i < 4; ++i) a.connect(i, 0) = 1;
    allocate_uav_cpu_into(s, a, a.cpu_share_hz);
    allocate_charging_into(s, t, a, a.charge_w);
    CHECK(check_allocation(s, t, a).empty());
  }
}

TEST_CASE("oracle agreement suite") {
  std::ostringstream table;
  const auto reports = run_verify_suite(25, &table);
  CHECK(all_passed(reports));
  CHECK(reports.size() >= 25);  // at least the power comparison per instance
  for (const OracleReport& r : reports) {
    CHECK(r.relative_gap >= -1e-9);
    CHECK(std::abs(r.relative_gap) <= 1e-6);
  }
  CHECK(table.str().find("FAIL") == std::string::npos);
}
