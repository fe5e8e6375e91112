#pragma once

#include <cmath>
#include <ostream>

#include "gjra/common.hpp"
#include "gjra/model.hpp"

namespace gjra {

// Deterministic per-(device, position) radio quantities: distance, LoS
// probability, average pathloss, uplink rate, and the charging-link power
// gain. All functions here are pure.

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

/// Slant (3-D) distance between a ground device and the UAV at altitude H.
inline double distance_m(const Vec2& device, const Vec2& hover,
                         double altitude_m) {
  const double dx = hover.x - device.x;
  const double dy = hover.y - device.y;
  return std::sqrt(dx * dx + dy * dy + altitude_m * altitude_m);
}

/// Free-space pathloss at the 1 m reference distance, in dB.
inline double free_space_pathloss_db(double carrier_hz) {
  return 20.0 * std::log10(carrier_hz) +
         20.0 * std::log10(4.0 * kPi / kSpeedOfLight);
}

/// Elevation angle in degrees seen from the device towards the UAV.
inline double elevation_deg(const Vec2& device, const Vec2& hover,
                            double altitude_m, ElevationConvention convention) {
  constexpr double kRadToDeg = 180.0 / kPi;
  if (convention == ElevationConvention::Paper3dDistance) {
    const double d3 = distance_m(device, hover, altitude_m);
    return std::atan(altitude_m / d3) * kRadToDeg;
  }
  const double dx = hover.x - device.x;
  const double dy = hover.y - device.y;
  const double horizontal = std::sqrt(dx * dx + dy * dy);
  if (horizontal == 0.0) return 90.0;
  return std::atan(altitude_m / horizontal) * kRadToDeg;
}

/// Sigmoid LoS probability in the elevation angle (degrees). Strictly
/// increasing in theta for a, b > 0; value in (0, 1).
inline double los_probability(double theta_deg, double a, double b) {
  return 1.0 / (1.0 + a * std::exp(-b * (theta_deg - a)));
}

/// Convex combination of the LoS and NLoS pathloss, in dB.
inline double average_pathloss_db(double p_los, double pl_los_db,
                                  double pl_nlos_db) {
  return p_los * pl_los_db + (1.0 - p_los) * pl_nlos_db;
}

/// Shannon uplink rate in bits/s given the average pathloss in dB.
inline double uplink_rate_bps(double p_tx_w, double noise_w,
                              double pathloss_db, double bandwidth_hz) {
  const double snr = p_tx_w / (noise_w * db_to_linear(pathloss_db));
  return bandwidth_hz * std::log2(1.0 + snr);
}

/// Linear charging-link power gain: ref_gain / distance. Valid only at or
/// beyond the 1 m reference distance.
inline double channel_gain(double ref_gain_linear, double dist_m) {
  if (dist_m < 1.0)
    throw ValidationError("dist_m",
                          "below the 1 m reference distance of the gain model");
  return ref_gain_linear / dist_m;
}

// ---------------------------------------------------------------------------

/// Precomputed radio quantities for every (device, position) pair.
struct ChannelTable {
  int n = 0;
  int m = 0;
  Grid<double> dist_m;
  Grid<double> pathloss_db;
  Grid<double> rate_bps;
  Grid<double> gain;
};

inline ChannelTable build_channel_table(const Scenario& s) {
  const int n = s.n();
  const int m = s.m();
  ChannelTable t;
  t.n = n;
  t.m = m;
  t.dist_m = Grid<double>(n, m);
  t.pathloss_db = Grid<double>(n, m);
  t.rate_bps = Grid<double>(n, m);
  t.gain = Grid<double>(n, m);

  const PhysicsConfig& p = s.physics;
  const double lfs = free_space_pathloss_db(p.carrier_hz);
  for (int i = 0; i < n; ++i) {
    const Device& dev = s.devices[i];
    for (int j = 0; j < m; ++j) {
      const Vec2& q = s.positions[j].position;
      const double d = distance_m(dev.position, q, p.altitude_m);
      const double log_dist = lfs + 20.0 * std::log10(d);
      const double pl_los = log_dist + p.eta_los_db;
      const double pl_nlos = log_dist + p.eta_nlos_db;
      const double theta =
          elevation_deg(dev.position, q, p.altitude_m, p.elevation_convention);
      const double p_los = los_probability(theta, p.los_a, p.los_b);
      const double pathloss = average_pathloss_db(p_los, pl_los, pl_nlos);
      t.dist_m(i, j) = d;
      t.pathloss_db(i, j) = pathloss;
      t.rate_bps(i, j) = uplink_rate_bps(dev.uplink_power_w, p.noise_power_w,
                                         pathloss, p.bandwidth_hz);
      t.gain(i, j) = channel_gain(p.ref_gain, d);
    }
  }
  return t;
}

inline void dump_channel_csv(const ChannelTable& t, std::ostream& out) {
  out << "device,position,dist_m,pathloss_db,rate_bps,gain\n";
  for (int i = 0; i < t.n; ++i)
    for (int j = 0; j < t.m; ++j)
      out << i << ',' << j << ',' << fmt_g12(t.dist_m(i, j)) << ','
          << fmt_g12(t.pathloss_db(i, j)) << ',' << fmt_g12(t.rate_bps(i, j))
          << ',' << fmt_g12(t.gain(i, j)) << '\n';
}

}  // namespace gjra
