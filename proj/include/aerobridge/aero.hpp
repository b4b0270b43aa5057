#pragma once

#include <array>

#include "aerobridge/geometry.hpp"

namespace aerobridge {

inline constexpr double kAirDensity = 1.225;  // kg/m^3, sea level

struct PropellerSpec {
  double diameter = 0.3302;              // m (13 inch)
  double rpm = 5000.0;
  double nominal_thrust = 1200.0;        // gF
  double nominal_output_airflow = 9.6;   // m/s

  bool is_valid() const;
};

struct DownwashSample {
  double delta_thrust = 0.0;    // gF lost by the lower propeller
  double airflow_pos_a = 0.0;   // m/s beneath the lower propeller
  double airflow_pos_b = 0.0;   // m/s between the propellers
  double lateral_push = 0.0;    // N
};

/// Disturbance model gridded over vertical separation and rotor overlap.
///
/// Cells quoted from bench measurements are stored literally; every other
/// cell follows an exponential decay in separation through those anchors.
/// Lookups interpolate bilinearly and reproduce each cell bit-exactly.
class DownwashTable {
 public:
  static constexpr std::array<double, 4> kAltitudes = {0.15, 0.30, 0.45, 0.60};
  static constexpr std::array<double, 3> kOverlaps = {0.0, 50.0, 100.0};
  static constexpr double kMinAltitude = 0.10;

  /// Default lateral push: newtons per m/s of Position-B airflow deficit.
  static constexpr double kDefaultPushCoefficient = 0.05;

  explicit DownwashTable(const PropellerSpec& spec = {},
                         double push_coefficient = kDefaultPushCoefficient);

  const DownwashSample& cell(std::size_t alt_index, std::size_t overlap_index) const {
    return cells_[alt_index][overlap_index];
  }

  /// Overrides one cell. The lateral push is recomputed from its Position-B
  /// airflow; call validate() after a batch of overrides.
  void set_cell(std::size_t alt_index, std::size_t overlap_index, DownwashSample sample);

  double push_coefficient() const { return push_coefficient_; }
  void set_push_coefficient(double coefficient);

  const PropellerSpec& propeller() const { return spec_; }

  /// Throws InvalidArgument when a monotonicity or neutrality invariant fails.
  void validate() const;

  DownwashSample lookup(double alt, double overlap) const;

 private:
  void refresh_push();

  PropellerSpec spec_;
  double push_coefficient_;
  std::array<std::array<DownwashSample, 3>, 4> cells_{};
};

/// Actuator-disc thrust with far-wake closure v_d = v_inf + 2 v_i.
double momentum_thrust(double rho, double area, double v_inf, double v_i);

/// Rotor overlap in percent: 100 at x_d = 0, 50 at 16 cm, 0 from 32 cm for the
/// 13-inch propeller; scales linearly with diameter.
double overlap_from_xd(double x_d, double prop_diameter = 0.3302);

inline DownwashSample downwash_lookup(const DownwashTable& table, double alt, double overlap) {
  return table.lookup(alt, overlap);
}

struct Disturbance {
  Vec3 force = Vec3::Zero();       // N, world frame, includes the thrust deficit
  double thrust_deficit_gf = 0.0;  // gF

  bool is_zero() const { return thrust_deficit_gf == 0.0 && force.isZero(0.0); }
};

/// Downwash acting on the receiver from an EBS flying above it. Beyond the
/// table's last row the sample is attenuated by (0.60 / alt)^2.
Disturbance disturbance_on_receiver(const Pose& ebs_pose, const Pose& rec_pose,
                                    const DownwashTable& table, const PropellerSpec& spec = {});

}  // namespace aerobridge
