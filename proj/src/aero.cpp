#include "aerobridge/aero.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "aerobridge/error.hpp"

namespace aerobridge {
namespace {

// Per-row decay fitted so that the 50 % overlap thrust change falls from the
// measured 200 gF at 15 cm to 20 gF at 60 cm.
double decay(double alt) {
  const double rate = std::log(10.0) / (0.60 - 0.15);
  return std::exp(-rate * (alt - 0.15));
}

DownwashSample nominal_sample(const PropellerSpec& spec) {
  return {0.0, spec.nominal_output_airflow, spec.nominal_output_airflow, 0.0};
}

double lerp(double a, double b, double t) { return a == b ? a : (1.0 - t) * a + t * b; }

DownwashSample lerp(const DownwashSample& a, const DownwashSample& b, double t) {
  return {lerp(a.delta_thrust, b.delta_thrust, t), lerp(a.airflow_pos_a, b.airflow_pos_a, t),
          lerp(a.airflow_pos_b, b.airflow_pos_b, t), lerp(a.lateral_push, b.lateral_push, t)};
}

// Finds i and t with value = (1 - t) * grid[i] + t * grid[i + 1]; t is exactly
// 0 on a node.
template <std::size_t N>
void bracket(const std::array<double, N>& grid, double value, std::size_t& i, double& t) {
  if (value <= grid.front()) {
    i = 0;
    t = 0.0;
    return;
  }
  if (value >= grid.back()) {
    i = N - 2;
    t = 1.0;
    return;
  }
  i = 0;
  while (value >= grid[i + 1]) ++i;
  t = (value - grid[i]) / (grid[i + 1] - grid[i]);
}

}  // namespace

bool PropellerSpec::is_valid() const {
  return diameter > 0.0 && rpm > 0.0 && nominal_thrust > 0.0 && nominal_output_airflow > 0.0;
}

DownwashTable::DownwashTable(const PropellerSpec& spec, double push_coefficient)
    : spec_(spec), push_coefficient_(push_coefficient) {
  if (!spec.is_valid()) throw Error(ErrorCode::kInvalidArgument, "propeller spec must be positive");
  const double v0 = spec.nominal_output_airflow;
  for (std::size_t i = 0; i < kAltitudes.size(); ++i) {
    const double d = decay(kAltitudes[i]);
    cells_[i][0] = nominal_sample(spec);
    cells_[i][1] = {200.0 * d, v0 + 2.2 * d, v0 - 2.0 * d, 0.0};
    cells_[i][2] = {350.0 * d, v0 + 4.4 * d, v0 - 4.0 * d, 0.0};
  }
  // Measured anchors at 15 cm: 200 gF at half overlap, 14.0 / 5.6 m/s at full.
  cells_[0][1].delta_thrust = 200.0;
  cells_[0][2].airflow_pos_a = 14.0;
  cells_[0][2].airflow_pos_b = 5.6;
  refresh_push();
}

void DownwashTable::set_cell(std::size_t alt_index, std::size_t overlap_index,
                             DownwashSample sample) {
  if (alt_index >= kAltitudes.size() || overlap_index >= kOverlaps.size()) {
    throw Error(ErrorCode::kOutOfRange, "downwash cell index out of range");
  }
  cells_[alt_index][overlap_index] = sample;
  refresh_push();
}

void DownwashTable::set_push_coefficient(double coefficient) {
  if (!(coefficient >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lateral push coefficient must be >= 0");
  }
  push_coefficient_ = coefficient;
  refresh_push();
}

void DownwashTable::refresh_push() {
  for (auto& row : cells_) {
    for (auto& c : row) {
      c.lateral_push =
          push_coefficient_ * std::max(0.0, spec_.nominal_output_airflow - c.airflow_pos_b);
    }
  }
}

void DownwashTable::validate() const {
  const DownwashSample nominal = nominal_sample(spec_);
  for (std::size_t i = 0; i < kAltitudes.size(); ++i) {
    for (std::size_t j = 0; j < kOverlaps.size(); ++j) {
      const DownwashSample& c = cells_[i][j];
      if (!(c.delta_thrust >= 0.0 && c.airflow_pos_a >= 0.0 && c.airflow_pos_b >= 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "downwash cell has a negative value");
      }
      if (j == 0 && (c.delta_thrust != nominal.delta_thrust ||
                     c.airflow_pos_a != nominal.airflow_pos_a ||
                     c.airflow_pos_b != nominal.airflow_pos_b)) {
        throw Error(ErrorCode::kInvalidArgument, "zero-overlap cells must equal the nominal sample");
      }
      if (i > 0 && c.delta_thrust > cells_[i - 1][j].delta_thrust) {
        throw Error(ErrorCode::kInvalidArgument, "delta_thrust must not increase with separation");
      }
      if (j > 0 && c.delta_thrust < cells_[i][j - 1].delta_thrust) {
        throw Error(ErrorCode::kInvalidArgument, "delta_thrust must not decrease with overlap");
      }
    }
  }
}

DownwashSample DownwashTable::lookup(double alt, double overlap) const {
  if (!(alt >= kMinAltitude)) {
    throw Error(ErrorCode::kOutOfRange,
                "downwash model undefined at separation " + std::to_string(alt) + " m");
  }
  if (!(overlap >= 0.0 && overlap <= 100.0)) {
    throw Error(ErrorCode::kInvalidArgument, "overlap must be within [0, 100] percent");
  }
  std::size_t i = 0, j = 0;
  double ta = 0.0, to = 0.0;
  bracket(kAltitudes, alt, i, ta);
  bracket(kOverlaps, overlap, j, to);
  const DownwashSample lo = lerp(cells_[i][j], cells_[i][j + 1], to);
  const DownwashSample hi = lerp(cells_[i + 1][j], cells_[i + 1][j + 1], to);
  return lerp(lo, hi, ta);
}

double momentum_thrust(double rho, double area, double v_inf, double v_i) {
  if (!(rho > 0.0) || !(area > 0.0)) {
    throw Error(ErrorCode::kNonPositiveGeometry, "air density and disc area must be positive");
  }
  if (!(v_inf >= 0.0) || !(v_i >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "velocities must be non-negative");
  }
  const double mass_flow = rho * area * (v_inf + v_i);
  const double v_far_wake = v_inf + 2.0 * v_i;
  return mass_flow * (v_far_wake - v_inf);
}

double overlap_from_xd(double x_d, double prop_diameter) {
  if (!(x_d >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "x_d must be non-negative");
  if (!(prop_diameter > 0.0)) {
    throw Error(ErrorCode::kNonPositiveGeometry, "propeller diameter must be positive");
  }
  const double no_overlap_at = 0.32 * prop_diameter / 0.3302;
  return std::max(0.0, 100.0 * (1.0 - x_d / no_overlap_at));
}

Disturbance disturbance_on_receiver(const Pose& ebs_pose, const Pose& rec_pose,
                                    const DownwashTable& table, const PropellerSpec& spec) {
  Disturbance out;
  const Vec3 rel = rec_pose.position - ebs_pose.position;
  const double alt = -rel.z();
  if (!(alt > 0.0)) return out;
  const Vec3 horizontal(rel.x(), rel.y(), 0.0);
  const double x_d = horizontal.norm();
  const double overlap = overlap_from_xd(x_d, spec.diameter);
  if (overlap == 0.0) return out;

  const DownwashSample s = table.lookup(std::min(alt, 1.0), overlap);
  const double last_row = DownwashTable::kAltitudes.back();
  const double far = alt > last_row ? (last_row / alt) * (last_row / alt) : 1.0;

  out.thrust_deficit_gf = s.delta_thrust * far;
  out.force = Vec3(0.0, 0.0, -out.thrust_deficit_gf * kGramForce);
  if (x_d > 1e-9) out.force += (s.lateral_push * far / x_d) * horizontal;
  return out;
}

}  // namespace aerobridge
