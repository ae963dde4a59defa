#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

#include "epds/energy.hpp"

namespace epds {

/// Where the wind blows from, relative to the network frame (+x east, +y north).
enum class WindDirection { None, N, S, E };

std::string_view to_string(WindDirection d);
WindDirection parse_wind_direction(std::string_view s);

struct WindCondition {
  double speed_kmh = 0.0;
  WindDirection direction = WindDirection::None;

  /// Unit vector pointing towards the wind source; zero for None.
  Eigen::Vector3d source_vector() const;
  /// 1 for a pure headwind, 0.5 crosswind, 0 tailwind; 0 without wind.
  double headwind_factor(const Eigen::Vector3d& heading) const;
  /// Angle between heading and the wind source, degrees (0 = headwind).
  double relative_angle_deg(const Eigen::Vector3d& heading) const;
  double headwind_kmh(const Eigen::Vector3d& heading) const {
    return speed_kmh * headwind_factor(heading);
  }
};

/// Wind levels and directions of the indoor test protocol.
inline constexpr double kWindLevels[] = {0.0, 6.1, 7.6};

/// Ground-truth battery behaviour for synthetic flights:
///   dV/dt = -(base_decay + wind_decay_per_kmh * headwind) * (1 + noise * z)
/// with current drawn through a fixed linear voltage -> current map.
struct DischargeModel {
  double v_full = kFullChargeVoltage;
  double v_min = kDefaultMinVoltage;
  double base_decay = 0.009;          // V/s
  double wind_decay_per_kmh = 0.00045;  // V/s per km/h of headwind
  double noise = 0.05;                // relative, per sample
  VoltageCurrentMap current_map{-1.0, 5.6, kDefaultMinVoltage, kFullChargeVoltage};

  double decay_rate(double headwind_kmh) const {
    return base_decay + wind_decay_per_kmh * headwind_kmh;
  }
  /// Energy of a full no-wind discharge from v_full to v_min.
  double capacity() const;

  /// Base decay chosen so that a no-wind flight of segment_cm at speed
  /// cm/s uses capacity / ratio; wind penalty is wind_fraction of the base
  /// decay per km/h.
  static DischargeModel calibrated(double segment_cm = 140.0, double speed_cm_s = 6.0,
                                   double ratio = 7.14, double noise = 0.05,
                                   double wind_fraction = 0.05);
};

/// Stateful per-drone discharge stream. Each step() records the current
/// voltage sample, draws current for one 100 ms tick, then decays.
class DischargeProcess {
 public:
  DischargeProcess(const DischargeModel& model, std::uint64_t seed);

  double voltage() const { return voltage_; }
  /// Ground-truth ampere-seconds drawn since construction.
  double consumed() const { return consumed_; }

  double step(double headwind_kmh);
  void restore_full() { voltage_ = model_.v_full; }

 private:
  DischargeModel model_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_{0.0, 1.0};
  double voltage_;
  double consumed_ = 0.0;
};

/// Ampere-seconds per cm for a noiseless, windless flight at this speed;
/// the nominal energy density used by the planners.
double nominal_energy_per_cm(const DischargeModel& model, double speed_cm_s,
                             double reference_cm = 140.0);

/// Noiseless remaining-segment voltage trace starting at v0, one sample per
/// tick, under a fixed headwind.
Eigen::VectorXd noiseless_trace(const DischargeModel& model, double v0, double headwind_kmh,
                                long samples);

}  // namespace epds
