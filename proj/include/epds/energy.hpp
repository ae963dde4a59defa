#pragma once

#include <span>

namespace epds {

inline constexpr double kFullChargeVoltage = 4.15;  // volts when fully recharged
inline constexpr double kDefaultMinVoltage = 3.0;
inline constexpr double kDefaultFullRechargeTime = 150.0;  // seconds, 0% -> 100%

/// Linear voltage -> current conversion. Current draw rises as the pack
/// voltage sags, so fitted slopes are normally negative.
struct VoltageCurrentMap {
  double slope = 0.0;      // A / V
  double intercept = 0.0;  // A
  double v_min = kDefaultMinVoltage;
  double v_max = kFullChargeVoltage;
};

/// Throws OutOfRangeVoltage outside [v_min, v_max].
double current_from_voltage(const VoltageCurrentMap& map, double volts);

/// Sum of current * d_time over the samples, accumulated in sample order.
double energy_from_voltage_sequence(const VoltageCurrentMap& map, std::span<const double> vbat,
                                    double d_time = 0.1);

/// Ordinary least squares of current on voltage. Needs two distinct voltages.
VoltageCurrentMap fit_voltage_current_map(std::span<const double> volts,
                                          std::span<const double> amps);

struct BatteryState {
  double voltage = kFullChargeVoltage;
  double charge = 0.0;    // ampere-seconds remaining
  double capacity = 0.0;  // ampere-seconds at full

  static BatteryState full(double capacity) { return {kFullChargeVoltage, capacity, capacity}; }
  double state_of_charge() const { return capacity > 0.0 ? charge / capacity : 0.0; }
};

struct RechargeProfile {
  double rate = 0.0;    // ampere-seconds restored per second
  double t_full = 0.0;  // seconds for an empty pack

  static RechargeProfile for_capacity(double capacity, double t_full);
};

/// Seconds needed to bring the pack back to capacity; zero when full.
double recharge_duration(const BatteryState& battery, const RechargeProfile& profile);

/// Remove q ampere-seconds, clamping at empty.
BatteryState discharge(BatteryState battery, double q);
/// Recharge for the given number of seconds, clamping at capacity.
BatteryState recharge(BatteryState battery, const RechargeProfile& profile, double seconds);

}  // namespace epds
