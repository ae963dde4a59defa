#include "epds/energy.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Dense>

#include "epds/error.hpp"

namespace epds {

namespace {
constexpr double kVoltageSlack = 1e-9;
}

double current_from_voltage(const VoltageCurrentMap& map, double volts) {
  if (volts < map.v_min - kVoltageSlack || volts > map.v_max + kVoltageSlack) {
    throw Error(ErrorCode::OutOfRangeVoltage, std::to_string(volts) + " V");
  }
  return map.slope * volts + map.intercept;
}

double energy_from_voltage_sequence(const VoltageCurrentMap& map, std::span<const double> vbat,
                                    double d_time) {
  if (vbat.empty()) throw Error(ErrorCode::EmptySequence, "voltage sequence is empty");
  if (!(d_time > 0.0)) throw Error(ErrorCode::InvalidArgument, "d_time must be positive");
  double q = 0.0;
  for (double v : vbat) q += current_from_voltage(map, v) * d_time;
  return q;
}

VoltageCurrentMap fit_voltage_current_map(std::span<const double> volts,
                                          std::span<const double> amps) {
  if (volts.size() != amps.size()) {
    throw Error(ErrorCode::LengthMismatch, "voltage and current traces differ in length");
  }
  if (volts.size() < 2) throw Error(ErrorCode::EmptySequence, "need at least two samples");
  const auto n = static_cast<Eigen::Index>(volts.size());
  Eigen::MatrixX2d design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = volts[static_cast<std::size_t>(i)];
    design(i, 1) = 1.0;
    rhs(i) = amps[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  const auto [lo, hi] = std::minmax_element(volts.begin(), volts.end());
  if (!(*hi > *lo)) throw Error(ErrorCode::InvalidArgument, "voltage trace is constant");
  VoltageCurrentMap map;
  map.slope = coef(0);
  map.intercept = coef(1);
  map.v_min = std::min(*lo, kDefaultMinVoltage);
  map.v_max = std::max(*hi, kFullChargeVoltage);
  return map;
}

RechargeProfile RechargeProfile::for_capacity(double capacity, double t_full) {
  if (!(t_full > 0.0) || !(capacity > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "capacity and t_full must be positive");
  }
  return {capacity / t_full, t_full};
}

double recharge_duration(const BatteryState& battery, const RechargeProfile& profile) {
  const double missing = std::max(0.0, battery.capacity - battery.charge);
  return missing / profile.rate;
}

BatteryState discharge(BatteryState battery, double q) {
  battery.charge = std::clamp(battery.charge - q, 0.0, battery.capacity);
  return battery;
}

BatteryState recharge(BatteryState battery, const RechargeProfile& profile, double seconds) {
  battery.charge += profile.rate * seconds;
  // rate * (missing / rate) can land an ulp short of capacity.
  if (battery.charge >= battery.capacity * (1.0 - 1e-12)) {
    battery.charge = battery.capacity;
    battery.voltage = kFullChargeVoltage;
  }
  return battery;
}

}  // namespace epds
