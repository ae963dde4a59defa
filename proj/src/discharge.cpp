#include "epds/discharge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "epds/error.hpp"
#include "epds/time.hpp"

namespace epds {

std::string_view to_string(WindDirection d) {
  switch (d) {
    case WindDirection::None: return "None";
    case WindDirection::N: return "N";
    case WindDirection::S: return "S";
    case WindDirection::E: return "E";
  }
  return "None";
}

WindDirection parse_wind_direction(std::string_view s) {
  if (s == "None") return WindDirection::None;
  if (s == "N") return WindDirection::N;
  if (s == "S") return WindDirection::S;
  if (s == "E") return WindDirection::E;
  throw Error(ErrorCode::SchemaMismatch, "unknown wind direction '" + std::string(s) + "'");
}

Eigen::Vector3d WindCondition::source_vector() const {
  switch (direction) {
    case WindDirection::N: return {0.0, 1.0, 0.0};
    case WindDirection::S: return {0.0, -1.0, 0.0};
    case WindDirection::E: return {1.0, 0.0, 0.0};
    case WindDirection::None: break;
  }
  return Eigen::Vector3d::Zero();
}

namespace {
Eigen::Vector3d horizontal_unit(const Eigen::Vector3d& v) {
  Eigen::Vector3d h(v.x(), v.y(), 0.0);
  const double n = h.norm();
  return n > 0.0 ? Eigen::Vector3d(h / n) : Eigen::Vector3d::Zero();
}
}  // namespace

double WindCondition::headwind_factor(const Eigen::Vector3d& heading) const {
  if (direction == WindDirection::None || speed_kmh == 0.0) return 0.0;
  const Eigen::Vector3d h = horizontal_unit(heading);
  if (h.isZero()) return 0.5;
  return 0.5 * (1.0 + h.dot(source_vector()));
}

double WindCondition::relative_angle_deg(const Eigen::Vector3d& heading) const {
  if (direction == WindDirection::None) return 0.0;
  const Eigen::Vector3d h = horizontal_unit(heading);
  if (h.isZero()) return 90.0;
  return std::acos(std::clamp(h.dot(source_vector()), -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

double DischargeModel::capacity() const {
  const double mid = 0.5 * (v_full + v_min);
  return (v_full - v_min) / base_decay * (current_map.slope * mid + current_map.intercept);
}

DischargeModel DischargeModel::calibrated(double segment_cm, double speed_cm_s, double ratio,
                                          double noise, double wind_fraction) {
  DischargeModel m;
  m.noise = noise;
  const double tau = segment_cm / speed_cm_s;
  const double a = m.current_map.slope;
  const double i_full = a * m.v_full + m.current_map.intercept;
  const double i_mid = a * 0.5 * (m.v_full + m.v_min) + m.current_map.intercept;
  // With u = base_decay * tau the segment/capacity ratio condition becomes
  //   u * (i_full - a u / 2) = (v_full - v_min) * i_mid / ratio.
  const double k = (m.v_full - m.v_min) * i_mid / ratio;
  const double qa = -0.5 * a;
  const double u = std::abs(qa) < 1e-15 ? k / i_full
                                        : (-i_full + std::sqrt(i_full * i_full + 4.0 * qa * k)) /
                                              (2.0 * qa);
  m.base_decay = u / tau;
  m.wind_decay_per_kmh = wind_fraction * m.base_decay;
  return m;
}

DischargeProcess::DischargeProcess(const DischargeModel& model, std::uint64_t seed)
    : model_(model), rng_(seed), voltage_(model.v_full) {}

double DischargeProcess::step(double headwind_kmh) {
  const double sample = voltage_;
  consumed_ += current_from_voltage(model_.current_map, sample) * kSampleInterval;
  const double z = model_.noise > 0.0 ? gauss_(rng_) : 0.0;
  const double drop = kSampleInterval * model_.decay_rate(headwind_kmh) * (1.0 + model_.noise * z);
  voltage_ = std::clamp(voltage_ - drop, model_.v_min, model_.v_full);
  return sample;
}

double nominal_energy_per_cm(const DischargeModel& model, double speed_cm_s,
                             double reference_cm) {
  DischargeModel quiet = model;
  quiet.noise = 0.0;
  DischargeProcess p(quiet, 0);
  const Tick ticks = ceil_tick(reference_cm / speed_cm_s);
  for (Tick k = 0; k < ticks; ++k) p.step(0.0);
  return p.consumed() / reference_cm;
}

Eigen::VectorXd noiseless_trace(const DischargeModel& model, double v0, double headwind_kmh,
                                long samples) {
  Eigen::VectorXd out(std::max(0L, samples));
  double v = v0;
  const double drop = kSampleInterval * model.decay_rate(headwind_kmh);
  for (long k = 0; k < samples; ++k) {
    out(k) = v;
    v = std::max(model.v_min, v - drop);
  }
  return out;
}

}  // namespace epds
