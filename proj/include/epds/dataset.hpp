#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "epds/discharge.hpp"
#include "epds/skyway.hpp"

namespace epds {

enum class LocRole { Start, Fly, Destination };

std::string_view to_string(LocRole r);

/// One 100 ms flight-log sample.
struct FlightRecord {
  std::int64_t t_ms = 0;
  double es_x = 0.0, es_y = 0.0, es_z = 0.0;  // cm
  double roll = 0.0, pitch = 0.0, yaw = 0.0;  // degrees
  double vbat = 0.0;                          // volts
  double wind_speed = 0.0;                    // km/h
  WindDirection wind_direction = WindDirection::None;
  double wind_angle = 0.0;  // degrees relative to heading
  double dis = 0.0;         // cm travelled
  LocRole loc_role = LocRole::Fly;
  DroneId drone_id = 0;
  std::string loc;
};

/// CSV header of the flight-log format, in FlightRecord field order.
inline constexpr std::array<std::string_view, 15> kFlightLogColumns = {
    "t",   "es_x",       "es_y",           "es_z",       "roll", "pitch",    "yaw", "vbat",
    "wind_speed", "wind_direction", "wind_angle", "dis", "loc_role", "drone_id", "loc"};

std::vector<FlightRecord> load_flight_log(const std::filesystem::path& path);
void write_flight_log(const std::filesystem::path& path, std::span<const FlightRecord> records);

/// Split a record stream into flights: a new flight starts whenever the
/// timestamp resets to zero or the drone id changes.
std::vector<std::vector<FlightRecord>> split_flights(std::span<const FlightRecord> records);

// Feature selection and preprocessing ---------------------------------------

/// Numeric feature-set columns in the order the model sees them.
inline constexpr std::array<std::string_view, 11> kFeatureNames = {
    "es_x", "es_y", "es_z", "roll", "pitch", "yaw", "vbat", "wind_speed", "wind_angle", "dis",
    "loc_role"};
inline constexpr Eigen::Index kVbatColumn = 6;

Eigen::RowVectorXd raw_features(const FlightRecord& r);

enum class FeatureStrategy { VbatOnly, AllFeatures, AllFeaturesPca };

struct FeatureSelection {
  FeatureStrategy strategy = FeatureStrategy::VbatOnly;
  int components = 0;  // PCA only

  static FeatureSelection vbat_only() { return {FeatureStrategy::VbatOnly, 0}; }
  static FeatureSelection all_features() { return {FeatureStrategy::AllFeatures, 0}; }
  static FeatureSelection pca(int k) { return {FeatureStrategy::AllFeaturesPca, k}; }

  std::string name() const;  // "vbat", "all", "pca3"
  static FeatureSelection parse(std::string_view s);
};

/// Column-wise min-max scaling to [0, 1]; zero-range columns map to 0.
struct MinMaxScaler {
  Eigen::RowVectorXd min;
  Eigen::RowVectorXd max;

  static MinMaxScaler fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& scaled) const;
  double scale(double value, Eigen::Index column) const;
  double unscale(double scaled, Eigen::Index column) const;
};

/// Principal components of centred data; `components` has orthonormal columns.
struct Pca {
  Eigen::RowVectorXd mean;
  Eigen::MatrixXd components;       // d x k
  Eigen::VectorXd explained;        // k leading eigenvalues, descending

  static Pca fit(const Eigen::MatrixXd& x, int k);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& scores) const;
};

/// Maps scaled feature-set rows to model input rows for one selection.
struct FeatureEncoder {
  FeatureSelection selection;
  MinMaxScaler scaler;  // over all kFeatureNames columns
  std::optional<Pca> pca;

  Eigen::Index input_size() const;
  std::vector<std::string> input_names() const;
  /// Index of the vbat channel in the encoded row, when the encoding keeps one.
  std::optional<Eigen::Index> vbat_channel() const;
  Eigen::MatrixXd encode(const Eigen::MatrixXd& scaled_rows) const;
  double scale_vbat(double volts) const { return scaler.scale(volts, kVbatColumn); }
  double unscale_vbat(double scaled) const { return scaler.unscale(scaled, kVbatColumn); }
};

struct CleaningRules {
  double v_min = kDefaultMinVoltage;
  double v_max = kFullChargeVoltage;
};

struct Preprocessed {
  Eigen::MatrixXd scaled;    // kept rows x all features, in [0, 1]
  Eigen::MatrixXd inputs;    // kept rows x encoder.input_size()
  Eigen::VectorXd target;    // scaled vbat per kept row
  std::vector<std::size_t> kept_rows;   // index into the input records
  std::vector<int> flight_of_row;       // flight index of each kept row
  FeatureEncoder encoder;
};

/// Clean, min-max normalise and encode. The encoder is fitted on these
/// records unless one is supplied (evaluation on held-out flights).
Preprocessed preprocess(std::span<const FlightRecord> records, FeatureSelection selection,
                        const CleaningRules& rules = {},
                        const std::optional<FeatureEncoder>& fitted = std::nullopt);

/// Sliding windows within each flight. Targets are the vbat channel only.
struct PackedSequences {
  int len_in = 0;
  int len_pred = 0;
  std::vector<std::string> feature_names;
  std::vector<Eigen::MatrixXd> inputs;   // len_in x f
  std::vector<Eigen::VectorXd> targets;  // len_pred
  std::vector<std::size_t> first_rows;   // row of each window's first input

  std::size_t size() const { return inputs.size(); }
};

PackedSequences pack_sequences(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& target,
                               std::span<const int> flight_of_row, int len_in, int len_pred,
                               int stride);
/// Single-flight convenience overload.
PackedSequences pack_sequences(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& target,
                               int len_in, int len_pred, int stride);

// Network augmentation -------------------------------------------------------

struct SegmentEnergy {
  Eigen::Vector3d direction;
  double length = 0.0;  // cm
  double ecp = 0.0;     // ampere-seconds
};

/// ECP of the most cosine-similar library segment, scaled by the length ratio.
double augment_segment_energy(std::span<const SegmentEnergy> library,
                              const Eigen::Vector3d& direction, double length);

// Synthetic flights ---------------------------------------------------------

struct FlightConfig {
  WindCondition wind;
  Eigen::Vector3d start = Eigen::Vector3d::Zero();
  Eigen::Vector3d heading = Eigen::Vector3d::UnitX();
  double length_cm = 140.0;
  double speed_cm_s = 6.0;
  std::uint64_t seed = 0;
  DroneId drone_id = 0;
  std::string src = "S";
  std::string dest = "D";
};

/// One segment flight sampled every 100 ms from takeoff to arrival.
std::vector<FlightRecord> synthesize_flights(const FlightConfig& config,
                                             const DischargeModel& model);

/// The 70-flight protocol: wind levels {0, 6.1, 7.6} km/h crossed with
/// directions, random headings, lengths 140-300 cm and speeds 2-8 cm/s.
std::vector<FlightConfig> standard_flight_plan(std::size_t count, std::uint64_t seed);

}  // namespace epds
