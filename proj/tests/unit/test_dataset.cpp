#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "epds/dataset.hpp"
#include "epds/energy.hpp"
#include "epds/error.hpp"

using namespace epds;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "epds_dataset_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<FlightRecord> vbat_records(std::initializer_list<double> volts) {
  std::vector<FlightRecord> out;
  std::int64_t t = 0;
  for (double v : volts) {
    FlightRecord r;
    r.t_ms = t;
    r.vbat = v;
    t += 100;
    out.push_back(r);
  }
  return out;
}

ErrorCode load_error(const fs::path& p) {
  try {
    load_flight_log(p);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

std::vector<FlightRecord> quiet_flight(double wind_kmh, std::uint64_t seed, double noise = 0.05) {
  FlightConfig fc;
  fc.wind = {wind_kmh, wind_kmh > 0 ? WindDirection::E : WindDirection::None};
  fc.heading = Eigen::Vector3d::UnitX();  // straight into an east wind
  fc.length_cm = 200;
  fc.speed_cm_s = 4;
  fc.seed = seed;
  return synthesize_flights(fc, DischargeModel::calibrated(140, 6, 7.14, noise));
}

}  // namespace

TEST(FlightLog, RoundTripsThreeRows) {
  auto recs = vbat_records({4.1, 4.0, 3.9});
  recs[1].loc = "N1";
  recs[2].wind_direction = WindDirection::S;
  const auto p = temp_file("three.csv");
  write_flight_log(p, recs);
  const auto back = load_flight_log(p);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[1].loc, "N1");
  EXPECT_EQ(back[2].wind_direction, WindDirection::S);
  EXPECT_EQ(back[2].vbat, 3.9);
}

TEST(FlightLog, MissingColumnIsSchemaMismatch) {
  const auto p = temp_file("novbat.csv");
  std::ofstream(p) << "t,es_x,es_y,es_z,roll,pitch,yaw,wind_speed,wind_direction,wind_angle,dis,"
                      "loc_role,drone_id,loc\n0,0,0,0,0,0,0,0,None,0,0,Start,0,S\n";
  EXPECT_EQ(load_error(p), ErrorCode::SchemaMismatch);
}

TEST(FlightLog, DuplicateTimestampRejected) {
  auto recs = vbat_records({4.1, 4.0, 3.9});
  recs[2].t_ms = recs[1].t_ms;
  const auto p = temp_file("dup.csv");
  write_flight_log(p, recs);
  EXPECT_EQ(load_error(p), ErrorCode::NonMonotoneTimestamps);
}

TEST(FlightLog, SplitsOnTimestampReset) {
  auto a = vbat_records({4.1, 4.0});
  const auto b = vbat_records({4.1, 4.0, 3.9});
  a.insert(a.end(), b.begin(), b.end());
  const auto flights = split_flights(a);
  ASSERT_EQ(flights.size(), 2u);
  EXPECT_EQ(flights[1].size(), 3u);
}

TEST(Preprocess, VbatMinMaxEndpoints) {
  const auto recs = vbat_records({4.15, 3.95, 3.75});
  const auto p = preprocess(recs, FeatureSelection::vbat_only());
  ASSERT_EQ(p.inputs.cols(), 1);
  EXPECT_NEAR(p.inputs(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(p.inputs(1, 0), 0.5, 1e-12);
  EXPECT_NEAR(p.inputs(2, 0), 0.0, 1e-12);
}

TEST(Preprocess, ConstantColumnScalesToZero) {
  const auto recs = vbat_records({4.1, 4.0, 3.9});
  const auto p = preprocess(recs, FeatureSelection::all_features());
  EXPECT_TRUE(p.inputs.col(0).isZero());  // es_x is constant
}

TEST(Preprocess, DropsOutOfRangeRowsAndFailsWhenNoneSurvive) {
  const auto recs = vbat_records({4.1, 9.0, 3.9});
  const auto p = preprocess(recs, FeatureSelection::vbat_only());
  EXPECT_EQ(p.kept_rows, (std::vector<std::size_t>{0, 2}));
  try {
    preprocess(vbat_records({9.0}), FeatureSelection::vbat_only());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllRowsDropped);
  }
}

TEST(Preprocess, InverseScalingIsIdentity) {
  const auto recs = quiet_flight(6.1, 4);
  const auto p = preprocess(recs, FeatureSelection::all_features());
  const Eigen::MatrixXd back = p.encoder.scaler.inverse_transform(p.scaled);
  for (std::size_t i = 0; i < p.kept_rows.size(); ++i) {
    const Eigen::RowVectorXd raw = raw_features(recs[p.kept_rows[i]]);
    EXPECT_LT((back.row(static_cast<Eigen::Index>(i)) - raw).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Pca, RecoversRankTwoData) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  Eigen::MatrixXd basis(2, 6);
  for (Eigen::Index i = 0; i < basis.size(); ++i) basis(i) = g(rng);
  Eigen::MatrixXd scores(50, 2);
  for (Eigen::Index i = 0; i < scores.size(); ++i) scores(i) = g(rng);
  Eigen::RowVectorXd offset(6);
  offset << 1, 2, 3, 4, 5, 6;
  const Eigen::MatrixXd x = (scores * basis).rowwise() + offset;
  const auto pca = Pca::fit(x, 2);
  const Eigen::MatrixXd back = pca.inverse_transform(pca.transform(x));
  EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Pca, ComponentsAreOrthonormal) {
  const auto recs = quiet_flight(7.6, 2);
  const auto p = preprocess(recs, FeatureSelection::pca(4));
  const auto& c = p.encoder.pca->components;
  const Eigen::MatrixXd gram = c.transpose() * c;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Pack, WindowCountFollowsSlidingFormula) {
  const Eigen::MatrixXd x = Eigen::VectorXd::LinSpaced(100, 0, 99);
  const Eigen::VectorXd y = x.col(0);
  // floor((100 - 50) / 25) + 1 windows start at rows 0, 25 and 50.
  const auto packed = pack_sequences(x, y, 25, 25, 25);
  EXPECT_EQ(packed.size(), 3u);
}

TEST(Pack, TooShortInput) {
  const Eigen::MatrixXd x = Eigen::VectorXd::Zero(49);
  try {
    pack_sequences(x, x.col(0), 25, 25, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SequenceTooShort);
  }
}

TEST(Pack, WindowsReproduceIndexArithmetic) {
  const Eigen::MatrixXd x = Eigen::VectorXd::LinSpaced(237, 0, 236);
  const int len_in = 13, len_pred = 7, stride = 4;
  const auto packed = pack_sequences(x, x.col(0), len_in, len_pred, stride);
  ASSERT_EQ(packed.size(), static_cast<std::size_t>((237 - len_in - len_pred) / stride + 1));
  for (std::size_t k = 0; k < packed.size(); ++k) {
    const auto s = static_cast<double>(k * stride);
    EXPECT_EQ(packed.first_rows[k], k * stride);
    for (int i = 0; i < len_in; ++i) EXPECT_EQ(packed.inputs[k](i, 0), s + i);
    for (int j = 0; j < len_pred; ++j) EXPECT_EQ(packed.targets[k](j), s + len_in + j);
  }
}

TEST(Pack, WindowsNeverCrossFlights) {
  const Eigen::MatrixXd x = Eigen::VectorXd::LinSpaced(60, 0, 59);
  std::vector<int> flight(60, 0);
  std::fill(flight.begin() + 30, flight.end(), 1);
  const auto packed = pack_sequences(x, x.col(0), flight, 10, 10, 1);
  EXPECT_EQ(packed.size(), 2u * 11u);
  for (auto r : packed.first_rows) EXPECT_TRUE(r + 20 <= 30 || r >= 30);
}

TEST(Augment, Examples) {
  const std::vector<SegmentEnergy> lib{{{1, 0, 0}, 100, 12.0}, {{0, 1, 0}, 100, 30.0}};
  EXPECT_DOUBLE_EQ(augment_segment_energy(lib, {1, 0, 0}, 100), 12.0);
  EXPECT_DOUBLE_EQ(augment_segment_energy(lib, {0, 1, 0}, 200), 60.0);
  const double a = 10.0 * std::numbers::pi / 180.0;
  EXPECT_DOUBLE_EQ(augment_segment_energy(lib, {std::cos(a), std::sin(a), 0}, 50), 6.0);
}

TEST(Synthesize, NoWindNoNoiseDecaysLinearly) {
  const auto recs = quiet_flight(0.0, 1, 0.0);
  ASSERT_GT(recs.size(), 3u);
  const double step = recs[0].vbat - recs[1].vbat;
  EXPECT_GT(step, 0.0);
  for (std::size_t i = 1; i + 1 < recs.size(); ++i) {
    EXPECT_NEAR(recs[i].vbat - recs[i + 1].vbat, step, 1e-12);
  }
}

TEST(Synthesize, HeadwindLowersFinalVoltage) {
  EXPECT_LT(quiet_flight(7.6, 3).back().vbat, quiet_flight(0.0, 3).back().vbat);
}

TEST(Synthesize, SameSeedIsBitIdentical) {
  const auto a = quiet_flight(6.1, 12), b = quiet_flight(6.1, 12);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].vbat, b[i].vbat);
    EXPECT_EQ(a[i].roll, b[i].roll);
  }
}

TEST(Synthesize, EnergyMonotoneInWindPenalty) {
  const auto map = DischargeModel::calibrated().current_map;
  double prev = 0.0;
  for (double w : {0.0, 6.1, 7.6}) {
    const auto recs = quiet_flight(w, 21);
    std::vector<double> v;
    for (const auto& r : recs) v.push_back(r.vbat);
    const double q = energy_from_voltage_sequence(map, v);
    EXPECT_GE(q, prev);
    prev = q;
  }
}

TEST(Synthesize, StandardPlanCoversWindGrid) {
  const auto plan = standard_flight_plan(70, 2024);
  ASSERT_EQ(plan.size(), 70u);
  int calm = 0;
  for (const auto& f : plan) {
    EXPECT_GE(f.length_cm, 140.0);
    EXPECT_LE(f.length_cm, 300.0);
    EXPECT_GE(f.speed_cm_s, 2.0);
    EXPECT_LE(f.speed_cm_s, 8.0);
    calm += f.wind.direction == WindDirection::None;
  }
  EXPECT_EQ(calm, 10);
}
