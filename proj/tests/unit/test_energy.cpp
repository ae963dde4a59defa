#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "epds/discharge.hpp"
#include "epds/energy.hpp"
#include "epds/error.hpp"
#include "epds/time.hpp"

using namespace epds;

namespace {

std::vector<double> random_volts(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> v(3.0, 4.15);
  std::vector<double> out(n);
  for (auto& x : out) x = v(rng);
  return out;
}

}  // namespace

TEST(Energy, CurrentFromVoltageExamples) {
  EXPECT_DOUBLE_EQ(current_from_voltage({0.0, 1.0}, 3.7), 1.0);
  const VoltageCurrentMap m{-1.2, 6.0};
  EXPECT_DOUBLE_EQ(current_from_voltage(m, 4.15), -1.2 * 4.15 + 6.0);
}

TEST(Energy, CurrentOutsideOperatingRangeThrows) {
  try {
    current_from_voltage({-1.0, 5.6}, 4.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfRangeVoltage);
  }
}

TEST(Energy, FitRecoversGeneratorMap) {
  const auto model = DischargeModel::calibrated();
  DischargeProcess p(model, 9);
  std::vector<double> v, i;
  for (int k = 0; k < 3000; ++k) {
    const double s = p.step(4.0);
    v.push_back(s);
    i.push_back(current_from_voltage(model.current_map, s));
  }
  const auto fit = fit_voltage_current_map(v, i);
  for (double volts : {3.2, 3.7, 4.1}) {
    const double truth = current_from_voltage(model.current_map, volts);
    EXPECT_NEAR(current_from_voltage(fit, volts), truth, 1e-6 * std::abs(truth));
  }
}

TEST(Energy, IntegrationExamples) {
  const std::vector<double> ten(10, 3.5);
  EXPECT_DOUBLE_EQ(energy_from_voltage_sequence({0.0, 1.0}, ten, 0.1), 1.0);
  try {
    energy_from_voltage_sequence({0.0, 1.0}, {}, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySequence);
  }
}

TEST(Energy, IntegrationMatchesExtendedPrecisionOracle) {
  const VoltageCurrentMap map{-1.0, 5.6};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto v = random_volts(5000, seed);
    long double oracle = 0.0L;
    for (double x : v) oracle += (static_cast<long double>(map.slope) * x + map.intercept) * 0.1L;
    const double q = energy_from_voltage_sequence(map, v);
    EXPECT_NEAR(q, static_cast<double>(oracle), 1e-9 * std::abs(static_cast<double>(oracle)));
  }
}

TEST(Energy, IntegrationIsAdditive) {
  const VoltageCurrentMap map{-1.0, 5.6};
  const auto a = random_volts(700, 1), b = random_volts(333, 2);
  std::vector<double> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const double whole = energy_from_voltage_sequence(map, ab);
  const double parts = energy_from_voltage_sequence(map, a) + energy_from_voltage_sequence(map, b);
  EXPECT_NEAR(whole, parts, 1e-12 * whole);
}

TEST(Energy, RechargeDurationExamples) {
  const auto profile = RechargeProfile::for_capacity(1000.0, 150.0);
  BatteryState b = BatteryState::full(1000.0);
  EXPECT_DOUBLE_EQ(recharge_duration(b, profile), 0.0);
  b.charge = 0.0;
  EXPECT_DOUBLE_EQ(recharge_duration(b, profile), 150.0);
  b.charge = 500.0;
  EXPECT_DOUBLE_EQ(recharge_duration(b, profile), 75.0);
}

TEST(Energy, RechargeDurationMonotoneAndNonNegative) {
  const auto profile = RechargeProfile::for_capacity(730.0, 90.0);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 100; ++k) {
    BatteryState b = BatteryState::full(730.0);
    b.charge = 7.3 * k;
    const double d = recharge_duration(b, profile);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, prev);
    prev = d;
  }
}

TEST(Energy, DischargeRechargeRoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> q(0.0, 1200.0), cap(100.0, 1000.0), tf(50, 150);
  for (int k = 0; k < 200; ++k) {
    const double c = cap(rng);
    const auto profile = RechargeProfile::for_capacity(c, tf(rng));
    const auto drained = discharge(BatteryState::full(c), q(rng));
    const auto back = recharge(drained, profile, recharge_duration(drained, profile));
    EXPECT_EQ(back.charge, c);
  }
}

TEST(Discharge, CalibrationMatchesSegmentRatio) {
  auto model = DischargeModel::calibrated(140.0, 6.0, 7.14, 0.0);
  DischargeProcess p(model, 0);
  const Tick ticks = ceil_tick(140.0 / 6.0);
  EXPECT_EQ(ticks, 234);
  for (Tick k = 0; k < ticks; ++k) p.step(0.0);
  EXPECT_NEAR(model.capacity() / p.consumed(), 7.14, 0.05);
}

TEST(Discharge, HeadwindFactorByDirection) {
  const WindCondition north{6.1, WindDirection::N};
  EXPECT_NEAR(north.headwind_factor({0, 1, 0}), 1.0, 1e-12);   // flying into it
  EXPECT_NEAR(north.headwind_factor({0, -1, 0}), 0.0, 1e-12);  // tailwind
  EXPECT_NEAR(north.headwind_factor({1, 0, 0}), 0.5, 1e-12);
  EXPECT_EQ(WindCondition{}.headwind_factor({1, 0, 0}), 0.0);
}

TEST(Discharge, ProcessIsDeterministicPerSeed) {
  const auto model = DischargeModel::calibrated();
  DischargeProcess a(model, 77), b(model, 77);
  for (int k = 0; k < 500; ++k) ASSERT_EQ(a.step(3.0), b.step(3.0));
  EXPECT_EQ(a.consumed(), b.consumed());
}

TEST(Discharge, ConsumedEqualsIntegratedTrace) {
  const auto model = DischargeModel::calibrated();
  DischargeProcess p(model, 3);
  std::vector<double> trace;
  for (int k = 0; k < 400; ++k) trace.push_back(p.step(7.6));
  EXPECT_NEAR(energy_from_voltage_sequence(model.current_map, trace), p.consumed(),
              1e-12 * p.consumed());
}
