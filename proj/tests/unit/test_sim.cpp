#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "epds/config.hpp"
#include "epds/energy.hpp"
#include "epds/error.hpp"
#include "epds/sim.hpp"

using namespace epds;

namespace {

Scenario hub() {
  auto s = load_network_file(EPDS_DATA_DIR "/hub_network.json");
  s.requests = load_requests(EPDS_DATA_DIR "/hub_scenario.json");
  return s;
}

SkywayNetwork pair_network(double length) {
  const std::vector<Position> pts{{0, 0, 0}, {length, 0, 0}};
  return build_network(pts, FullyConnected{});
}

SimConfig quiet(double speed, double t_full = 100.0) {
  SimConfig c;
  c.speed = speed;
  c.t_full = t_full;
  c.check_invariants = true;
  return c;
}

}  // namespace

TEST(Sim, SingleSegmentTakesItsFlightTime) {
  const std::vector<DeliveryRequest> req{{0, 1, 0, 0}};
  for (Mode m : {Mode::NoPredDijkstra, Mode::NoPredAStar, Mode::Predictive}) {
    const auto r = run(pair_network(140), req, m, 1, quiet(6));
    ASSERT_EQ(r.drones.size(), 1u);
    EXPECT_EQ(r.drones[0].landed, 234) << to_string(m);
    EXPECT_EQ(r.drones[0].waiting, 0);
    EXPECT_EQ(r.drones[0].recharging, 0);
    EXPECT_DOUBLE_EQ(r.metrics.avg_delivery_s, 23.4);
  }
}

TEST(Sim, SubmitTimeOffsetsDelivery) {
  const std::vector<DeliveryRequest> req{{0, 1, 0, 12.5}};
  const auto r = run(pair_network(100), req, Mode::NoPredDijkstra, 1, quiet(10));
  EXPECT_EQ(r.drones[0].landed, 125 + 100);
  EXPECT_DOUBLE_EQ(r.drones[0].delivery_s(), 10.0);
}

TEST(Sim, TickCountsPartitionDelivery) {
  const auto s = hub();
  const auto r = run(build_network(s), s.requests, Mode::NoPredAStar, 3, quiet(4));
  for (const auto& d : r.drones) {
    EXPECT_EQ(d.landed - d.submit, d.waiting + d.flight + d.hovering + d.recharging) << d.id;
  }
}

TEST(Sim, PredictiveReleasesTheSecondDroneEarlier) {
  auto s = hub();
  s.requests.resize(2);
  const auto net = build_network(s);
  const auto a = run(net, s.requests, Mode::NoPredAStar, 1, quiet(4));
  const auto p = run(net, s.requests, Mode::Predictive, 1, quiet(4));
  Tick wait_a = 0, wait_p = 0;
  for (const auto& d : a.drones) wait_a += d.waiting;
  for (const auto& d : p.drones) wait_p += d.waiting;
  EXPECT_GT(wait_a, 0);
  EXPECT_LT(wait_p, wait_a);
  EXPECT_EQ(p.metrics.hovers, 0u);
  EXPECT_LT(p.metrics.avg_delivery_s, a.metrics.avg_delivery_s);
}

TEST(Sim, SameSeedGivesIdenticalLog) {
  const auto s = hub();
  const auto net = build_network(s);
  for (Mode m : {Mode::NoPredBellmanFord, Mode::Predictive}) {
    const auto a = run(net, s.requests, m, 9, quiet(4));
    const auto b = run(net, s.requests, m, 9, quiet(4));
    EXPECT_EQ(a.log, b.log);
    EXPECT_EQ(a.metrics.avg_delivery_s, b.metrics.avg_delivery_s);
  }
}

TEST(Sim, LogRoundTripsAndReplaysMetrics) {
  const auto s = hub();
  const auto r = run(build_network(s), s.requests, Mode::Predictive, 4, quiet(4, 75));
  std::stringstream ss;
  write_event_log(ss, r.log);
  const auto back = read_event_log(ss);
  EXPECT_EQ(back, r.log);
  const auto m = replay_metrics(back);
  EXPECT_EQ(m.n_drones, r.metrics.n_drones);
  EXPECT_NEAR(m.avg_delivery_s, r.metrics.avg_delivery_s, 1e-9);
  EXPECT_NEAR(m.avg_flight_span_s, r.metrics.avg_flight_span_s, 1e-9);
  EXPECT_EQ(m.hovers, r.metrics.hovers);
  EXPECT_EQ(m.shifts, r.metrics.shifts);
}

TEST(Sim, ConsumedChargeMatchesIntegratedSamples) {
  const auto s = hub();
  const auto net = build_network(s);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto v = scenario_variant(s, seed);
    auto cfg = quiet(4);
    cfg.wind = v.wind;
    for (Mode m : {Mode::NoPredAStar, Mode::Predictive}) {
      const auto r = run(net, v.requests, m, seed, cfg);
      for (const auto& d : r.drones) {
        const double q = energy_from_voltage_sequence(cfg.battery.current_map, d.vbat);
        EXPECT_NEAR(d.consumed, q, 1e-6 * q);
      }
    }
  }
}

TEST(Sim, BiasedPredictorsNeverDoubleBookAPad) {
  const auto sc = random_scenario(12, 20, 5);
  const auto net = build_network(sc);
  for (double bias : {0.5, 0.8, 1.0, 1.3, 2.0}) {
    OraclePredictor pred(quiet(4).battery, bias);
    EXPECT_NO_THROW(run(net, sc.requests, Mode::Predictive, 5, quiet(4), &pred)) << bias;
  }
}

TEST(Sim, DijkstraAndBellmanFordDeliverIdentically) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto sc = random_scenario(15, 10, seed);
    const auto net = build_network(sc);
    const auto d = run(net, sc.requests, Mode::NoPredDijkstra, seed, quiet(6));
    const auto b = run(net, sc.requests, Mode::NoPredBellmanFord, seed, quiet(6));
    ASSERT_EQ(d.drones.size(), b.drones.size());
    for (std::size_t i = 0; i < d.drones.size(); ++i)
      EXPECT_EQ(d.drones[i].landed, b.drones[i].landed) << "seed " << seed;
  }
}

TEST(Sim, MetricsRowMatchesHeader) {
  Metrics m;
  m.label = "base";
  m.mode = "Predictive";
  std::ostringstream out;
  write_metrics_row(out, m);
  const std::string row = out.str();
  EXPECT_EQ(std::count(row.begin(), row.end(), ','),
            std::count(kMetricsHeader.begin(), kMetricsHeader.end(), ','));
}

TEST(Scenario, VariantJitterIsBoundedAndSeeded) {
  const auto s = hub();
  const auto a = scenario_variant(s, 7), b = scenario_variant(s, 7);
  ASSERT_EQ(a.requests.size(), s.requests.size());
  for (std::size_t i = 0; i < a.requests.size(); ++i) {
    EXPECT_EQ(a.requests[i].submit_time, b.requests[i].submit_time);
    EXPECT_GE(a.requests[i].submit_time, 0.0);
    EXPECT_LE(a.requests[i].submit_time, 2.0);
  }
}

TEST(Scenario, ModeNames) {
  for (Mode m : {Mode::NoPredBellmanFord, Mode::NoPredDijkstra, Mode::NoPredAStar, Mode::Predictive})
    EXPECT_EQ(parse_mode(to_string(m)), m);
  EXPECT_THROW(parse_mode("Psychic"), Error);
}

TEST(Sim, RechargeNeverExceedsFullRechargeTime) {
  // A crowded single-pad hub: late drones hover long enough to drain past empty.
  const auto sc = random_scenario(8, 50, 1300);
  auto cfg = quiet(6, 95);
  OraclePredictor pred(cfg.battery, 0.5);
  const auto r = run(build_network(sc), sc.requests, Mode::Predictive, 13, cfg, &pred);
  std::map<DroneId, Tick> started;
  for (const auto& e : r.log) {
    if (e.kind == EventKind::RechargeStart) started[e.drone] = e.time;
    if (e.kind == EventKind::RechargeComplete) EXPECT_LE(e.time - started[e.drone], to_tick(95.0));
  }
}
