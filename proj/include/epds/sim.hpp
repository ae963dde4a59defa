#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epds/discharge.hpp"
#include "epds/ecp.hpp"
#include "epds/routing.hpp"
#include "epds/scheduler.hpp"
#include "epds/skyway.hpp"
#include "epds/time.hpp"

namespace epds {

enum class Mode { NoPredBellmanFord, NoPredDijkstra, NoPredAStar, Predictive };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);
Algorithm planner_for(Mode m);
inline bool is_predictive(Mode m) { return m == Mode::Predictive; }

enum class EventKind {
  RequestSubmitted,
  Takeoff,
  SampleTick,
  PredictionReady,
  Arrival,
  RechargeStart,
  RechargeComplete,
};

std::string_view to_string(EventKind k);
EventKind parse_event_kind(std::string_view s);

enum class Phase { Pending, Waiting, Flying, Hovering, Recharging, Done };

struct LogEntry {
  Tick time = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::RequestSubmitted;
  DroneId drone = 0;
  NodeId node = 0;
  std::string detail;

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct SimConfig {
  double speed = 4.0;  // cm/s
  double t_full = kDefaultFullRechargeTime;
  double trigger_fraction = 0.2;
  DischargeModel battery = DischargeModel::calibrated();
  WindCondition wind;
  PlanOptions plan_options;
  /// Verify pad exclusivity after every calendar mutation (throws on violation).
  bool check_invariants = false;
  bool log_samples = true;
  std::size_t max_events = 50'000'000;
};

/// Per-drone outcome. Tick counts partition the delivery time.
struct DroneReport {
  DroneId id = 0;
  int plan_id = 0;
  Tick submit = 0;
  Tick first_takeoff = 0;
  Tick landed = 0;
  Tick waiting = 0;
  Tick flight = 0;
  Tick hovering = 0;
  Tick recharging = 0;
  double consumed = 0.0;  // ground-truth A.s drawn over the whole delivery
  std::vector<double> vbat;  // every sample, flight and hover, in order

  double delivery_s() const { return seconds(landed - submit); }
  double flight_span_s() const { return seconds(landed - first_takeoff); }
};

struct Metrics {
  std::string label;  // sweep point, set by the caller
  std::string mode;
  std::uint64_t seed = 0;
  std::size_t n_drones = 0;
  std::size_t n_nodes = 0;
  double speed = 0.0;
  double t_full = 0.0;
  double avg_delivery_s = 0.0;     // submit to final landing
  double avg_flight_span_s = 0.0;  // first takeoff to final landing
  double avg_exec_ms = 0.0;        // wall clock of planning + scheduling per request
  std::size_t hovers = 0;          // arrivals that had to wait airborne
  std::size_t shifts = 0;          // windows moved by late commits
};

struct RunResult {
  Metrics metrics;
  std::vector<DroneReport> drones;
  std::vector<LogEntry> log;
  std::vector<CompositePlan> plans;  // with actual segment times and traces
  std::vector<CongestionEvent> congestion;
  std::size_t events = 0;
};

/// Runs every request to delivery. One drone per request, starting fully
/// charged at its source; it recharges to full at every intermediate node.
/// Predictive mode reserves pads at the trigger point using predictor (an
/// unbiased oracle when none is given); the other modes reserve on arrival.
/// The network's calendars are used as scratch and cleared first.
RunResult run(SkywayNetwork net, std::span<const DeliveryRequest> requests, Mode mode,
              std::uint64_t seed, const SimConfig& config, EnergyPredictor* predictor = nullptr);

// Event log and metrics I/O ---------------------------------------------------

std::string format_seconds(Tick t);
void write_event_log(std::ostream& out, std::span<const LogEntry> log);
std::vector<LogEntry> read_event_log(std::istream& in);

/// Recomputes the delivery metrics (all but execution time) from a log.
Metrics replay_metrics(std::span<const LogEntry> log);

inline constexpr std::string_view kMetricsHeader =
    "label,mode,seed,n_drones,n_nodes,speed,recharge_time,avg_delivery_s,avg_exec_ms,"
    "avg_flight_span_s,hovers,shifts";
void write_metrics_row(std::ostream& out, const Metrics& m);

// Scenarios ---------------------------------------------------------------------

struct Scenario {
  std::vector<NodeSpec> nodes;
  std::optional<EdgeList> edges;  // fully connected when absent
  int pad_count = 1;
  std::vector<DeliveryRequest> requests;
};

SkywayNetwork build_network(const Scenario& s);

/// Seeded member of a scenario family: submit times jittered by up to
/// max_jitter_s (whole ticks) and a wind condition drawn from the test grid.
struct ScenarioVariant {
  std::vector<DeliveryRequest> requests;
  WindCondition wind;
};
ScenarioVariant scenario_variant(const Scenario& base, std::uint64_t seed,
                                 double max_jitter_s = 2.0);

/// Random range-limited network with n_drones requests between distinct
/// random nodes, submitted within the first submit_window_s seconds.
Scenario random_scenario(std::size_t n_nodes, std::size_t n_drones, std::uint64_t seed,
                         double extent_cm = 400.0, double max_range_cm = 150.0,
                         double submit_window_s = 60.0);

}  // namespace epds
