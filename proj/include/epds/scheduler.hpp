#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "epds/energy.hpp"
#include "epds/routing.hpp"
#include "epds/skyway.hpp"
#include "epds/time.hpp"

namespace epds {

struct DeliveryRequest {
  NodeId src = 0;
  NodeId dest = 0;
  double payload = 0.0;      // grams, carried as metadata
  double submit_time = 0.0;  // seconds
};

/// One segment flight of a composite plan. Times are estimates until the
/// drone actually flies the segment.
struct EpdsSegment {
  int id = 0;
  NodeId from = 0;
  NodeId to = 0;
  double t_src = 0.0;     // takeoff
  double t_flight = 0.0;  // tick-quantised D / V
  double t_des = 0.0;     // landing
  bool scheduled = false;
  std::vector<double> vbat_trace;
};

struct CompositePlan {
  int id = 0;
  std::vector<EpdsSegment> segments;
  DeliveryRequest request;
  int priority_rank = 0;  // 1 = highest

  std::vector<NodeId> path() const;
  /// Nodes where the drone lands to recharge (every node but the endpoints).
  std::vector<NodeId> recharge_nodes() const;
};

struct CongestionEvent {
  std::vector<int> requests;  // plan ids
  NodeId shared_node = 0;
  std::map<int, double> predictions;  // plan id -> predicted A.s
  double t_c = 0.0;                   // full recharge time
};

/// Flight ticks for a segment: the first tick at which the travelled
/// distance reaches the segment length.
Tick flight_ticks(double distance_cm, double speed_cm_s);
inline double flight_time(double distance_cm, double speed_cm_s) {
  return seconds(flight_ticks(distance_cm, speed_cm_s));
}

struct Composition {
  std::vector<CompositePlan> plans;  // FCFS order
  std::vector<CongestionEvent> congestion;
};

/// Plans every request, fills nominal no-wait segment times (nominal
/// recharge at each intermediate node), ranks FCFS and records the nodes
/// shared by two or more plans. Only the top-ranked plan is marked
/// scheduled; the rest stay pending until the simulation times them.
Composition initial_composition(std::span<const DeliveryRequest> requests,
                                const SkywayNetwork& net, const EdgeCostModel& model,
                                double t_full, Algorithm algorithm = Algorithm::EpdsHeuristic,
                                const PlanOptions& options = {});

/// Estimated arrival of the plan at node (its landing there), if on path.
std::optional<double> estimated_arrival(const CompositePlan& plan, NodeId node);

/// Stable FCFS order: estimated arrival at the first recharge node the plan
/// shares with another plan (its final landing when it shares none), then
/// submit time, then plan id. Assigns priority_rank 1..n.
std::vector<CompositePlan> fcfs_rank(std::vector<CompositePlan> plans);

/// Fires once, at the first progress sample >= threshold.
class PredictionTrigger {
 public:
  explicit PredictionTrigger(double threshold = 0.2) : threshold_(threshold) {}
  bool operator()(double progress_fraction);
  bool fired() const { return fired_; }
  void reset() { fired_ = false; }

 private:
  double threshold_;
  bool fired_ = false;
};

/// Earliest takeoff towards next so that landing finds a pad free for
/// duration seconds; never before now or ready.
double takeoff_time(const Node& next, double now, double ready, double t_flight, double duration);

struct WaitingPlan {
  int plan_id = 0;
  NodeId next = 0;
  double ready = 0.0;
  double t_flight = 0.0;
};

struct Retime {
  int plan_id = 0;
  double takeoff = 0.0;
};

struct OptimizeResult {
  std::optional<ReservationWindow> window;  // none when no recharge is predicted
  double predicted_charge = 0.0;
  double recharge_s = 0.0;
  std::vector<Retime> retimes;
};

/// The predictive step at a drone's trigger point: estimate its charge on
/// arrival, reserve a PredRecharging window at the next node from the
/// predicted arrival, and re-time the waiting plans headed to that node.
/// Recharge durations are rounded up to whole ticks.
OptimizeResult optimize_step(Node& next, DroneId drone, double predicted_arrival, double ecp,
                             const BatteryState& battery, const RechargeProfile& profile,
                             std::span<const WaitingPlan> waiting, double now);

/// Per-node first-come first-served queues of recharge visits, keyed by
/// nominal arrival. A visit may depart towards its node once every visit
/// ahead of it is resolved (holds or has used a window there).
class FcfsQueues {
 public:
  explicit FcfsQueues(std::span<const CompositePlan> plans);

  bool clear_ahead(NodeId node, int plan_id) const;
  void resolve(NodeId node, int plan_id);
  bool resolved(NodeId node, int plan_id) const;
  /// Plan ids queued at node, front first.
  std::vector<int> order(NodeId node) const;

 private:
  struct Visit {
    double arrival;
    double submit;
    int plan_id;
    bool resolved = false;
  };
  std::map<NodeId, std::vector<Visit>> queues_;
};

}  // namespace epds
