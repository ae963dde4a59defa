#include "epds/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <tuple>

#include "epds/error.hpp"

namespace epds {

std::vector<NodeId> CompositePlan::path() const {
  std::vector<NodeId> nodes;
  if (segments.empty()) return nodes;
  nodes.push_back(segments.front().from);
  for (const auto& s : segments) nodes.push_back(s.to);
  return nodes;
}

std::vector<NodeId> CompositePlan::recharge_nodes() const {
  std::vector<NodeId> nodes;
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) nodes.push_back(segments[i].to);
  return nodes;
}

Tick flight_ticks(double distance_cm, double speed_cm_s) {
  if (!(distance_cm > 0.0) || !(speed_cm_s > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "segment length and speed must be positive");
  }
  return ceil_tick(distance_cm / speed_cm_s);
}

std::optional<double> estimated_arrival(const CompositePlan& plan, NodeId node) {
  for (const auto& s : plan.segments)
    if (s.to == node) return s.t_des;
  return std::nullopt;
}

namespace {

std::map<NodeId, std::vector<int>> recharge_users(std::span<const CompositePlan> plans) {
  std::map<NodeId, std::vector<int>> users;
  for (const auto& p : plans)
    for (NodeId n : p.recharge_nodes()) users[n].push_back(p.id);
  return users;
}

}  // namespace

std::vector<CompositePlan> fcfs_rank(std::vector<CompositePlan> plans) {
  const auto users = recharge_users(plans);
  auto key = [&](const CompositePlan& p) {
    double arrival = p.segments.empty() ? p.request.submit_time : p.segments.back().t_des;
    for (NodeId n : p.recharge_nodes()) {
      if (users.at(n).size() >= 2) {
        arrival = *estimated_arrival(p, n);
        break;
      }
    }
    return std::make_tuple(arrival, p.request.submit_time, p.id);
  };
  std::stable_sort(plans.begin(), plans.end(),
                   [&](const CompositePlan& a, const CompositePlan& b) { return key(a) < key(b); });
  for (std::size_t i = 0; i < plans.size(); ++i) plans[i].priority_rank = static_cast<int>(i) + 1;
  return plans;
}

Composition initial_composition(std::span<const DeliveryRequest> requests,
                                const SkywayNetwork& net, const EdgeCostModel& model,
                                double t_full, Algorithm algorithm, const PlanOptions& options) {
  Composition out;
  int segment_id = 0;
  for (std::size_t r = 0; r < requests.size(); ++r) {
    const auto& req = requests[r];
    const Path path = plan(algorithm, net, req.src, req.dest, model, options);
    CompositePlan cp;
    cp.id = static_cast<int>(r);
    cp.request = req;
    Tick t = to_tick(req.submit_time);
    for (std::size_t i = 1; i < path.nodes.size(); ++i) {
      EpdsSegment seg;
      seg.id = segment_id++;
      seg.from = path.nodes[i - 1];
      seg.to = path.nodes[i];
      const double d = net.edge_length(seg.from, seg.to);
      const Tick n = flight_ticks(d, model.speed);
      seg.t_src = seconds(t);
      seg.t_flight = seconds(n);
      seg.t_des = seconds(t + n);
      // Nominal full-charge top-up after this hop, if the drone lands to recharge.
      t += n + ceil_tick(model.e0 * d / model.rate_recharge);
      cp.segments.push_back(std::move(seg));
    }
    out.plans.push_back(std::move(cp));
  }
  out.plans = fcfs_rank(std::move(out.plans));
  if (!out.plans.empty()) {
    for (auto& s : out.plans.front().segments) s.scheduled = true;
  }
  for (const auto& [node, ids] : recharge_users(out.plans)) {
    if (ids.size() < 2) continue;
    CongestionEvent ev;
    ev.shared_node = node;
    ev.requests = ids;
    std::sort(ev.requests.begin(), ev.requests.end());
    ev.t_c = t_full;
    out.congestion.push_back(std::move(ev));
  }
  return out;
}

bool PredictionTrigger::operator()(double progress_fraction) {
  if (fired_ || progress_fraction < threshold_) return false;
  fired_ = true;
  return true;
}

double takeoff_time(const Node& next, double now, double ready, double t_flight, double duration) {
  const double earliest = std::max(now, ready);
  if (!(duration > 0.0)) return earliest;
  const double landing = earliest_available(next, earliest + t_flight, duration);
  return std::max(earliest, landing - t_flight);
}

OptimizeResult optimize_step(Node& next, DroneId drone, double predicted_arrival, double ecp,
                             const BatteryState& battery, const RechargeProfile& profile,
                             std::span<const WaitingPlan> waiting, double now) {
  OptimizeResult out;
  const BatteryState at_arrival = discharge(battery, ecp);
  out.predicted_charge = at_arrival.charge;
  out.recharge_s = seconds(ceil_tick(recharge_duration(at_arrival, profile)));
  if (out.recharge_s > 0.0) {
    const double start = earliest_available(next, predicted_arrival, out.recharge_s);
    ReservationWindow w{start, start + out.recharge_s, WindowStatus::PredRecharging, drone};
    reserve(next, w);
    out.window = w;
  }
  for (const auto& wp : waiting) {
    if (wp.next != next.id()) continue;
    out.retimes.push_back(
        {wp.plan_id, takeoff_time(next, now, wp.ready, wp.t_flight, profile.t_full)});
  }
  return out;
}

FcfsQueues::FcfsQueues(std::span<const CompositePlan> plans) {
  for (const auto& p : plans) {
    for (NodeId n : p.recharge_nodes()) {
      queues_[n].push_back({*estimated_arrival(p, n), p.request.submit_time, p.id});
    }
  }
  for (auto& [node, q] : queues_) {
    std::sort(q.begin(), q.end(), [](const Visit& a, const Visit& b) {
      return std::tie(a.arrival, a.submit, a.plan_id) < std::tie(b.arrival, b.submit, b.plan_id);
    });
  }
}

bool FcfsQueues::clear_ahead(NodeId node, int plan_id) const {
  const auto it = queues_.find(node);
  if (it == queues_.end()) return true;
  for (const auto& v : it->second) {
    if (v.plan_id == plan_id) return true;
    if (!v.resolved) return false;
  }
  return true;
}

void FcfsQueues::resolve(NodeId node, int plan_id) {
  const auto it = queues_.find(node);
  if (it == queues_.end()) return;
  for (auto& v : it->second)
    if (v.plan_id == plan_id) v.resolved = true;
}

bool FcfsQueues::resolved(NodeId node, int plan_id) const {
  const auto it = queues_.find(node);
  if (it == queues_.end()) return false;
  for (const auto& v : it->second)
    if (v.plan_id == plan_id) return v.resolved;
  return false;
}

std::vector<int> FcfsQueues::order(NodeId node) const {
  std::vector<int> ids;
  const auto it = queues_.find(node);
  if (it != queues_.end())
    for (const auto& v : it->second) ids.push_back(v.plan_id);
  return ids;
}

}  // namespace epds
