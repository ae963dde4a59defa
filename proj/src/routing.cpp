#include "epds/routing.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <tuple>

#include "epds/error.hpp"

namespace epds {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::BellmanFord: return "BellmanFord";
    case Algorithm::Dijkstra: return "Dijkstra";
    case Algorithm::AStarDistance: return "AStar";
    case Algorithm::EpdsHeuristic: return "EpdsHeuristic";
  }
  return "Dijkstra";
}

Algorithm parse_algorithm(std::string_view s) {
  if (s == "BellmanFord") return Algorithm::BellmanFord;
  if (s == "Dijkstra") return Algorithm::Dijkstra;
  if (s == "AStar" || s == "AStarDistance") return Algorithm::AStarDistance;
  if (s == "EpdsHeuristic" || s == "Epds") return Algorithm::EpdsHeuristic;
  throw Error(ErrorCode::ConfigError, "unknown planner '" + std::string(s) + "'");
}

void validate(const EdgeCostModel& model) {
  if (!(model.speed > 0.0) || !(model.rate_recharge > 0.0) || !(model.e0 >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "edge cost model needs speed > 0, rate_recharge > 0 and e0 >= 0");
  }
}

double edge_cost(const EdgeCostModel& model, const SkywayNetwork& net, NodeId a, NodeId b) {
  const double d = net.edge_length(a, b);
  return d / model.speed + model.e0 * d / model.rate_recharge;
}

double heuristic_h(const EdgeCostModel& model, const SkywayNetwork& net, NodeId current,
                   NodeId dest) {
  const double d = net.distance(current, dest);
  return d / model.speed + model.e0 * d / model.rate_recharge;
}

double path_cost(const EdgeCostModel& model, const SkywayNetwork& net,
                 const std::vector<NodeId>& nodes) {
  double cost = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) cost += edge_cost(model, net, nodes[i - 1], nodes[i]);
  return cost;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Label {
  double cost = kInf;
  std::size_t hops = 0;
  std::size_t parent = kNone;
};

class Search {
 public:
  Search(const SkywayNetwork& net, const EdgeCostModel& model, const PlanOptions& options)
      : net_(net), model_(model), options_(options), labels_(net.size()) {}

  /// Offer a route to v through u; returns true when v's label changed and
  /// whether the cost strictly improved.
  std::pair<bool, bool> relax(std::size_t u, const Neighbor& nb) {
    const Label& from = labels_[u];
    Label cand{from.cost + nb.length * model_.per_cm(), from.hops + 1, u};
    Label& cur = labels_[nb.index];
    const double tol = options_.tie_tolerance * std::max(1.0, std::abs(cand.cost));
    if (cand.cost < cur.cost - tol) {
      cur = cand;
      return {true, true};
    }
    if (cand.cost > cur.cost + tol || cur.parent == kNone) return {false, false};
    // Equal cost within tolerance: apply the path preference.
    const auto key = [&](const Label& l) {
      const std::size_t hops = options_.preference == PathPreference::FewerHops ? l.hops : 0;
      return std::make_tuple(hops, net_.at(l.parent).id());
    };
    if (key(cand) < key(cur)) {
      cand.cost = std::min(cand.cost, cur.cost);
      cur = cand;
      return {true, false};
    }
    return {false, false};
  }

  Path finish(std::size_t src, std::size_t dest, std::size_t expansions) const {
    if (labels_[dest].cost == kInf) {
      throw Error(ErrorCode::NoPath, "no path from " + std::to_string(net_.at(src).id()) + " to " +
                                         std::to_string(net_.at(dest).id()));
    }
    Path path;
    for (std::size_t v = dest; v != kNone; v = labels_[v].parent) {
      path.nodes.push_back(net_.at(v).id());
      if (path.nodes.size() > net_.size()) throw Error(ErrorCode::NoPath, "parent cycle");
    }
    std::reverse(path.nodes.begin(), path.nodes.end());
    path.total_cost = path_cost(model_, net_, path.nodes);
    path.expansions = expansions;
    return path;
  }

  std::vector<Label>& labels() { return labels_; }

 private:
  const SkywayNetwork& net_;
  const EdgeCostModel& model_;
  const PlanOptions& options_;
  std::vector<Label> labels_;
};

Path bellman_ford(const SkywayNetwork& net, std::size_t src, std::size_t dest,
                  const EdgeCostModel& model, const PlanOptions& options) {
  Search search(net, model, options);
  search.labels()[src].cost = 0.0;
  std::size_t expansions = 0;
  for (std::size_t pass = 0; pass < net.size(); ++pass) {
    bool changed = false;
    for (std::size_t u = 0; u < net.size(); ++u) {
      if (search.labels()[u].cost == kInf) continue;
      ++expansions;
      for (const auto& nb : net.adjacency(u)) {
        if (nb.index == src) continue;
        changed |= search.relax(u, nb).first;
      }
    }
    if (!changed) break;
  }
  return search.finish(src, dest, expansions);
}

Path best_first(const SkywayNetwork& net, std::size_t src, std::size_t dest,
                const EdgeCostModel& model, const PlanOptions& options,
                const std::function<double(std::size_t)>& h) {
  Search search(net, model, options);
  auto& labels = search.labels();
  labels[src].cost = 0.0;
  using Entry = std::tuple<double, NodeId, std::size_t>;  // (f, id, index)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<bool> closed(net.size(), false);
  open.emplace(h(src), net.at(src).id(), src);
  std::size_t expansions = 0;
  while (!open.empty()) {
    const auto [f, id, u] = open.top();
    open.pop();
    if (closed[u]) continue;
    closed[u] = true;
    if (u == dest) break;
    ++expansions;
    for (const auto& nb : net.adjacency(u)) {
      if (nb.index == src) continue;
      const auto [changed, improved] = search.relax(u, nb);
      if (improved && !closed[nb.index]) {
        open.emplace(labels[nb.index].cost + h(nb.index), net.at(nb.index).id(), nb.index);
      }
      (void)changed;
    }
  }
  return search.finish(src, dest, expansions);
}

}  // namespace

Path plan(Algorithm algorithm, const SkywayNetwork& net, NodeId src, NodeId dest,
          const EdgeCostModel& model, const PlanOptions& options) {
  validate(model);
  if (!net.contains(src) || !net.contains(dest)) {
    throw Error(ErrorCode::UnknownNode, "planner endpoints " + std::to_string(src) + " -> " +
                                            std::to_string(dest));
  }
  if (src == dest) throw Error(ErrorCode::InvalidArgument, "source equals destination");
  const std::size_t s = net.index_of(src);
  const std::size_t d = net.index_of(dest);
  const Position& goal = net.at(d).position();
  switch (algorithm) {
    case Algorithm::BellmanFord:
      return bellman_ford(net, s, d, model, options);
    case Algorithm::Dijkstra:
      return best_first(net, s, d, model, options, [](std::size_t) { return 0.0; });
    case Algorithm::AStarDistance:
      return best_first(net, s, d, model, options, [&](std::size_t v) {
        return (net.at(v).position() - goal).norm() / model.speed;
      });
    case Algorithm::EpdsHeuristic:
      return best_first(net, s, d, model, options, [&](std::size_t v) {
        return (net.at(v).position() - goal).norm() * model.per_cm();
      });
  }
  throw Error(ErrorCode::InvalidArgument, "unknown planner");
}

}  // namespace epds
