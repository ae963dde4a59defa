#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "epds/skyway.hpp"

namespace epds {

enum class Algorithm { BellmanFord, Dijkstra, AStarDistance, EpdsHeuristic };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

/// Costs are in seconds-equivalent: flight time plus the recharge time needed
/// to replace the nominal energy of the hop.
struct EdgeCostModel {
  double speed = 6.0;          // cm/s
  double rate_recharge = 1.0;  // ampere-seconds restored per second
  double e0 = 0.0;             // nominal ampere-seconds per cm

  double per_cm() const { return 1.0 / speed + e0 / rate_recharge; }
};

void validate(const EdgeCostModel& model);

double edge_cost(const EdgeCostModel& model, const SkywayNetwork& net, NodeId a, NodeId b);
/// Straight-line flight time plus nominal recharge time to dest.
double heuristic_h(const EdgeCostModel& model, const SkywayNetwork& net, NodeId current,
                   NodeId dest);

/// Tie-break among equal-cost alternatives.
enum class PathPreference { LowestId, FewerHops };

struct PlanOptions {
  PathPreference preference = PathPreference::LowestId;
  double tie_tolerance = 1e-9;  // relative
};

struct Path {
  std::vector<NodeId> nodes;
  double total_cost = 0.0;
  std::size_t expansions = 0;  // adjacency scans performed by the planner

  std::size_t hops() const { return nodes.empty() ? 0 : nodes.size() - 1; }
};

Path plan(Algorithm algorithm, const SkywayNetwork& net, NodeId src, NodeId dest,
          const EdgeCostModel& model, const PlanOptions& options = {});

/// Sum of edge costs along a node sequence; validates adjacency.
double path_cost(const EdgeCostModel& model, const SkywayNetwork& net,
                 const std::vector<NodeId>& nodes);

}  // namespace epds
