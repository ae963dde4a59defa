#include "epds/skyway.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "epds/error.hpp"

namespace epds {

Node::Node(NodeId id, Position position, int pad_count)
    : id_(id), position_(std::move(position)) {
  if (pad_count < 1) {
    throw Error(ErrorCode::InvalidArgument, "pad_count must be positive");
  }
  pads_.resize(static_cast<std::size_t>(pad_count));
}

std::size_t SkywayNetwork::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorCode::UnknownNode, "node " + std::to_string(id));
  }
  return it->second;
}

bool SkywayNetwork::adjacent(NodeId a, NodeId b) const {
  if (!contains(a) || !contains(b)) return false;
  return node(a).neighbors().contains(b);
}

double SkywayNetwork::edge_length(NodeId a, NodeId b) const {
  if (a == b || !adjacent(a, b)) {
    throw Error(ErrorCode::NotAdjacent,
                std::to_string(a) + " and " + std::to_string(b) + " share no edge");
  }
  return distance(a, b);
}

double SkywayNetwork::distance(NodeId a, NodeId b) const {
  return (node(a).position() - node(b).position()).norm();
}

void SkywayNetwork::clear_calendars() {
  for (auto& n : nodes_) {
    for (auto& pad : n.pads_) pad.clear();
  }
}

namespace {

// Union-find over dense indices.
struct Components {
  std::vector<std::size_t> parent;
  explicit Components(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

SkywayNetwork build_network(std::span<const NodeSpec> specs, const Topology& topology,
                            int pad_count) {
  if (specs.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "a skyway network needs at least two nodes");
  }
  SkywayNetwork net;
  net.nodes_.reserve(specs.size());
  for (const auto& spec : specs) {
    if (!net.index_.emplace(spec.id, net.nodes_.size()).second) {
      throw Error(ErrorCode::DuplicateId, "node id " + std::to_string(spec.id));
    }
    net.nodes_.emplace_back(spec.id, spec.position, pad_count);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (std::holds_alternative<FullyConnected>(topology)) {
    for (std::size_t i = 0; i < specs.size(); ++i)
      for (std::size_t j = i + 1; j < specs.size(); ++j) pairs.emplace_back(i, j);
  } else {
    for (auto [a, b] : std::get<EdgeList>(topology).edges) {
      std::size_t ia = net.index_of(a);
      std::size_t ib = net.index_of(b);
      if (ia == ib) {
        throw Error(ErrorCode::InvalidArgument, "self-loop at node " + std::to_string(a));
      }
      if (net.nodes_[ia].neighbors_.contains(b)) continue;  // duplicate edge
      net.nodes_[ia].neighbors_.insert(b);
      net.nodes_[ib].neighbors_.insert(a);
      pairs.emplace_back(std::min(ia, ib), std::max(ia, ib));
    }
  }

  net.adjacency_.resize(specs.size());
  Components comps(specs.size());
  for (auto [i, j] : pairs) {
    Node& a = net.nodes_[i];
    Node& b = net.nodes_[j];
    const double length = (a.position() - b.position()).norm();
    if (!(length > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "coincident nodes " + std::to_string(a.id()) +
                                                  " and " + std::to_string(b.id()));
    }
    a.neighbors_.insert(b.id());
    b.neighbors_.insert(a.id());
    net.edges_.push_back({a.id(), b.id(), length});
    net.adjacency_[i].push_back({j, length});
    net.adjacency_[j].push_back({i, length});
    comps.unite(i, j);
  }
  for (std::size_t i = 1; i < specs.size(); ++i) {
    if (comps.find(i) != comps.find(0)) {
      throw Error(ErrorCode::DisconnectedTopology,
                  "node " + std::to_string(specs[i].id) + " is unreachable");
    }
  }
  // Deterministic neighbour order for the planners' tie-breaking.
  for (auto& adj : net.adjacency_) {
    std::sort(adj.begin(), adj.end(), [&](const Neighbor& x, const Neighbor& y) {
      return net.nodes_[x.index].id() < net.nodes_[y.index].id();
    });
  }
  return net;
}

SkywayNetwork build_network(std::span<const Position> positions, const Topology& topology,
                            int pad_count) {
  std::vector<NodeSpec> specs;
  specs.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    specs.push_back({static_cast<NodeId>(i), positions[i]});
  }
  return build_network(specs, topology, pad_count);
}

EdgeList range_limited_edges(std::span<const NodeSpec> nodes, double max_range) {
  struct Candidate {
    double length;
    std::size_t i, j;
  };
  std::vector<Candidate> all;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j)
      all.push_back({(nodes[i].position - nodes[j].position).norm(), i, j});
  std::stable_sort(all.begin(), all.end(),
                   [](const Candidate& x, const Candidate& y) { return x.length < y.length; });

  EdgeList out;
  Components comps(nodes.size());
  std::vector<bool> taken(all.size(), false);
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (all[k].length <= max_range) {
      out.edges.emplace_back(nodes[all[k].i].id, nodes[all[k].j].id);
      comps.unite(all[k].i, all[k].j);
      taken[k] = true;
    }
  }
  // Kruskal over the remaining candidates bridges any leftover components.
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (!taken[k] && comps.unite(all[k].i, all[k].j)) {
      out.edges.emplace_back(nodes[all[k].i].id, nodes[all[k].j].id);
    }
  }
  return out;
}

std::vector<Position> random_positions(std::size_t count, std::uint64_t seed, double extent_cm,
                                       double altitude_cm) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xy(0.0, extent_cm);
  std::uniform_real_distribution<double> z(0.0, altitude_cm);
  std::vector<Position> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = xy(rng);
    const double y = xy(rng);
    out.emplace_back(x, y, z(rng));
  }
  return out;
}

// ---------------------------------------------------------------------------

double earliest_available(const Node& node, double not_before, double duration) {
  if (!(duration > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "duration must be positive");
  }
  double best = std::numeric_limits<double>::infinity();
  for (int p = 0; p < node.pad_count(); ++p) {
    double t = not_before;
    for (const auto& w : node.pad(p)) {
      if (w.t_end <= t + kTimeEpsilon) continue;
      if (w.t_start >= t + duration - kTimeEpsilon) break;
      t = w.t_end;
    }
    best = std::min(best, t);
  }
  return best;
}

namespace {

bool fits(const PadCalendar& pad, const ReservationWindow& window) {
  return std::none_of(pad.begin(), pad.end(),
                      [&](const ReservationWindow& w) { return w.overlaps(window); });
}

void insert_sorted(PadCalendar& pad, const ReservationWindow& window) {
  auto pos = std::upper_bound(
      pad.begin(), pad.end(), window.t_start,
      [](double t, const ReservationWindow& w) { return t < w.t_start; });
  pad.insert(pos, window);
}

}  // namespace

std::size_t reserve(Node& node, const ReservationWindow& window) {
  if (!(window.t_start < window.t_end)) {
    throw Error(ErrorCode::InvalidArgument, "reservation window must have t_start < t_end");
  }
  if (window.status == WindowStatus::PredRecharging) {
    for (const auto& pad : node.pads_)
      for (const auto& w : pad)
        if (w.drone_id == window.drone_id && w.status == WindowStatus::PredRecharging) {
          throw Error(ErrorCode::InvalidArgument,
                      "drone " + std::to_string(window.drone_id) +
                          " already holds a predicted window at node " + std::to_string(node.id()));
        }
  }
  for (std::size_t p = 0; p < node.pads_.size(); ++p) {
    if (fits(node.pads_[p], window)) {
      insert_sorted(node.pads_[p], window);
      return p;
    }
  }
  throw Error(ErrorCode::OverlapRejected,
              "no pad at node " + std::to_string(node.id()) + " is free over [" +
                  std::to_string(window.t_start) + ", " + std::to_string(window.t_end) + ")");
}

CommitResult commit_reservation(Node& node, DroneId drone, double actual_start,
                                double actual_end) {
  if (!(actual_start < actual_end)) {
    throw Error(ErrorCode::InvalidArgument, "committed window must have t_start < t_end");
  }
  for (std::size_t p = 0; p < node.pads_.size(); ++p) {
    PadCalendar& pad = node.pads_[p];
    auto it = std::find_if(pad.begin(), pad.end(), [&](const ReservationWindow& w) {
      return w.drone_id == drone && w.status == WindowStatus::PredRecharging;
    });
    if (it == pad.end()) continue;

    PadCalendar updated(pad.begin(), it);
    updated.insert(updated.end(), std::next(it), pad.end());
    ReservationWindow actual{actual_start, actual_end, WindowStatus::Recharging, drone};

    // Windows starting before the committed one must not be disturbed.
    for (const auto& w : updated) {
      if (w.t_start < actual_start - kTimeEpsilon && w.overlaps(actual)) {
        throw Error(ErrorCode::OverlapRejected,
                    "drone " + std::to_string(drone) + " committed into an earlier window at node " +
                        std::to_string(node.id()));
      }
    }
    insert_sorted(updated, actual);

    CommitResult result{p, actual, {}};
    auto self = std::find(updated.begin(), updated.end(), actual);
    double frontier = actual.t_end;
    for (auto w = std::next(self); w != updated.end(); ++w) {
      if (w->t_start < frontier - kTimeEpsilon) {
        const double shift = frontier - w->t_start;
        w->t_start = frontier;
        w->t_end += shift;
        result.shifted.push_back(w->drone_id);
      }
      frontier = std::max(frontier, w->t_end);
    }
    pad = std::move(updated);
    return result;
  }
  throw Error(ErrorCode::NoPendingReservation,
              "drone " + std::to_string(drone) + " has no predicted window at node " +
                  std::to_string(node.id()));
}

bool cancel_reservation(Node& node, DroneId drone) {
  for (auto& pad : node.pads_) {
    auto it = std::find_if(pad.begin(), pad.end(), [&](const ReservationWindow& w) {
      return w.drone_id == drone && w.status == WindowStatus::PredRecharging;
    });
    if (it != pad.end()) {
      pad.erase(it);
      return true;
    }
  }
  return false;
}

std::optional<WindowRef> find_reservation(const Node& node, DroneId drone) {
  std::optional<WindowRef> found;
  for (int p = 0; p < node.pad_count(); ++p) {
    for (const auto& w : node.pad(p)) {
      if (w.drone_id == drone && (!found || w.t_start > found->window.t_start)) {
        found = WindowRef{static_cast<std::size_t>(p), w};
      }
    }
  }
  return found;
}

bool calendar_consistent(const Node& node) {
  for (int p = 0; p < node.pad_count(); ++p) {
    const auto& pad = node.pad(p);
    for (std::size_t i = 0; i < pad.size(); ++i) {
      if (!(pad[i].t_start < pad[i].t_end)) return false;
      if (i > 0 && (pad[i - 1].t_start > pad[i].t_start || pad[i - 1].overlaps(pad[i]))) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace epds
