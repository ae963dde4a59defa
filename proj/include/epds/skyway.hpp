#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace epds {

using NodeId = int;
using DroneId = int;
using Position = Eigen::Vector3d;  // centimetres

/// Slack used when comparing calendar boundaries expressed in seconds.
inline constexpr double kTimeEpsilon = 1e-9;

enum class WindowStatus { Recharging, PredRecharging };

struct ReservationWindow {
  double t_start = 0.0;  // seconds, inclusive
  double t_end = 0.0;    // seconds, exclusive
  WindowStatus status = WindowStatus::Recharging;
  DroneId drone_id = -1;

  double duration() const { return t_end - t_start; }
  bool overlaps(const ReservationWindow& other) const {
    return t_start < other.t_end - kTimeEpsilon && other.t_start < t_end - kTimeEpsilon;
  }
  friend bool operator==(const ReservationWindow&, const ReservationWindow&) = default;
};

/// Per-pad reservation calendar: windows sorted by start, pairwise disjoint.
using PadCalendar = std::vector<ReservationWindow>;

struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  double length = 0.0;  // centimetres
};

struct FullyConnected {};
struct EdgeList {
  std::vector<std::pair<NodeId, NodeId>> edges;
};
using Topology = std::variant<FullyConnected, EdgeList>;

struct NodeSpec {
  NodeId id = 0;
  Position position = Position::Zero();
};

class SkywayNetwork;
struct CommitResult;

class Node {
 public:
  Node(NodeId id, Position position, int pad_count = 1);

  NodeId id() const { return id_; }
  const Position& position() const { return position_; }
  const std::set<NodeId>& neighbors() const { return neighbors_; }
  int pad_count() const { return static_cast<int>(pads_.size()); }
  const PadCalendar& pad(int index) const { return pads_.at(static_cast<std::size_t>(index)); }

 private:
  friend class SkywayNetwork;
  friend SkywayNetwork build_network(std::span<const NodeSpec>, const Topology&, int);
  friend std::size_t reserve(Node&, const ReservationWindow&);
  friend CommitResult commit_reservation(Node&, DroneId, double, double);
  friend bool cancel_reservation(Node&, DroneId);

  NodeId id_;
  Position position_;
  std::set<NodeId> neighbors_;
  std::vector<PadCalendar> pads_;
};

struct Neighbor {
  std::size_t index;  // dense node index
  double length;
};

/// Connected, undirected spatial graph. Nodes are addressed by id in the
/// public API; planners use the dense index view through adjacency().
class SkywayNetwork {
 public:
  std::size_t size() const { return nodes_.size(); }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Edge> edges() const { return edges_; }

  bool contains(NodeId id) const { return index_.contains(id); }
  std::size_t index_of(NodeId id) const;
  const Node& node(NodeId id) const { return nodes_[index_of(id)]; }
  Node& node(NodeId id) { return nodes_[index_of(id)]; }
  const Node& at(std::size_t index) const { return nodes_[index]; }

  bool adjacent(NodeId a, NodeId b) const;
  /// Length of the edge a–b; throws NotAdjacent when no such edge exists.
  double edge_length(NodeId a, NodeId b) const;
  double distance(NodeId a, NodeId b) const;
  std::span<const Neighbor> adjacency(std::size_t index) const { return adjacency_[index]; }

  /// Drop every reservation on every pad.
  void clear_calendars();

 private:
  friend SkywayNetwork build_network(std::span<const NodeSpec>, const Topology&, int);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<std::vector<Neighbor>> adjacency_;
};

SkywayNetwork build_network(std::span<const NodeSpec> nodes, const Topology& topology,
                            int pad_count = 1);
/// Nodes get ids 0..n-1 in input order.
SkywayNetwork build_network(std::span<const Position> positions, const Topology& topology,
                            int pad_count = 1);

/// Edges between every pair closer than max_range, plus the shortest
/// bridging edges needed to make the graph connected.
EdgeList range_limited_edges(std::span<const NodeSpec> nodes, double max_range);

/// Uniform positions in [0, extent]^2 at a common altitude band.
std::vector<Position> random_positions(std::size_t count, std::uint64_t seed,
                                       double extent_cm = 400.0, double altitude_cm = 20.0);

// Calendar operations ------------------------------------------------------

/// Smallest t >= not_before such that some pad is free over [t, t + duration).
double earliest_available(const Node& node, double not_before, double duration);

/// Insert on the first pad where the window fits. Returns that pad's index.
std::size_t reserve(Node& node, const ReservationWindow& window);

struct CommitResult {
  std::size_t pad = 0;
  ReservationWindow committed;
  std::vector<DroneId> shifted;  // drones whose windows moved right
};

/// Replace drone's PredRecharging window by Recharging [actual_start, actual_end)
/// on the same pad, shifting later windows right just enough to stay disjoint.
CommitResult commit_reservation(Node& node, DroneId drone, double actual_start, double actual_end);

/// Remove a drone's pending PredRecharging window. Returns false if none.
bool cancel_reservation(Node& node, DroneId drone);

struct WindowRef {
  std::size_t pad;
  ReservationWindow window;
};
/// The drone's most recent window at this node, if any.
std::optional<WindowRef> find_reservation(const Node& node, DroneId drone);

/// Sorted and pairwise disjoint on every pad.
bool calendar_consistent(const Node& node);

}  // namespace epds
