#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace hosim::topo {

using NodeId = std::uint32_t;

enum class NodeRole { core, access, anchor };

std::string to_string(NodeRole role);

struct Vec2 {
  double x = 0;
  double y = 0;
};

double distance(const Vec2& a, const Vec2& b);

enum class FidKind { unicast, multicast };

/// Source-route forwarding identifier: the set of directed links a packet
/// traverses. Modeled as an exact edge set with a fixed nominal encoding
/// size used for cost accounting.
struct Fid {
  static constexpr unsigned nominal_bits = 256;

  FidKind kind = FidKind::unicast;
  std::vector<std::pair<NodeId, NodeId>> edges;  // sorted, unique

  std::size_t edge_count() const { return edges.size(); }
  bool contains_edge(NodeId from, NodeId to) const;
};

/// Directed edge count of a forwarding identifier. For a tree with a single
/// fan-out node this equals the root-to-fanout leg plus the per-destination
/// legs below it.
inline std::size_t tree_edge_count(const Fid& fid) { return fid.edge_count(); }

struct MulticastRoute {
  Fid fid;
  NodeId source = 0;
  NodeId fanout = 0;  // deepest node shared by all root-to-leaf paths
  std::vector<NodeId> destinations;

  bool reaches(NodeId node) const;
};

/// The handover neighbourhood map: for each attachment point, the set of
/// attachment points currently prepared to take over its mobiles.
class HandoverNamespace {
 public:
  HandoverNamespace() = default;

  /// Throws std::invalid_argument if the relation is asymmetric or lists a
  /// node as its own neighbour.
  explicit HandoverNamespace(std::map<NodeId, std::set<NodeId>> neighbours);

  const std::set<NodeId>& neighbours(NodeId nap) const;
  bool contains(NodeId nap) const;
  std::size_t size() const { return neighbours_.size(); }

 private:
  std::map<NodeId, std::set<NodeId>> neighbours_;
  std::set<NodeId> empty_;
};

struct TopologyParams {
  unsigned core_count = 8;
  unsigned access_count = 60;
  double core_edge_prob = 0.3;
  double cell_spacing_m = 750.0;
  double cell_jitter_m = 25.0;
  unsigned grid_cols = 0;  // 0: chosen from access_count
};

/// Undirected network graph with role-tagged nodes, positions for access
/// nodes, and precomputed hop distances. Immutable once constructed; all
/// queries are pure.
class Topology {
 public:
  struct NodeSpec {
    NodeId id = 0;
    NodeRole role = NodeRole::core;
    std::optional<Vec2> position;
  };

  /// Validates: non-empty, unique ids, known endpoints, connected graph,
  /// exactly one anchor, every access node positioned.
  Topology(std::vector<NodeSpec> nodes, std::vector<std::pair<NodeId, NodeId>> edges);

  /// Random operator-like topology: a connected core mesh with minimum
  /// degree 2, access nodes on a jittered hexagonal grid each attached to
  /// the nearest core, and one anchor hung off the most central core.
  static Topology generate(const TopologyParams& params, std::uint64_t seed);

  /// Plain-text round trip. The format is a `nodes` section with
  /// "<id> <role> [<x> <y>]" lines followed by an `edges` section with one
  /// "<a> <b>" pair per line; `#` starts a comment.
  static Topology load_edge_list(std::istream& in);
  void save_edge_list(std::ostream& out) const;

  std::size_t node_count() const { return specs_.size(); }
  std::size_t edge_count() const { return edge_list_.size(); }
  const std::vector<NodeSpec>& nodes() const { return specs_; }
  const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edge_list_; }

  bool contains(NodeId id) const;
  NodeRole role(NodeId id) const;
  const Vec2& position(NodeId id) const;  // throws unless the node has one
  std::vector<NodeId> access_nodes() const;
  NodeId anchor() const { return anchor_; }
  const std::vector<NodeId>& adjacent(NodeId id) const;

  /// Shortest-path hop count. Symmetric; zero for a == b. Throws
  /// std::out_of_range for unknown nodes.
  unsigned hop_distance(NodeId a, NodeId b) const;

  /// The lexicographically smallest shortest path (compared by successive
  /// node ids), returned as the node sequence src..dst. This tie-breaking is
  /// what keeps unicast paths and multicast trees mutually consistent.
  std::vector<NodeId> unicast_path(NodeId src, NodeId dst) const;

  Fid unicast_fid(NodeId src, NodeId dst) const;

  /// Union of the deterministic shortest paths from src to each destination.
  /// The union is always a tree (an out-tree rooted at src). Destinations
  /// must be non-empty and must not contain src.
  MulticastRoute multicast_fid(NodeId src, const std::vector<NodeId>& dsts) const;

 private:
  std::size_t index_of(NodeId id) const;  // throws std::out_of_range
  void build_distance_matrix();

  std::vector<NodeSpec> specs_;                       // sorted by id
  std::vector<std::pair<NodeId, NodeId>> edge_list_;  // normalized a < b
  std::map<NodeId, std::size_t> index_;
  std::vector<std::vector<NodeId>> adjacency_;        // sorted neighbour ids
  std::vector<std::vector<std::uint16_t>> dist_;
  NodeId anchor_ = 0;
};

}  // namespace hosim::topo
