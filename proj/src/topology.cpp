#include "hosim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hosim/rng.hpp"

namespace hosim::topo {

std::string to_string(NodeRole role) {
  switch (role) {
    case NodeRole::core: return "core";
    case NodeRole::access: return "access";
    case NodeRole::anchor: return "anchor";
  }
  return "?";
}

double distance(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

bool Fid::contains_edge(NodeId from, NodeId to) const {
  return std::binary_search(edges.begin(), edges.end(), std::make_pair(from, to));
}

bool MulticastRoute::reaches(NodeId node) const {
  if (node == source) return true;
  return std::any_of(fid.edges.begin(), fid.edges.end(),
                     [node](const auto& e) { return e.second == node; });
}

HandoverNamespace::HandoverNamespace(std::map<NodeId, std::set<NodeId>> neighbours)
    : neighbours_(std::move(neighbours)) {
  for (const auto& [nap, peers] : neighbours_) {
    if (peers.count(nap))
      throw std::invalid_argument("namespace: node listed as its own neighbour");
    for (NodeId peer : peers) {
      auto it = neighbours_.find(peer);
      if (it == neighbours_.end() || !it->second.count(nap))
        throw std::invalid_argument("namespace: neighbour relation is not symmetric");
    }
  }
}

const std::set<NodeId>& HandoverNamespace::neighbours(NodeId nap) const {
  auto it = neighbours_.find(nap);
  if (it == neighbours_.end())
    throw std::out_of_range("namespace: unknown attachment point");
  return it->second;
}

bool HandoverNamespace::contains(NodeId nap) const { return neighbours_.count(nap) > 0; }

Topology::Topology(std::vector<NodeSpec> nodes, std::vector<std::pair<NodeId, NodeId>> edges)
    : specs_(std::move(nodes)) {
  if (specs_.empty()) throw std::invalid_argument("topology: no nodes");
  std::sort(specs_.begin(), specs_.end(),
            [](const NodeSpec& a, const NodeSpec& b) { return a.id < b.id; });

  unsigned anchors = 0;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const NodeSpec& s = specs_[i];
    if (index_.count(s.id)) throw std::invalid_argument("topology: duplicate node id");
    index_[s.id] = i;
    if (s.role == NodeRole::anchor) {
      ++anchors;
      anchor_ = s.id;
    }
    if (s.role == NodeRole::access && !s.position)
      throw std::invalid_argument("topology: access node without a position");
  }
  if (anchors != 1) throw std::invalid_argument("topology: exactly one anchor required");

  adjacency_.assign(specs_.size(), {});
  for (auto [a, b] : edges) {
    if (a == b) throw std::invalid_argument("topology: self loop");
    if (!index_.count(a) || !index_.count(b))
      throw std::invalid_argument("topology: edge references unknown node");
    if (a > b) std::swap(a, b);
    edge_list_.emplace_back(a, b);
  }
  std::sort(edge_list_.begin(), edge_list_.end());
  edge_list_.erase(std::unique(edge_list_.begin(), edge_list_.end()), edge_list_.end());
  for (const auto& [a, b] : edge_list_) {
    adjacency_[index_[a]].push_back(b);
    adjacency_[index_[b]].push_back(a);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());

  build_distance_matrix();
}

void Topology::build_distance_matrix() {
  const std::size_t n = specs_.size();
  constexpr std::uint16_t unreachable = std::numeric_limits<std::uint16_t>::max();
  dist_.assign(n, std::vector<std::uint16_t>(n, unreachable));
  for (std::size_t s = 0; s < n; ++s) {
    auto& row = dist_[s];
    row[s] = 0;
    std::deque<std::size_t> frontier{s};
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop_front();
      for (NodeId v_id : adjacency_[u]) {
        const std::size_t v = index_.at(v_id);
        if (row[v] == unreachable) {
          row[v] = static_cast<std::uint16_t>(row[u] + 1);
          frontier.push_back(v);
        }
      }
    }
    for (std::size_t v = 0; v < n; ++v)
      if (row[v] == unreachable)
        throw std::invalid_argument("topology: graph is not connected");
  }
}

std::size_t Topology::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw std::out_of_range("topology: unknown node " + std::to_string(id));
  return it->second;
}

bool Topology::contains(NodeId id) const { return index_.count(id) > 0; }

NodeRole Topology::role(NodeId id) const { return specs_[index_of(id)].role; }

const Vec2& Topology::position(NodeId id) const {
  const NodeSpec& s = specs_[index_of(id)];
  if (!s.position) throw std::out_of_range("topology: node has no position");
  return *s.position;
}

std::vector<NodeId> Topology::access_nodes() const {
  std::vector<NodeId> out;
  for (const NodeSpec& s : specs_)
    if (s.role == NodeRole::access) out.push_back(s.id);
  return out;
}

const std::vector<NodeId>& Topology::adjacent(NodeId id) const {
  return adjacency_[index_of(id)];
}

unsigned Topology::hop_distance(NodeId a, NodeId b) const {
  return dist_[index_of(a)][index_of(b)];
}

std::vector<NodeId> Topology::unicast_path(NodeId src, NodeId dst) const {
  const std::size_t dst_idx = index_of(dst);
  std::vector<NodeId> path{src};
  NodeId cur = src;
  while (cur != dst) {
    const std::size_t cur_idx = index_of(cur);
    const std::uint16_t remaining = dist_[cur_idx][dst_idx];
    NodeId next = cur;
    bool found = false;
    for (NodeId nbr : adjacency_[cur_idx]) {  // sorted, so first hit is smallest
      if (dist_[index_of(nbr)][dst_idx] + 1 == remaining) {
        next = nbr;
        found = true;
        break;
      }
    }
    if (!found) throw std::logic_error("topology: no descending neighbour on shortest path");
    path.push_back(next);
    cur = next;
  }
  return path;
}

Fid Topology::unicast_fid(NodeId src, NodeId dst) const {
  if (src == dst) throw std::invalid_argument("topology: unicast needs distinct endpoints");
  Fid fid;
  fid.kind = FidKind::unicast;
  const auto path = unicast_path(src, dst);
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    fid.edges.emplace_back(path[i], path[i + 1]);
  std::sort(fid.edges.begin(), fid.edges.end());
  return fid;
}

MulticastRoute Topology::multicast_fid(NodeId src, const std::vector<NodeId>& dsts) const {
  if (dsts.empty()) throw std::invalid_argument("topology: multicast needs destinations");
  std::vector<NodeId> unique_dsts(dsts);
  std::sort(unique_dsts.begin(), unique_dsts.end());
  unique_dsts.erase(std::unique(unique_dsts.begin(), unique_dsts.end()), unique_dsts.end());
  if (std::binary_search(unique_dsts.begin(), unique_dsts.end(), src))
    throw std::invalid_argument("topology: multicast source cannot be a destination");

  MulticastRoute route;
  route.source = src;
  route.destinations = unique_dsts;
  route.fid.kind = FidKind::multicast;

  std::vector<std::vector<NodeId>> paths;
  paths.reserve(unique_dsts.size());
  for (NodeId d : unique_dsts) paths.push_back(unicast_path(src, d));

  for (const auto& path : paths)
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      route.fid.edges.emplace_back(path[i], path[i + 1]);
  std::sort(route.fid.edges.begin(), route.fid.edges.end());
  route.fid.edges.erase(std::unique(route.fid.edges.begin(), route.fid.edges.end()),
                        route.fid.edges.end());

  // Fan-out node: last node on the prefix shared by every root-to-leaf path.
  std::size_t shared = paths.front().size();
  for (const auto& path : paths) {
    std::size_t i = 0;
    while (i < shared && i < path.size() && path[i] == paths.front()[i]) ++i;
    shared = i;
  }
  route.fanout = paths.front()[shared - 1];
  return route;
}

Topology Topology::generate(const TopologyParams& params, std::uint64_t seed) {
  if (params.core_count < 2) throw std::invalid_argument("topology: need at least 2 cores");
  if (params.access_count < 1) throw std::invalid_argument("topology: need access nodes");

  rng::Stream stream(seed);

  const NodeId first_core = 0;
  const NodeId anchor_id = params.core_count;
  const NodeId first_access = params.core_count + 1;

  // Core mesh: random edges, then connectivity repair and a degree-2 floor.
  std::vector<std::set<NodeId>> core_adj(params.core_count);
  for (NodeId a = 0; a < params.core_count; ++a)
    for (NodeId b = a + 1; b < params.core_count; ++b)
      if (stream.uniform() < params.core_edge_prob) {
        core_adj[a].insert(b);
        core_adj[b].insert(a);
      }

  auto components = [&] {
    std::vector<int> comp(params.core_count, -1);
    int n_comp = 0;
    for (NodeId s = 0; s < params.core_count; ++s) {
      if (comp[s] != -1) continue;
      comp[s] = n_comp;
      std::deque<NodeId> frontier{s};
      while (!frontier.empty()) {
        NodeId u = frontier.front();
        frontier.pop_front();
        for (NodeId v : core_adj[u])
          if (comp[v] == -1) {
            comp[v] = n_comp;
            frontier.push_back(v);
          }
      }
      ++n_comp;
    }
    return std::make_pair(comp, n_comp);
  };

  auto [comp, n_comp] = components();
  for (int c = 1; c < n_comp; ++c) {
    NodeId a = 0, b = 0;
    for (NodeId i = 0; i < params.core_count; ++i)
      if (comp[i] == 0) { a = i; break; }
    for (NodeId i = 0; i < params.core_count; ++i)
      if (comp[i] == c) { b = i; break; }
    core_adj[a].insert(b);
    core_adj[b].insert(a);
    std::tie(comp, n_comp) = components();
  }
  for (NodeId a = 0; a < params.core_count; ++a) {
    NodeId candidate = (a + 1) % params.core_count;
    while (core_adj[a].size() < 2) {
      if (candidate != a && !core_adj[a].count(candidate)) {
        core_adj[a].insert(candidate);
        core_adj[candidate].insert(a);
      }
      candidate = (candidate + 1) % params.core_count;
    }
  }

  // Access cells on a jittered triangular lattice. Row pitch is spacing *
  // sqrt(3)/2 with odd rows offset half a column, the classic covering
  // arrangement for circular cells.
  unsigned cols = params.grid_cols;
  if (cols == 0)
    cols = static_cast<unsigned>(
        std::ceil(std::sqrt(1.5 * static_cast<double>(params.access_count))));
  const double s = params.cell_spacing_m;
  const double row_pitch = s * std::sqrt(3.0) / 2.0;
  std::vector<Vec2> centers;
  centers.reserve(params.access_count);
  for (unsigned i = 0; centers.size() < params.access_count; ++i) {
    for (unsigned j = 0; j < cols && centers.size() < params.access_count; ++j) {
      Vec2 c;
      c.x = j * s + ((i % 2) ? s / 2.0 : 0.0);
      c.y = i * row_pitch;
      c.x += stream.uniform(-params.cell_jitter_m, params.cell_jitter_m);
      c.y += stream.uniform(-params.cell_jitter_m, params.cell_jitter_m);
      centers.push_back(c);
    }
  }

  // Core routers spread over the same area so "nearest core" clusters
  // neighbouring cells onto the same attachment router.
  Vec2 lo = centers.front(), hi = centers.front();
  for (const Vec2& c : centers) {
    lo.x = std::min(lo.x, c.x);
    lo.y = std::min(lo.y, c.y);
    hi.x = std::max(hi.x, c.x);
    hi.y = std::max(hi.y, c.y);
  }
  std::vector<Vec2> core_pos(params.core_count);
  for (auto& p : core_pos) {
    p.x = stream.uniform(lo.x, hi.x);
    p.y = stream.uniform(lo.y, hi.y);
  }

  std::vector<NodeSpec> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId c = 0; c < params.core_count; ++c)
    nodes.push_back({first_core + c, NodeRole::core, std::nullopt});
  for (NodeId a = 0; a < params.core_count; ++a)
    for (NodeId b : core_adj[a])
      if (a < b) edges.emplace_back(a, b);

  std::vector<unsigned> attachments(params.core_count, 0);
  for (unsigned i = 0; i < params.access_count; ++i) {
    const NodeId id = first_access + i;
    nodes.push_back({id, NodeRole::access, centers[i]});
    NodeId best_core = 0;
    double best = std::numeric_limits<double>::max();
    for (NodeId c = 0; c < params.core_count; ++c) {
      const double d = distance(centers[i], core_pos[c]);
      if (d < best) {
        best = d;
        best_core = c;
      }
    }
    edges.emplace_back(best_core, id);
    ++attachments[best_core];
  }

  // The anchor joins the busiest router: the core serving the most cells.
  const NodeId hub = static_cast<NodeId>(
      std::max_element(attachments.begin(), attachments.end()) - attachments.begin());
  nodes.push_back({anchor_id, NodeRole::anchor, std::nullopt});
  edges.emplace_back(hub, anchor_id);

  return Topology(std::move(nodes), std::move(edges));
}

Topology Topology::load_edge_list(std::istream& in) {
  std::vector<NodeSpec> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::string line;
  enum class Section { none, nodes, edges } section = Section::none;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "nodes") { section = Section::nodes; continue; }
    if (first == "edges") { section = Section::edges; continue; }
    if (section == Section::nodes) {
      NodeSpec spec;
      spec.id = static_cast<NodeId>(std::stoul(first));
      std::string role;
      if (!(ls >> role)) throw std::invalid_argument("topology file: node without role");
      if (role == "core") spec.role = NodeRole::core;
      else if (role == "access") spec.role = NodeRole::access;
      else if (role == "anchor") spec.role = NodeRole::anchor;
      else throw std::invalid_argument("topology file: unknown role " + role);
      double x, y;
      if (ls >> x >> y) spec.position = Vec2{x, y};
      nodes.push_back(spec);
    } else if (section == Section::edges) {
      NodeId a = static_cast<NodeId>(std::stoul(first));
      NodeId b;
      if (!(ls >> b)) throw std::invalid_argument("topology file: dangling edge endpoint");
      edges.emplace_back(a, b);
    } else {
      throw std::invalid_argument("topology file: data before a section header");
    }
  }
  return Topology(std::move(nodes), std::move(edges));
}

void Topology::save_edge_list(std::ostream& out) const {
  out << "nodes\n";
  for (const NodeSpec& s : specs_) {
    out << s.id << ' ' << to_string(s.role);
    if (s.position) out << ' ' << s.position->x << ' ' << s.position->y;
    out << '\n';
  }
  out << "edges\n";
  for (const auto& [a, b] : edge_list_) out << a << ' ' << b << '\n';
}

}  // namespace hosim::topo
