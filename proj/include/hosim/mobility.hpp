#pragma once

#include <optional>
#include <set>
#include <vector>

#include "hosim/rng.hpp"
#include "hosim/topology.hpp"

namespace hosim::mobility {

struct Cell {
  topo::NodeId access_node = 0;
  topo::Vec2 center;
  double radius = 500.0;
};

/// Mobility parameters. Signal strength is proxied by the distance ratio to
/// the serving cell radius: preparation fires beyond prepare_threshold *
/// radius, link loss at the radius itself.
struct Config {
  double walk_epoch_s = 10.0;      // heading resample interval
  double step_dt_s = 1.0;          // mobility sampling step
  double prepare_threshold = 0.9;  // fraction of the radius
  double speed_mps = 31.29;        // 70 mph
};

/// Rectangular playground tiled by circular cells. Construction verifies on
/// a sampling grid that every point of the rectangle lies inside at least
/// one cell.
class Playground {
 public:
  Playground(topo::Vec2 lo, topo::Vec2 hi, std::vector<Cell> cells);

  /// Bounds from the bounding box of the topology's access-node positions,
  /// one cell of the given radius per access node.
  static Playground from_topology(const topo::Topology& topology, double radius);

  const topo::Vec2& low() const { return lo_; }
  const topo::Vec2& high() const { return hi_; }
  const std::vector<Cell>& cells() const { return cells_; }

  const Cell& cell(topo::NodeId access_node) const;  // throws std::out_of_range
  bool contains(const topo::Vec2& p) const;

  /// Nearest cell center among the cells covering p; falls back to the
  /// nearest center outright if no cell covers p.
  topo::NodeId nearest_covering_cell(const topo::Vec2& p) const;
  topo::NodeId nearest_cell(const topo::Vec2& p) const;

 private:
  topo::Vec2 lo_, hi_;
  std::vector<Cell> cells_;  // sorted by access node id
};

enum class Phase { idle, ho_prepared, ho_executing, ho_completing };

struct MobileNodeState {
  std::uint32_t id = 0;
  topo::Vec2 position;
  double heading = 0;  // radians
  double speed = 31.29;
  double epoch_elapsed = 0;  // time since the last heading resample
  topo::NodeId serving_cell = 0;
  topo::NodeId correspondent = 0;  // attachment point of the peer
  Phase phase = Phase::idle;
};

enum class TriggerKind { prepare, link_down, link_up, complete };

struct TriggerEvent {
  std::uint32_t mn_id = 0;
  double time = 0;
  TriggerKind kind = TriggerKind::prepare;
  topo::NodeId source_cell = 0;
  std::optional<topo::NodeId> target_cell;  // link_up / complete only
};

/// One random-walk step: resample the heading at each walk epoch, advance
/// speed*dt along it, reflect specularly at the playground boundary.
/// Pure given the generator; never touches serving_cell or phase.
MobileNodeState step(const MobileNodeState& mn, double dt, const Playground& playground,
                     const Config& config, rng::Stream& walk);

/// Threshold triggers derived from the current state: prepare once the MN
/// drifts past prepare_threshold * radius while idle, link_down once it
/// leaves the serving cell while prepared. link_up and complete are
/// scheduled by the simulation loop, not detected here.
std::optional<TriggerEvent> detect_trigger(const MobileNodeState& mn, double time,
                                           const Playground& playground,
                                           const Config& config);

/// A prepared handover whose MN has drifted back inside the preparation
/// threshold is abandoned without signalling.
bool should_cancel(const MobileNodeState& mn, const Playground& playground,
                   const Config& config);

/// Cells whose coverage overlaps or touches the given cell's: center
/// distance at most twice the radius, excluding the cell itself.
std::set<topo::NodeId> neighbor_set(const Playground& playground, topo::NodeId cell);

topo::HandoverNamespace build_namespace(const Playground& playground);

/// Uniformly random initial placement across the playground rectangle.
std::vector<MobileNodeState> place_uniform(const Playground& playground, unsigned count,
                                           const Config& config, rng::Stream& walk);

}  // namespace hosim::mobility
