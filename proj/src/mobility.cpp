#include "hosim/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace hosim::mobility {

namespace {
constexpr double kTau = 6.283185307179586476925286766559;
}

Playground::Playground(topo::Vec2 lo, topo::Vec2 hi, std::vector<Cell> cells)
    : lo_(lo), hi_(hi), cells_(std::move(cells)) {
  if (cells_.empty()) throw std::invalid_argument("playground: no cells");
  if (hi_.x <= lo_.x || hi_.y <= lo_.y)
    throw std::invalid_argument("playground: degenerate bounds");
  std::sort(cells_.begin(), cells_.end(),
            [](const Cell& a, const Cell& b) { return a.access_node < b.access_node; });

  // Sampled coverage check: every grid point of the rectangle must fall
  // inside some cell, otherwise nearest_covering_cell could be asked for a
  // position no cell covers.
  double min_radius = std::numeric_limits<double>::max();
  for (const Cell& c : cells_) {
    if (c.radius <= 0) throw std::invalid_argument("playground: cell radius must be positive");
    min_radius = std::min(min_radius, c.radius);
  }
  const double step = min_radius / 10.0;
  const auto samples = [step](double lo, double hi) {
    return static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  };
  const std::size_t nx = samples(lo_.x, hi_.x);
  const std::size_t ny = samples(lo_.y, hi_.y);
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      // Clamp so the last row and column land exactly on the boundary.
      const topo::Vec2 p{std::min(lo_.x + ix * step, hi_.x),
                         std::min(lo_.y + iy * step, hi_.y)};
      bool covered = false;
      for (const Cell& c : cells_) {
        if (topo::distance(p, c.center) <= c.radius) {
          covered = true;
          break;
        }
      }
      if (!covered)
        throw std::invalid_argument("playground: point (" + std::to_string(p.x) + ", " +
                                    std::to_string(p.y) + ") is covered by no cell");
    }
  }
}

Playground Playground::from_topology(const topo::Topology& topology, double radius) {
  std::vector<Cell> cells;
  topo::Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  topo::Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (topo::NodeId id : topology.access_nodes()) {
    const topo::Vec2& c = topology.position(id);
    cells.push_back({id, c, radius});
    lo.x = std::min(lo.x, c.x);
    lo.y = std::min(lo.y, c.y);
    hi.x = std::max(hi.x, c.x);
    hi.y = std::max(hi.y, c.y);
  }
  return Playground(lo, hi, std::move(cells));
}

const Cell& Playground::cell(topo::NodeId access_node) const {
  const auto it = std::lower_bound(
      cells_.begin(), cells_.end(), access_node,
      [](const Cell& c, topo::NodeId id) { return c.access_node < id; });
  if (it == cells_.end() || it->access_node != access_node)
    throw std::out_of_range("playground: unknown cell " + std::to_string(access_node));
  return *it;
}

bool Playground::contains(const topo::Vec2& p) const {
  return p.x >= lo_.x && p.x <= hi_.x && p.y >= lo_.y && p.y <= hi_.y;
}

topo::NodeId Playground::nearest_covering_cell(const topo::Vec2& p) const {
  topo::NodeId best = cells_.front().access_node;
  double best_d = std::numeric_limits<double>::max();
  bool covered = false;
  for (const Cell& c : cells_) {
    const double d = topo::distance(p, c.center);
    const bool covers = d <= c.radius;
    if (covers && !covered) {  // first covering cell resets the search
      covered = true;
      best_d = d;
      best = c.access_node;
    } else if (covers == covered && d < best_d) {
      best_d = d;
      best = c.access_node;
    }
  }
  return best;
}

topo::NodeId Playground::nearest_cell(const topo::Vec2& p) const {
  topo::NodeId best = cells_.front().access_node;
  double best_d = std::numeric_limits<double>::max();
  for (const Cell& c : cells_) {
    const double d = topo::distance(p, c.center);
    if (d < best_d) {
      best_d = d;
      best = c.access_node;
    }
  }
  return best;
}

MobileNodeState step(const MobileNodeState& mn, double dt, const Playground& playground,
                     const Config& config, rng::Stream& walk) {
  if (dt <= 0) throw std::invalid_argument("mobility: step needs dt > 0");
  MobileNodeState out = mn;

  out.epoch_elapsed += dt;
  if (out.epoch_elapsed >= config.walk_epoch_s) {
    out.heading = walk.uniform(0.0, kTau);
    out.epoch_elapsed = std::fmod(out.epoch_elapsed, config.walk_epoch_s);
  }

  out.position.x += out.speed * dt * std::cos(out.heading);
  out.position.y += out.speed * dt * std::sin(out.heading);

  // Specular reflection keeps the walk inside the playground. Loop in case
  // a long step bounces off more than one wall.
  const topo::Vec2 lo = playground.low();
  const topo::Vec2 hi = playground.high();
  bool reflected = true;
  while (reflected) {
    reflected = false;
    if (out.position.x < lo.x) {
      out.position.x = 2 * lo.x - out.position.x;
      out.heading = std::fmod(kTau + (kTau / 2.0) - out.heading, kTau);
      reflected = true;
    } else if (out.position.x > hi.x) {
      out.position.x = 2 * hi.x - out.position.x;
      out.heading = std::fmod(kTau + (kTau / 2.0) - out.heading, kTau);
      reflected = true;
    }
    if (out.position.y < lo.y) {
      out.position.y = 2 * lo.y - out.position.y;
      out.heading = std::fmod(kTau - out.heading, kTau);
      reflected = true;
    } else if (out.position.y > hi.y) {
      out.position.y = 2 * hi.y - out.position.y;
      out.heading = std::fmod(kTau - out.heading, kTau);
      reflected = true;
    }
  }
  return out;
}

std::optional<TriggerEvent> detect_trigger(const MobileNodeState& mn, double time,
                                           const Playground& playground,
                                           const Config& config) {
  const Cell& serving = playground.cell(mn.serving_cell);
  const double d = topo::distance(mn.position, serving.center);

  if (mn.phase == Phase::idle && d > config.prepare_threshold * serving.radius) {
    return TriggerEvent{mn.id, time, TriggerKind::prepare, mn.serving_cell, std::nullopt};
  }
  if (mn.phase == Phase::ho_prepared && d > serving.radius) {
    return TriggerEvent{mn.id, time, TriggerKind::link_down, mn.serving_cell, std::nullopt};
  }
  return std::nullopt;
}

bool should_cancel(const MobileNodeState& mn, const Playground& playground,
                   const Config& config) {
  if (mn.phase != Phase::ho_prepared) return false;
  const Cell& serving = playground.cell(mn.serving_cell);
  const double d = topo::distance(mn.position, serving.center);
  return d < config.prepare_threshold * serving.radius;
}

std::set<topo::NodeId> neighbor_set(const Playground& playground, topo::NodeId cell) {
  const Cell& base = playground.cell(cell);
  std::set<topo::NodeId> out;
  for (const Cell& c : playground.cells()) {
    if (c.access_node == cell) continue;
    if (topo::distance(base.center, c.center) <= 2.0 * base.radius) out.insert(c.access_node);
  }
  return out;
}

topo::HandoverNamespace build_namespace(const Playground& playground) {
  std::map<topo::NodeId, std::set<topo::NodeId>> neighbours;
  for (const Cell& c : playground.cells())
    neighbours[c.access_node] = neighbor_set(playground, c.access_node);
  return topo::HandoverNamespace(std::move(neighbours));
}

std::vector<MobileNodeState> place_uniform(const Playground& playground, unsigned count,
                                           const Config& config, rng::Stream& walk) {
  std::vector<MobileNodeState> out;
  out.reserve(count);
  for (unsigned i = 0; i < count; ++i) {
    MobileNodeState mn;
    mn.id = i;
    mn.position.x = walk.uniform(playground.low().x, playground.high().x);
    mn.position.y = walk.uniform(playground.low().y, playground.high().y);
    mn.heading = walk.uniform(0.0, kTau);
    mn.speed = config.speed_mps;
    mn.serving_cell = playground.nearest_covering_cell(mn.position);
    out.push_back(mn);
  }
  return out;
}

}  // namespace hosim::mobility
