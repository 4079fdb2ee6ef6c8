#include "hosim/simrun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hosim/gf.hpp"
#include "hosim/rng.hpp"

namespace hosim::sim {

using proto::Scheme;

std::string to_string(PlacementPolicy policy) {
  switch (policy) {
    case PlacementPolicy::random: return "random";
    case PlacementPolicy::near_anchor: return "near_anchor";
    case PlacementPolicy::mid_ring: return "mid_ring";
    case PlacementPolicy::far_anchor: return "far_anchor";
    case PlacementPolicy::far_peer: return "far_peer";
  }
  return "?";
}

PlacementPolicy placement_policy_from_string(const std::string& text) {
  if (text == "random") return PlacementPolicy::random;
  if (text == "near_anchor") return PlacementPolicy::near_anchor;
  if (text == "mid_ring") return PlacementPolicy::mid_ring;
  if (text == "far_anchor") return PlacementPolicy::far_anchor;
  if (text == "far_peer") return PlacementPolicy::far_peer;
  throw std::invalid_argument("scenario: unknown placement policy " + text);
}

void Scenario::validate() const {
  if (duration_s <= 0) throw std::invalid_argument("scenario: duration must be positive");
  if (n_mns < 1) throw std::invalid_argument("scenario: need at least one mobile");
  if (schemes.empty()) throw std::invalid_argument("scenario: no scheme enabled");
  if (handover_latency_s <= 0) throw std::invalid_argument("scenario: latency must be positive");
  if (failure_prob < 0 || failure_prob > 1)
    throw std::invalid_argument("scenario: failure probability outside [0, 1]");
  if (pfmip_residual_s < 0) throw std::invalid_argument("scenario: negative residual");
  if (traffic_bps < 0) throw std::invalid_argument("scenario: negative traffic rate");
  if (rlc_block_packets < 1) throw std::invalid_argument("scenario: coding block too small");
  if (walk.step_dt_s <= 0 || walk.walk_epoch_s <= 0)
    throw std::invalid_argument("scenario: mobility timing must be positive");
  if (walk.prepare_threshold <= 0 || walk.prepare_threshold >= 1)
    throw std::invalid_argument("scenario: prepare threshold must be inside (0, 1)");
  if (cell_radius_m <= 0) throw std::invalid_argument("scenario: radius must be positive");
  catalog.validate();
}

namespace {

nlohmann::json schemes_to_json(const std::vector<Scheme>& schemes) {
  nlohmann::json arr = nlohmann::json::array();
  for (Scheme s : schemes) arr.push_back(proto::to_string(s));
  return arr;
}

std::vector<Scheme> schemes_from_json(const nlohmann::json& arr) {
  std::vector<Scheme> out;
  for (const auto& s : arr) {
    const std::string name = s.get<std::string>();
    if (name == "pfmipv6") out.push_back(Scheme::pfmipv6);
    else if (name == "icn") out.push_back(Scheme::icn);
    else throw std::invalid_argument("scenario: unknown scheme " + name);
  }
  return out;
}

}  // namespace

std::string Scenario::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["duration_s"] = duration_s;
  j["n_mns"] = n_mns;
  j["schemes"] = schemes_to_json(schemes);
  j["handover_latency_s"] = handover_latency_s;
  j["failure_prob"] = failure_prob;
  j["pfmip_residual_s"] = pfmip_residual_s;
  j["traffic_bps"] = traffic_bps;
  j["catalog"] = {{"binding_update", catalog.binding_update},
                  {"binding_ack", catalog.binding_ack},
                  {"handover_init_req", catalog.handover_init_req},
                  {"handover_ack", catalog.handover_ack},
                  {"tunnel_header", catalog.tunnel_header},
                  {"payload", catalog.payload},
                  {"state_update", catalog.state_update},
                  {"group_subscribe", catalog.group_subscribe},
                  {"pubisub", catalog.pubisub},
                  {"icn_header", catalog.icn_header}};
  j["field_bits"] = field_bits;
  j["reduction_poly"] = reduction_poly;
  j["rlc_block_packets"] = rlc_block_packets;
  j["tail_tol"] = tail_tol;
  j["topology"] = {{"core_count", topology.core_count},
                   {"access_count", topology.access_count},
                   {"core_edge_prob", topology.core_edge_prob},
                   {"cell_spacing_m", topology.cell_spacing_m},
                   {"cell_jitter_m", topology.cell_jitter_m},
                   {"grid_cols", topology.grid_cols}};
  j["topology_file"] = topology_file;
  j["cell_radius_m"] = cell_radius_m;
  j["walk"] = {{"walk_epoch_s", walk.walk_epoch_s},
               {"step_dt_s", walk.step_dt_s},
               {"prepare_threshold", walk.prepare_threshold},
               {"speed_mps", walk.speed_mps}};
  j["scripted"] = {{"enabled", scripted.enabled},
                   {"handovers_per_mn", scripted.handovers_per_mn},
                   {"start_policy", to_string(scripted.start_policy)},
                   {"confine_to_start_set", scripted.confine_to_start_set}};
  j["cn_policy"] = to_string(cn_policy);
  if (!pinned.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const PinnedMn& p : pinned)
      arr.push_back({{"x", p.x}, {"y", p.y}, {"heading", p.heading},
                     {"correspondent", p.correspondent}});
    j["pinned"] = arr;
  }
  if (playground_bounds) j["playground_bounds"] = *playground_bounds;
  j["record_trajectories"] = record_trajectories;
  return j.dump(2) + "\n";
}

Scenario Scenario::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Scenario s;  // defaults fill anything the file leaves out
  s.seed = j.value("seed", s.seed);
  s.duration_s = j.value("duration_s", s.duration_s);
  s.n_mns = j.value("n_mns", s.n_mns);
  if (j.contains("schemes")) s.schemes = schemes_from_json(j["schemes"]);
  s.handover_latency_s = j.value("handover_latency_s", s.handover_latency_s);
  s.failure_prob = j.value("failure_prob", s.failure_prob);
  s.pfmip_residual_s = j.value("pfmip_residual_s", s.pfmip_residual_s);
  s.traffic_bps = j.value("traffic_bps", s.traffic_bps);
  if (j.contains("catalog")) {
    const auto& c = j["catalog"];
    s.catalog.binding_update = c.value("binding_update", s.catalog.binding_update);
    s.catalog.binding_ack = c.value("binding_ack", s.catalog.binding_ack);
    s.catalog.handover_init_req = c.value("handover_init_req", s.catalog.handover_init_req);
    s.catalog.handover_ack = c.value("handover_ack", s.catalog.handover_ack);
    s.catalog.tunnel_header = c.value("tunnel_header", s.catalog.tunnel_header);
    s.catalog.payload = c.value("payload", s.catalog.payload);
    s.catalog.state_update = c.value("state_update", s.catalog.state_update);
    s.catalog.group_subscribe = c.value("group_subscribe", s.catalog.group_subscribe);
    s.catalog.pubisub = c.value("pubisub", s.catalog.pubisub);
    s.catalog.icn_header = c.value("icn_header", s.catalog.icn_header);
  }
  s.field_bits = j.value("field_bits", s.field_bits);
  s.reduction_poly = j.value("reduction_poly", s.reduction_poly);
  s.rlc_block_packets = j.value("rlc_block_packets", s.rlc_block_packets);
  s.tail_tol = j.value("tail_tol", s.tail_tol);
  if (j.contains("topology")) {
    const auto& t = j["topology"];
    s.topology.core_count = t.value("core_count", s.topology.core_count);
    s.topology.access_count = t.value("access_count", s.topology.access_count);
    s.topology.core_edge_prob = t.value("core_edge_prob", s.topology.core_edge_prob);
    s.topology.cell_spacing_m = t.value("cell_spacing_m", s.topology.cell_spacing_m);
    s.topology.cell_jitter_m = t.value("cell_jitter_m", s.topology.cell_jitter_m);
    s.topology.grid_cols = t.value("grid_cols", s.topology.grid_cols);
  }
  s.topology_file = j.value("topology_file", s.topology_file);
  s.cell_radius_m = j.value("cell_radius_m", s.cell_radius_m);
  if (j.contains("walk")) {
    const auto& w = j["walk"];
    s.walk.walk_epoch_s = w.value("walk_epoch_s", s.walk.walk_epoch_s);
    s.walk.step_dt_s = w.value("step_dt_s", s.walk.step_dt_s);
    s.walk.prepare_threshold = w.value("prepare_threshold", s.walk.prepare_threshold);
    s.walk.speed_mps = w.value("speed_mps", s.walk.speed_mps);
  }
  if (j.contains("scripted")) {
    const auto& sc = j["scripted"];
    s.scripted.enabled = sc.value("enabled", s.scripted.enabled);
    s.scripted.handovers_per_mn = sc.value("handovers_per_mn", s.scripted.handovers_per_mn);
    if (sc.contains("start_policy"))
      s.scripted.start_policy =
          placement_policy_from_string(sc["start_policy"].get<std::string>());
    s.scripted.confine_to_start_set =
        sc.value("confine_to_start_set", s.scripted.confine_to_start_set);
  }
  if (j.contains("cn_policy"))
    s.cn_policy = placement_policy_from_string(j["cn_policy"].get<std::string>());
  if (j.contains("pinned")) {
    for (const auto& p : j["pinned"]) {
      PinnedMn pin;
      pin.x = p.value("x", 0.0);
      pin.y = p.value("y", 0.0);
      pin.heading = p.value("heading", 0.0);
      pin.correspondent = p.value("correspondent", topo::NodeId{0});
      s.pinned.push_back(pin);
    }
  }
  if (j.contains("playground_bounds"))
    s.playground_bounds = j["playground_bounds"].get<std::array<double, 4>>();
  s.record_trajectories = j.value("record_trajectories", s.record_trajectories);
  return s;
}

// ---------------------------------------------------------------------------
// Engine.
// ---------------------------------------------------------------------------

namespace {

enum class EventKind { step, link_up, complete, tunnel_end };

struct Event {
  double t = 0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::step;
  std::uint32_t mn = 0;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.seq > b.seq;
  }
};

struct EngineMn {
  mobility::MobileNodeState mob;
  proto::PfmipState pf;
  proto::IcnState icn;
  topo::NodeId cn_attach = 0;
  double last_accrual = 0;
  long pf_rec = -1;   // open record indices, -1 when none
  long icn_rec = -1;

  // Scripted motion.
  topo::Vec2 waypoint;
  topo::NodeId waypoint_cell = 0;
  bool has_waypoint = false;
  unsigned handovers_done = 0;
  bool parked = false;

  // Scheme-independent guard: no new preparation before this time, so the
  // schemes see identical handover timelines under common random numbers.
  double busy_until = 0;
};

class Engine {
 public:
  static mobility::Playground make_playground(const Scenario& scenario,
                                              const topo::Topology& topology) {
    if (!scenario.playground_bounds) {
      return mobility::Playground::from_topology(topology, scenario.cell_radius_m);
    }
    const auto& b = *scenario.playground_bounds;
    std::vector<mobility::Cell> cells;
    for (topo::NodeId id : topology.access_nodes())
      cells.push_back({id, topology.position(id), scenario.cell_radius_m});
    return mobility::Playground({b[0], b[1]}, {b[2], b[3]}, std::move(cells));
  }

  Engine(const Scenario& scenario, const topo::Topology& topology)
      : sc_(scenario),
        topo_(topology),
        playground_(make_playground(scenario, topology)),
        ns_(mobility::build_namespace(playground_)),
        field_(scenario.field_bits, scenario.reduction_poly),
        mobility_rng_(scenario.seed, "mobility"),
        traffic_rng_(scenario.seed, "traffic"),
        failure_rng_(scenario.seed, "failure"),
        coding_rng_(scenario.seed, "coding") {
    sc_.validate();
    pf_on_ = std::count(sc_.schemes.begin(), sc_.schemes.end(), Scheme::pfmipv6) > 0;
    icn_on_ = std::count(sc_.schemes.begin(), sc_.schemes.end(), Scheme::icn) > 0;
    rate_ = sc_.packet_rate();
    coding_ = rlc::expected_transmission_count(sc_.rlc_block_packets, field_.size(),
                                               sc_.tail_tol);
    pf_params_ = proto::PfmipParams{sc_.failure_prob, sc_.pfmip_residual_s};
  }

  RunReport run() {
    setup_mobiles();

    report_.packet_rate = rate_;
    report_.failure_prob = sc_.failure_prob;
    report_.catalog = sc_.catalog;
    report_.coding = coding_;

    for (std::uint32_t i = 0; i < mns_.size(); ++i) {
      record_trajectory(0.0, mns_[i]);
      process_triggers(mns_[i], 0.0);
      schedule(sc_.walk.step_dt_s, EventKind::step, i);
    }

    double end_t = sc_.duration_s;
    while (!queue_.empty()) {
      const Event ev = queue_.top();
      if (ev.t > sc_.duration_s + 1e-9) break;
      queue_.pop();
      if (ev.t < watermark_ - 1e-9)
        throw std::logic_error("simrun: event dequeued out of order");
      watermark_ = std::max(watermark_, ev.t);
      dispatch(ev);
      if (all_parked() && pending_link_events_ == 0) {
        end_t = watermark_;
        break;
      }
    }
    if (sc_.scripted.enabled && all_parked()) end_t = std::min(end_t, watermark_);

    for (auto& mn : mns_) accrue(mn, end_t);
    report_.end_time = end_t;
    return std::move(report_);
  }

 private:
  void schedule(double t, EventKind kind, std::uint32_t mn) {
    if (t < watermark_ - 1e-9)
      throw std::logic_error("simrun: attempt to schedule an event in the past");
    if (kind == EventKind::link_up || kind == EventKind::complete ||
        kind == EventKind::tunnel_end)
      ++pending_link_events_;
    queue_.push(Event{t, seq_++, kind, mn});
  }

  bool all_parked() const {
    if (!sc_.scripted.enabled) return false;
    return std::all_of(mns_.begin(), mns_.end(),
                       [](const EngineMn& m) { return m.parked; });
  }

  // Placement rings by hop distance to the anchor. near_anchor: the
  // innermost sixth; mid_ring: the band from the inner sixth up to the
  // median; far_anchor: the outermost third.
  std::vector<topo::NodeId> policy_subset(PlacementPolicy policy) const {
    std::vector<topo::NodeId> access = topo_.access_nodes();
    if (policy == PlacementPolicy::random) return access;
    std::sort(access.begin(), access.end(), [this](topo::NodeId a, topo::NodeId b) {
      const unsigned da = topo_.hop_distance(a, topo_.anchor());
      const unsigned db = topo_.hop_distance(b, topo_.anchor());
      if (da != db) return da < db;
      return a < b;
    });
    const std::size_t third = std::max<std::size_t>(1, access.size() / 3);
    const std::size_t sixth = std::max<std::size_t>(1, access.size() / 6);
    const std::size_t half = std::max<std::size_t>(sixth + 1, access.size() / 2);
    switch (policy) {
      case PlacementPolicy::near_anchor:
        return {access.begin(), access.begin() + sixth};
      case PlacementPolicy::mid_ring:
        return {access.begin() + sixth, access.begin() + std::min(half, access.size())};
      case PlacementPolicy::far_anchor:
        return {access.end() - third, access.end()};
      default:
        return access;
    }
  }

  // Farthest access node from the origin; ties break toward nodes far from
  // the anchor, which keeps the anchored detour long for peripheral peers.
  topo::NodeId farthest_access_from(topo::NodeId origin) const {
    topo::NodeId best = origin;
    unsigned best_d = 0;
    unsigned best_anchor_d = 0;
    for (topo::NodeId id : topo_.access_nodes()) {
      const unsigned d = topo_.hop_distance(origin, id);
      const unsigned da = topo_.hop_distance(id, topo_.anchor());
      if (d > best_d || (d == best_d && da > best_anchor_d)) {
        best_d = d;
        best_anchor_d = da;
        best = id;
      }
    }
    return best;
  }

  void setup_mobiles() {
    if (!sc_.pinned.empty()) {
      mns_.resize(sc_.pinned.size());
      for (std::uint32_t i = 0; i < mns_.size(); ++i) {
        const PinnedMn& pin = sc_.pinned[i];
        EngineMn& mn = mns_[i];
        mn.mob.id = i;
        mn.mob.position = {pin.x, pin.y};
        mn.mob.heading = pin.heading;
        mn.mob.speed = sc_.walk.speed_mps;
        mn.mob.serving_cell = playground_.nearest_covering_cell(mn.mob.position);
        mn.cn_attach = pin.correspondent;
        mn.mob.correspondent = pin.correspondent;
        mn.pf.mn_id = i;
        mn.pf.cn_attach = pin.correspondent;
        mn.pf.anchor = topo_.anchor();
        mn.icn.mn_id = i;
        mn.icn.nap_cn = pin.correspondent;
      }
      return;
    }
    mns_.resize(sc_.n_mns);
    if (sc_.scripted.enabled) {
      const auto starts = policy_subset(sc_.scripted.start_policy);
      if (sc_.scripted.confine_to_start_set)
        scripted_set_.assign(starts.begin(), starts.end());
      for (std::uint32_t i = 0; i < sc_.n_mns; ++i) {
        EngineMn& mn = mns_[i];
        const topo::NodeId start =
            starts[mobility_rng_.uniform_int(starts.size())];
        mn.mob.id = i;
        mn.mob.position = playground_.cell(start).center;
        mn.mob.speed = sc_.walk.speed_mps;
        mn.mob.serving_cell = start;
      }
    } else {
      auto placed = mobility::place_uniform(playground_, sc_.n_mns, sc_.walk, mobility_rng_);
      for (std::uint32_t i = 0; i < sc_.n_mns; ++i) mns_[i].mob = placed[i];
    }

    const auto cn_subset = sc_.cn_policy == PlacementPolicy::far_peer
                               ? std::vector<topo::NodeId>{}
                               : policy_subset(sc_.cn_policy);
    for (auto& mn : mns_) {
      mn.cn_attach = sc_.cn_policy == PlacementPolicy::far_peer
                         ? farthest_access_from(mn.mob.serving_cell)
                         : cn_subset[mobility_rng_.uniform_int(cn_subset.size())];
      mn.mob.correspondent = mn.cn_attach;
      mn.pf.mn_id = mn.mob.id;
      mn.pf.cn_attach = mn.cn_attach;
      mn.pf.anchor = topo_.anchor();
      mn.icn.mn_id = mn.mob.id;
      mn.icn.nap_cn = mn.cn_attach;
    }

    if (sc_.scripted.enabled) {
      for (auto& mn : mns_) pick_next_waypoint(mn);
    }
  }

  void pick_next_waypoint(EngineMn& mn) {
    const topo::NodeId from = mn.has_waypoint ? mn.waypoint_cell : mn.mob.serving_cell;
    const auto nbrs = mobility::neighbor_set(playground_, from);
    if (nbrs.empty())
      throw std::logic_error("simrun: scripted mobile stranded in an isolated cell");
    std::vector<topo::NodeId> sorted;
    if (!scripted_set_.empty()) {
      for (topo::NodeId n : nbrs)
        if (std::binary_search(scripted_set_.begin(), scripted_set_.end(), n))
          sorted.push_back(n);
    }
    if (sorted.empty()) sorted.assign(nbrs.begin(), nbrs.end());
    mn.waypoint_cell = sorted[mobility_rng_.uniform_int(sorted.size())];
    mn.waypoint = playground_.cell(mn.waypoint_cell).center;
    mn.has_waypoint = true;
  }

  void dispatch(const Event& ev) {
    EngineMn& mn = mns_[ev.mn];
    switch (ev.kind) {
      case EventKind::step: on_step(mn, ev.t); break;
      case EventKind::link_up:
        --pending_link_events_;
        on_link_up(mn, ev.t);
        break;
      case EventKind::complete:
        --pending_link_events_;
        on_complete(mn, ev.t);
        break;
      case EventKind::tunnel_end:
        --pending_link_events_;
        on_tunnel_end(mn, ev.t);
        break;
    }
  }

  void on_step(EngineMn& mn, double t) {
    if (mn.parked) return;
    accrue(mn, t);
    if (sc_.scripted.enabled) {
      scripted_move(mn);
    } else {
      mn.mob = mobility::step(mn.mob, sc_.walk.step_dt_s, playground_, sc_.walk,
                              mobility_rng_);
    }
    record_trajectory(t, mn);
    process_triggers(mn, t);
    const double next = t + sc_.walk.step_dt_s;
    if (!mn.parked && next <= sc_.duration_s + 1e-9)
      schedule(next, EventKind::step, mn.mob.id);
  }

  void scripted_move(EngineMn& mn) {
    const double step_len = mn.mob.speed * sc_.walk.step_dt_s;
    topo::Vec2 d{mn.waypoint.x - mn.mob.position.x, mn.waypoint.y - mn.mob.position.y};
    const double dist = std::hypot(d.x, d.y);
    if (dist <= step_len) {
      mn.mob.position = mn.waypoint;
      pick_next_waypoint(mn);
    } else {
      mn.mob.position.x += d.x / dist * step_len;
      mn.mob.position.y += d.y / dist * step_len;
    }
  }

  void process_triggers(EngineMn& mn, double t) {
    while (true) {
      if (mobility::should_cancel(mn.mob, playground_, sc_.walk)) {
        on_cancel(mn, t);
        continue;
      }
      const auto trig = mobility::detect_trigger(mn.mob, t, playground_, sc_.walk);
      if (!trig) break;
      if (trig->kind == mobility::TriggerKind::prepare) {
        // A gateway still draining the previous handover will not open a
        // new one; the trigger fires again on a later step. The guard is
        // time-based so every scheme sees the same handover timeline.
        if (t < mn.busy_until + 1e-9) break;
        if ((pf_on_ && mn.pf.phase != proto::PfPhase::idle) ||
            (icn_on_ && mn.icn.phase != proto::IcnPhase::idle))
          break;
        on_prepare(mn, t);
      } else if (trig->kind == mobility::TriggerKind::link_down) {
        on_link_down(mn, t);
        break;
      }
    }
  }

  topo::NodeId predict_target(const EngineMn& mn) const {
    topo::NodeId covering = mn.mob.serving_cell;
    double covering_d = std::numeric_limits<double>::max();
    topo::NodeId nearest = mn.mob.serving_cell;
    double nearest_d = std::numeric_limits<double>::max();
    for (const mobility::Cell& c : playground_.cells()) {
      if (c.access_node == mn.mob.serving_cell) continue;
      const double d = topo::distance(mn.mob.position, c.center);
      if (d <= c.radius && d < covering_d) {
        covering_d = d;
        covering = c.access_node;
      }
      if (d < nearest_d) {
        nearest_d = d;
        nearest = c.access_node;
      }
    }
    return covering_d < std::numeric_limits<double>::max() ? covering : nearest;
  }

  void emit(std::vector<proto::SignalEmission>&& emissions, long rec_idx) {
    for (const auto& em : emissions) {
      ledger().add_signalling(em.scheme, em.time, em.bytes_hops());
      if (rec_idx >= 0)
        report_.handovers[static_cast<std::size_t>(rec_idx)].signalling_bh +=
            em.bytes_hops();
      report_.emissions.push_back(em);
    }
  }

  costs::CostLedger& ledger() { return report_.ledger; }

  void on_prepare(EngineMn& mn, double t) {
    const topo::NodeId serving = mn.mob.serving_cell;
    const topo::NodeId predicted = predict_target(mn);

    if (pf_on_) {
      costs::HandoverRecord rec;
      rec.scheme = Scheme::pfmipv6;
      rec.mn_id = mn.mob.id;
      rec.t_prepare = t;
      rec.source_cell = serving;
      rec.profile.h_cn_anchor = topo_.hop_distance(mn.cn_attach, topo_.anchor());
      rec.profile.h_pmag_anchor = topo_.hop_distance(serving, topo_.anchor());
      rec.profile.h_nmag_anchor = topo_.hop_distance(predicted, topo_.anchor());
      rec.profile.h_pmag_nmag = topo_.hop_distance(serving, predicted);
      report_.handovers.push_back(rec);
      mn.pf_rec = static_cast<long>(report_.handovers.size()) - 1;
      auto ems = proto::pfmip_on_prepare(mn.pf, t, serving, predicted, mn.cn_attach, topo_,
                                         sc_.catalog, pf_params_, failure_rng_);
      report_.handovers[mn.pf_rec].failed = mn.pf.reactive;
      emit(std::move(ems), mn.pf_rec);
    }
    if (icn_on_) {
      costs::HandoverRecord rec;
      rec.scheme = Scheme::icn;
      rec.mn_id = mn.mob.id;
      rec.t_prepare = t;
      rec.source_cell = serving;
      report_.handovers.push_back(rec);
      mn.icn_rec = static_cast<long>(report_.handovers.size()) - 1;
      auto ems = proto::icn_on_prepare(mn.icn, t, serving, mn.cn_attach, topo_, ns_,
                                       sc_.catalog);
      auto& stored = report_.handovers[mn.icn_rec];
      stored.profile.h_prev_cn = topo_.hop_distance(serving, mn.cn_attach);
      stored.profile.h_cn_fanout = topo_.hop_distance(mn.cn_attach, mn.icn.route.fanout);
      for (topo::NodeId d : mn.icn.route.destinations)
        stored.profile.h_fanout_dst.push_back(topo_.hop_distance(mn.icn.route.fanout, d));
      stored.profile.multicast_edges =
          static_cast<unsigned>(topo::tree_edge_count(mn.icn.route.fid));
      emit(std::move(ems), mn.icn_rec);
    }
    mn.mob.phase = mobility::Phase::ho_prepared;
  }

  void on_cancel(EngineMn& mn, double t) {
    if (pf_on_) {
      proto::pfmip_cancel(mn.pf);
      close_record(mn.pf_rec, t, true);
      mn.pf_rec = -1;
    }
    if (icn_on_) {
      proto::icn_cancel(mn.icn);
      close_record(mn.icn_rec, t, true);
      mn.icn_rec = -1;
    }
    mn.mob.phase = mobility::Phase::idle;
  }

  void close_record(long idx, double t, bool cancelled) {
    if (idx < 0) return;
    auto& rec = report_.handovers[static_cast<std::size_t>(idx)];
    rec.cancelled = cancelled;
    rec.completed = true;
    (void)t;
  }

  void on_link_down(EngineMn& mn, double t) {
    if (pf_on_) {
      proto::pfmip_on_link_down(mn.pf, t);
      report_.handovers[mn.pf_rec].t_link_down = t;
    }
    if (icn_on_) {
      proto::icn_on_link_down(mn.icn, t);
      report_.handovers[mn.icn_rec].t_link_down = t;
    }
    mn.mob.phase = mobility::Phase::ho_executing;
    schedule(t + sc_.handover_latency_s, EventKind::link_up, mn.mob.id);
  }

  void on_link_up(EngineMn& mn, double t) {
    accrue(mn, t);
    const topo::NodeId landing = playground_.nearest_covering_cell(mn.mob.position);
    const topo::NodeId source = mn.mob.serving_cell;
    const bool in_neighborhood =
        landing == source || ns_.neighbours(source).count(landing) > 0;
    if (!in_neighborhood) ++report_.neighborhood_violations;

    if (pf_on_) {
      auto& rec = report_.handovers[mn.pf_rec];
      rec.t_link_up = t;
      rec.target_cell = landing;
      rec.target_in_neighborhood = in_neighborhood;
      auto ems = proto::pfmip_on_link_up(mn.pf, t, landing, topo_, sc_.catalog, pf_params_);
      emit(std::move(ems), mn.pf_rec);
    }
    if (icn_on_) {
      auto& rec = report_.handovers[mn.icn_rec];
      rec.t_link_up = t;
      rec.target_cell = landing;
      rec.target_in_neighborhood = in_neighborhood;
      auto ems = proto::icn_on_link_up(mn.icn, t, landing, topo_, sc_.catalog);
      rec.landing_in_tree = true;  // icn_on_link_up would have thrown otherwise
      rec.profile.h_next_cn = topo_.hop_distance(landing, mn.icn.nap_cn);
      run_decode_check(rec);
      emit(std::move(ems), mn.icn_rec);
    }
    mn.mob.serving_cell = landing;
    mn.mob.phase = mobility::Phase::ho_completing;
    mn.busy_until = t + sc_.pfmip_residual_s;
    schedule(t, EventKind::complete, mn.mob.id);
    if (pf_on_) schedule(mn.pf.tunnel_until, EventKind::tunnel_end, mn.mob.id);
  }

  // Statistical zero-loss check: the landing NAP replays one coded block
  // exactly as the decoder would see it.
  void run_decode_check(costs::HandoverRecord& rec) {
    const std::size_t n = sc_.rlc_block_packets;
    rlc::SourceBlock block;
    block.packets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      block.packets[i].resize(sc_.catalog.payload);
      for (std::size_t b = 0; b < block.packets[i].size(); ++b)
        block.packets[i][b] = static_cast<std::uint8_t>((131 * i + 17 * b + 7) & 0xFF);
    }
    rlc::Decoder decoder(n, sc_.catalog.payload, field_);
    unsigned used = 0;
    const unsigned cap = static_cast<unsigned>(4 * n + 64);
    while (!decoder.ready() && used < cap) {
      const auto seed = static_cast<std::uint16_t>(coding_rng_.uniform_int(65536));
      decoder.ingest(rlc::encode(block, seed, field_));
      ++used;
    }
    rec.decode_packets_used = used;
    const auto decoded = decoder.try_decode();
    rec.decode_ok = decoded.has_value() && *decoded == block;
  }

  void on_complete(EngineMn& mn, double t) {
    if (pf_on_) {
      proto::pfmip_on_complete(mn.pf, t);
      // The record stays open until the tunnel stops draining.
    }
    if (icn_on_) {
      proto::icn_on_complete(mn.icn, t);
      auto& rec = report_.handovers[mn.icn_rec];
      rec.window_s = rec.t_link_up - rec.t_link_down;
      close_record(mn.icn_rec, t, false);
      mn.icn_rec = -1;
    }
    mn.mob.phase = mobility::Phase::idle;
    ++mn.handovers_done;
    if (sc_.scripted.enabled && mn.handovers_done >= sc_.scripted.handovers_per_mn)
      mn.parked = true;
  }

  void on_tunnel_end(EngineMn& mn, double t) {
    if (!pf_on_) return;
    accrue(mn, t);
    mn.pf.phase = proto::PfPhase::idle;
    if (mn.pf_rec >= 0) {
      auto& rec = report_.handovers[mn.pf_rec];
      rec.window_s = mn.pf.tunnel_until - rec.t_link_down;
      close_record(mn.pf_rec, t, false);
      mn.pf_rec = -1;
    }
  }

  void accrue(EngineMn& mn, double to) {
    double a = mn.last_accrual;
    if (to <= a + 1e-12) return;
    while (a < to - 1e-12) {
      double b = std::min(std::floor(a) + 1.0, to);
      if (b <= a + 1e-12) b = to;
      const double seg = b - a;
      const std::uint64_t base = traffic_rng_.poisson(rate_ * seg);
      if (pf_on_) {
        const double cost = proto::pfmip_data_plane_tick(mn.pf, a, seg, base,
                                                         mn.mob.serving_cell, topo_,
                                                         sc_.catalog);
        ledger().add_delivery(Scheme::pfmipv6, a, cost);
        if (mn.pf_rec >= 0 && proto::pfmip_tunnel_active(mn.pf, a)) {
          auto& rec = report_.handovers[mn.pf_rec];
          rec.handover_delivery_bh += cost;
          rec.handover_packets += base;
        }
      }
      if (icn_on_) {
        const bool multicast = proto::icn_multicast_active(mn.icn);
        const std::uint64_t extra =
            multicast ? coding_rng_.poisson(rate_ * coding_.epsilon * seg) : 0;
        const double cost = proto::icn_data_plane_tick(mn.icn, a, seg, base, extra,
                                                       mn.mob.serving_cell, topo_,
                                                       sc_.catalog);
        ledger().add_delivery(Scheme::icn, a, cost);
        if (mn.icn_rec >= 0 && mn.icn.phase == proto::IcnPhase::executing) {
          auto& rec = report_.handovers[mn.icn_rec];
          rec.handover_delivery_bh += cost;
          rec.handover_packets += base + extra;
        }
      }
      a = b;
    }
    mn.last_accrual = to;
  }

  void record_trajectory(double t, const EngineMn& mn) {
    if (!sc_.record_trajectories) return;
    report_.trajectories.push_back(
        {t, mn.mob.id, mn.mob.position.x, mn.mob.position.y, mn.mob.serving_cell});
  }

  Scenario sc_;
  const topo::Topology& topo_;
  mobility::Playground playground_;
  topo::HandoverNamespace ns_;
  gf::Field field_;
  rng::Stream mobility_rng_;
  rng::Stream traffic_rng_;
  rng::Stream failure_rng_;
  rng::Stream coding_rng_;

  bool pf_on_ = false;
  bool icn_on_ = false;
  double rate_ = 0;
  rlc::CodingStats coding_;
  proto::PfmipParams pf_params_;

  std::vector<EngineMn> mns_;
  std::vector<topo::NodeId> scripted_set_;  // sorted; empty means unconfined
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t seq_ = 0;
  double watermark_ = 0;
  unsigned pending_link_events_ = 0;
  RunReport report_;
};

}  // namespace

RunReport run(const Scenario& scenario, const topo::Topology& topology) {
  Engine engine(scenario, topology);
  return engine.run();
}

RunReport run(const Scenario& scenario) {
  scenario.validate();
  if (!scenario.topology_file.empty()) {
    std::ifstream in(scenario.topology_file);
    if (!in) throw std::runtime_error("simrun: cannot open " + scenario.topology_file);
    const topo::Topology topology = topo::Topology::load_edge_list(in);
    return run(scenario, topology);
  }
  const topo::Topology topology =
      topo::Topology::generate(scenario.topology, rng::derive_seed(scenario.seed, "topology"));
  return run(scenario, topology);
}

// ---------------------------------------------------------------------------
// Report accessors and CSV output.
// ---------------------------------------------------------------------------

unsigned RunReport::completed_handovers(Scheme scheme) const {
  unsigned n = 0;
  for (const auto& r : handovers)
    if (r.scheme == scheme && r.completed && !r.cancelled) ++n;
  return n;
}

double RunReport::handover_delivery_total(Scheme scheme) const {
  double total = 0;
  for (const auto& r : handovers)
    if (r.scheme == scheme && r.completed && !r.cancelled) total += r.handover_delivery_bh;
  return total;
}

double RunReport::handover_signalling_total(Scheme scheme) const {
  double total = 0;
  for (const auto& r : handovers)
    if (r.scheme == scheme && r.completed && !r.cancelled) total += r.signalling_bh;
  return total;
}

costs::ReconcileReport RunReport::reconcile(Scheme scheme, double rel_tol) const {
  return costs::reconcile(handovers, catalog, scheme, failure_prob, packet_rate, coding,
                          rel_tol);
}

void RunReport::write_ledger_csv(std::ostream& out) const { ledger.write_csv(out); }

void RunReport::write_emissions_csv(std::ostream& out) const {
  out << "time,scheme,mn_id,msg_kind,bytes,hops,bytes_hops\n";
  char line[200];
  for (const auto& em : emissions) {
    std::snprintf(line, sizeof line, "%.6f,%s,%u,%s,%u,%u,%.6f\n", em.time,
                  proto::to_string(em.scheme).c_str(), em.mn_id,
                  proto::to_string(em.kind).c_str(), em.size_bytes, em.hops,
                  em.bytes_hops());
    out << line;
  }
}

void RunReport::write_handovers_csv(std::ostream& out) const {
  out << "scheme,mn_id,t_prepare,t_link_down,t_link_up,source_cell,target_cell,cancelled,"
         "completed,failed,signalling_bh,handover_delivery_bh,handover_packets,window_s,"
         "multicast_edges,landing_in_tree,target_in_neighborhood,decode_packets_used,"
         "decode_ok\n";
  char line[400];
  for (const auto& r : handovers) {
    std::snprintf(line, sizeof line,
                  "%s,%u,%.6f,%.6f,%.6f,%u,%u,%d,%d,%d,%.6f,%.6f,%llu,%.6f,%u,%d,%d,%u,%d\n",
                  proto::to_string(r.scheme).c_str(), r.mn_id, r.t_prepare, r.t_link_down,
                  r.t_link_up, r.source_cell, r.target_cell, r.cancelled ? 1 : 0,
                  r.completed ? 1 : 0, r.failed ? 1 : 0, r.signalling_bh,
                  r.handover_delivery_bh,
                  static_cast<unsigned long long>(r.handover_packets), r.window_s,
                  r.profile.multicast_edges, r.landing_in_tree ? 1 : 0,
                  r.target_in_neighborhood ? 1 : 0, r.decode_packets_used,
                  r.decode_ok ? 1 : 0);
    out << line;
  }
}

void RunReport::write_trajectories_csv(std::ostream& out) const {
  out << "t,mn_id,x,y,serving_cell\n";
  char line[160];
  for (const auto& s : trajectories) {
    std::snprintf(line, sizeof line, "%.3f,%u,%.3f,%.3f,%u\n", s.t, s.mn_id, s.x, s.y,
                  s.serving_cell);
    out << line;
  }
}

std::string RunReport::summary() const {
  std::ostringstream out;
  out << "simulated " << end_time << " s, packet rate " << packet_rate << " pkt/s\n";
  for (Scheme scheme : {Scheme::pfmipv6, Scheme::icn}) {
    const unsigned n = completed_handovers(scheme);
    if (n == 0 && ledger.total(scheme) == 0) continue;
    out << "  " << proto::to_string(scheme) << ": " << n << " handovers, signalling "
        << ledger.signalling_total(scheme) << " B*H, delivery "
        << ledger.delivery_total(scheme) << " B*H, total " << ledger.total(scheme)
        << " B*H\n";
  }
  out << "  neighborhood violations: " << neighborhood_violations << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Experiments.
// ---------------------------------------------------------------------------

const SweepRow& SweepTable::at(double failure_prob, double latency_s,
                               Scheme scheme) const {
  for (const auto& row : rows)
    if (row.scheme == scheme && std::abs(row.failure_prob - failure_prob) < 1e-9 &&
        std::abs(row.latency_s - latency_s) < 1e-9)
      return row;
  throw std::out_of_range("sweep: no such cell");
}

void SweepTable::write_csv(std::ostream& out) const {
  out << "failure_prob,latency_s,scheme,handovers,pdc_bytes_hops,sc_bytes_hops\n";
  char line[200];
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "%.2f,%.2f,%s,%u,%.6f,%.6f\n", row.failure_prob,
                  row.latency_s, proto::to_string(row.scheme).c_str(), row.handovers,
                  row.pdc_bytes_hops, row.sc_bytes_hops);
    out << line;
  }
}

SweepTable experiment_failure_sweep(const Scenario& base,
                                    const std::vector<double>& failure_probs,
                                    const std::vector<double>& latencies) {
  Scenario scenario = base;
  scenario.scripted.enabled = true;
  const topo::Topology topology =
      topo::Topology::generate(scenario.topology, rng::derive_seed(scenario.seed, "topology"));

  SweepTable table;
  for (double latency : latencies) {
    Scenario icn_sc = scenario;
    icn_sc.schemes = {Scheme::icn};
    icn_sc.handover_latency_s = latency;
    icn_sc.failure_prob = 0;
    const RunReport icn_report = run(icn_sc, topology);

    for (double p : failure_probs) {
      Scenario pf_sc = scenario;
      pf_sc.schemes = {Scheme::pfmipv6};
      pf_sc.handover_latency_s = latency;
      pf_sc.failure_prob = p;
      const RunReport pf_report = run(pf_sc, topology);
      table.rows.push_back({p, latency, Scheme::pfmipv6,
                            pf_report.completed_handovers(Scheme::pfmipv6),
                            pf_report.handover_delivery_total(Scheme::pfmipv6),
                            pf_report.handover_signalling_total(Scheme::pfmipv6)});
      // The ICN scheme has no failure dependence; the same run fills every
      // cell of this latency column.
      table.rows.push_back({p, latency, Scheme::icn,
                            icn_report.completed_handovers(Scheme::icn),
                            icn_report.handover_delivery_total(Scheme::icn),
                            icn_report.handover_signalling_total(Scheme::icn)});
    }
  }
  return table;
}

RunReport experiment_mixed_mode(const Scenario& base) {
  Scenario scenario = base;
  scenario.scripted.enabled = false;
  scenario.failure_prob = 0;  // isolate scheme differences from failure draws
  scenario.schemes = {Scheme::pfmipv6, Scheme::icn};
  return run(scenario);
}

const SequentSummary::SchemeStats& SequentSummary::of(Scheme scheme) const {
  return scheme == Scheme::pfmipv6 ? pfmipv6 : icn;
}

void SequentSummary::write_csv(std::ostream& out) const {
  out << "scheme,handovers,mean_pdc_bh,median_pdc_bh,mean_sc_bh,median_sc_bh\n";
  char line[240];
  for (Scheme scheme : {Scheme::pfmipv6, Scheme::icn}) {
    const SchemeStats& s = of(scheme);
    std::snprintf(line, sizeof line, "%s,%u,%.6f,%.6f,%.6f,%.6f\n",
                  proto::to_string(scheme).c_str(), s.handovers, s.mean_pdc, s.median_pdc,
                  s.mean_sc, s.median_sc);
    out << line;
  }
}

namespace {

SequentSummary::SchemeStats scheme_stats(const RunReport& report, Scheme scheme) {
  std::vector<double> pdc;
  std::vector<double> sc;
  for (const auto& r : report.handovers) {
    if (r.scheme != scheme || !r.completed || r.cancelled) continue;
    pdc.push_back(r.handover_delivery_bh);
    sc.push_back(r.signalling_bh);
  }
  SequentSummary::SchemeStats out;
  out.handovers = static_cast<unsigned>(pdc.size());
  if (pdc.empty()) return out;
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  out.mean_pdc = mean(pdc);
  out.median_pdc = median(pdc);
  out.mean_sc = mean(sc);
  out.median_sc = median(sc);
  return out;
}

}  // namespace

SequentSummary experiment_sequent_handovers(const Scenario& base) {
  Scenario scenario = base;
  scenario.scripted.enabled = true;
  scenario.schemes = {Scheme::pfmipv6, Scheme::icn};

  SequentSummary summary;
  summary.report = run(scenario);
  summary.pfmipv6 = scheme_stats(summary.report, Scheme::pfmipv6);
  summary.icn = scheme_stats(summary.report, Scheme::icn);
  return summary;
}

// ---------------------------------------------------------------------------
// Calibrated experiment bases.
// ---------------------------------------------------------------------------

Scenario default_scenario() { return Scenario{}; }

Scenario failure_sweep_base(std::uint64_t seed) {
  Scenario s;
  s.seed = seed;
  s.duration_s = 36000;  // generous cap; the run stops at the handover quota
  s.n_mns = 10;
  s.scripted.enabled = true;
  s.scripted.handovers_per_mn = 10;  // 100 handovers in total
  s.scripted.start_policy = PlacementPolicy::mid_ring;
  s.scripted.confine_to_start_set = true;
  s.cn_policy = PlacementPolicy::far_peer;
  s.failure_prob = 0.2;
  return s;
}

Scenario mixed_mode_base(std::uint64_t seed) {
  Scenario s;
  s.seed = seed;
  s.duration_s = 1800;
  s.n_mns = 35;
  s.handover_latency_s = 1.0;
  s.failure_prob = 0;
  return s;
}

Scenario sequent_base(std::uint64_t seed) {
  Scenario s;
  s.seed = seed;
  s.duration_s = 36000;
  s.n_mns = 10;
  s.scripted.enabled = true;
  s.scripted.handovers_per_mn = 10;
  s.scripted.start_policy = PlacementPolicy::near_anchor;
  s.scripted.confine_to_start_set = true;
  s.cn_policy = PlacementPolicy::far_peer;
  s.failure_prob = 0;
  return s;
}

}  // namespace hosim::sim
