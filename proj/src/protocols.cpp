#include "hosim/protocols.hpp"

#include <algorithm>

namespace hosim::proto {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::pfmipv6 ? "pfmipv6" : "icn";
}

void MessageCatalog::validate() const {
  const unsigned sizes[] = {binding_update, binding_ack,  handover_init_req,
                            handover_ack,   tunnel_header, payload,
                            state_update,   group_subscribe, pubisub, icn_header};
  for (unsigned s : sizes)
    if (s == 0) throw std::invalid_argument("catalog: message sizes must be positive");
}

std::string to_string(MsgKind kind) {
  switch (kind) {
    case MsgKind::binding_update: return "binding_update";
    case MsgKind::binding_ack: return "binding_ack";
    case MsgKind::handover_init_req: return "handover_init_req";
    case MsgKind::handover_ack: return "handover_ack";
    case MsgKind::group_subscribe: return "group_subscribe";
    case MsgKind::state_update: return "state_update";
    case MsgKind::pubisub: return "pubisub";
  }
  return "?";
}

Scheme scheme_of(MsgKind kind) {
  switch (kind) {
    case MsgKind::binding_update:
    case MsgKind::binding_ack:
    case MsgKind::handover_init_req:
    case MsgKind::handover_ack:
      return Scheme::pfmipv6;
    case MsgKind::group_subscribe:
    case MsgKind::state_update:
    case MsgKind::pubisub:
      return Scheme::icn;
  }
  return Scheme::pfmipv6;
}

unsigned size_of(MsgKind kind, const MessageCatalog& catalog) {
  switch (kind) {
    case MsgKind::binding_update: return catalog.binding_update;
    case MsgKind::binding_ack: return catalog.binding_ack;
    case MsgKind::handover_init_req: return catalog.handover_init_req;
    case MsgKind::handover_ack: return catalog.handover_ack;
    case MsgKind::group_subscribe: return catalog.group_subscribe;
    case MsgKind::state_update: return catalog.state_update;
    case MsgKind::pubisub: return catalog.pubisub;
  }
  return 0;
}

namespace {

SignalEmission make_emission(double t, std::uint32_t mn, MsgKind kind, unsigned hops,
                             const MessageCatalog& catalog) {
  return SignalEmission{t, scheme_of(kind), mn, kind, size_of(kind, catalog), hops};
}

// The full signalling set of one anchored fast handover: binding pairs from
// both gateways to the anchor, initiation request and ack between them.
std::vector<SignalEmission> pfmip_signalling_set(const PfmipState& st, double t,
                                                 const topo::Topology& topology,
                                                 const MessageCatalog& catalog) {
  const unsigned h_pm = topology.hop_distance(st.pmag, st.anchor);
  const unsigned h_nm = topology.hop_distance(st.nmag, st.anchor);
  const unsigned h_pn = topology.hop_distance(st.pmag, st.nmag);
  return {
      make_emission(t, st.mn_id, MsgKind::handover_init_req, h_pn, catalog),
      make_emission(t, st.mn_id, MsgKind::handover_ack, h_pn, catalog),
      make_emission(t, st.mn_id, MsgKind::binding_update, h_pm, catalog),
      make_emission(t, st.mn_id, MsgKind::binding_ack, h_pm, catalog),
      make_emission(t, st.mn_id, MsgKind::binding_update, h_nm, catalog),
      make_emission(t, st.mn_id, MsgKind::binding_ack, h_nm, catalog),
  };
}

}  // namespace

std::vector<SignalEmission> pfmip_on_prepare(PfmipState& st, double t, topo::NodeId serving,
                                             topo::NodeId predicted_target,
                                             topo::NodeId cn_attach,
                                             const topo::Topology& topology,
                                             const MessageCatalog& catalog,
                                             const PfmipParams& params,
                                             rng::Stream& failure) {
  if (st.phase != PfPhase::idle)
    throw ProtocolError("pfmip: prepare while a handover is in progress");
  st.phase = PfPhase::initiated;
  st.pmag = serving;
  st.nmag = predicted_target;
  st.anchor = topology.anchor();
  st.cn_attach = cn_attach;
  st.reactive = failure.bernoulli(params.failure_prob);
  st.t_prepare = t;
  return pfmip_signalling_set(st, t, topology, catalog);
}

void pfmip_on_link_down(PfmipState& st, double t) {
  if (st.phase != PfPhase::initiated)
    throw ProtocolError("pfmip: link_down without preparation");
  st.phase = PfPhase::forwarding;
  st.t_link_down = t;
}

std::vector<SignalEmission> pfmip_on_link_up(PfmipState& st, double t, topo::NodeId landing,
                                             const topo::Topology& topology,
                                             const MessageCatalog& catalog,
                                             const PfmipParams& params) {
  if (st.phase != PfPhase::forwarding)
    throw ProtocolError("pfmip: link_up without link_down");
  st.phase = PfPhase::draining;
  st.t_link_up = t;
  st.tunnel_until = t + params.residual_s;
  (void)landing;  // the tunnel endpoints were fixed at preparation
  if (!st.reactive) return {};
  // Reactive re-execution: the same message set, opposite direction, same
  // hop counts.
  return pfmip_signalling_set(st, t, topology, catalog);
}

void pfmip_on_complete(PfmipState& st, double t) {
  if (st.phase != PfPhase::draining)
    throw ProtocolError("pfmip: complete without link_up");
  if (t >= st.tunnel_until) st.phase = PfPhase::idle;
  // Otherwise the tunnel is still draining; the caller closes the handover
  // when tunnel_until passes (see pfmip_tunnel_active).
}

void pfmip_cancel(PfmipState& st) {
  if (st.phase != PfPhase::initiated)
    throw ProtocolError("pfmip: cancel outside the prepared phase");
  st.phase = PfPhase::idle;
  st.reactive = false;
}

bool pfmip_tunnel_active(const PfmipState& st, double t) {
  if (st.phase == PfPhase::forwarding) return true;
  if (st.phase == PfPhase::draining) return t < st.tunnel_until;
  return false;
}

double pfmip_packet_cost(const PfmipState& st, double t, topo::NodeId serving,
                         const topo::Topology& topology, const MessageCatalog& catalog) {
  const double packet = catalog.tunnel_header + catalog.payload;
  const topo::NodeId anchor = topology.anchor();
  if (pfmip_tunnel_active(st, t)) {
    const unsigned hops = topology.hop_distance(st.cn_attach, anchor) +
                          topology.hop_distance(anchor, st.pmag) +
                          topology.hop_distance(st.pmag, st.nmag);
    const double redelivery = st.reactive ? 2.0 : 1.0;
    return redelivery * hops * packet;
  }
  const unsigned hops = topology.hop_distance(st.cn_attach, anchor) +
                        topology.hop_distance(anchor, serving);
  return static_cast<double>(hops) * packet;
}

std::vector<SignalEmission> icn_on_prepare(IcnState& st, double t, topo::NodeId serving,
                                           topo::NodeId cn_attach,
                                           const topo::Topology& topology,
                                           const topo::HandoverNamespace& ns,
                                           const MessageCatalog& catalog) {
  if (st.phase != IcnPhase::idle)
    throw ProtocolError("icn: prepare while a handover is in progress");
  st.phase = IcnPhase::prepared;
  st.nap_prev = serving;
  st.nap_cn = cn_attach;
  st.t_prepare = t;

  // Destinations: the serving NAP plus its whole handover neighbourhood.
  // The correspondent NAP drops out if it happens to be in the set; it
  // already originates the stream.
  std::vector<topo::NodeId> dsts{serving};
  for (topo::NodeId n : ns.neighbours(serving)) dsts.push_back(n);
  dsts.erase(std::remove(dsts.begin(), dsts.end(), cn_attach), dsts.end());
  if (dsts.empty())
    throw ProtocolError("icn: no destination left for the handover multicast");
  st.route = topology.multicast_fid(cn_attach, dsts);

  const unsigned h_ab = topology.hop_distance(serving, cn_attach);
  const auto tree_edges = static_cast<unsigned>(topo::tree_edge_count(st.route.fid));
  return {
      make_emission(t, st.mn_id, MsgKind::group_subscribe, h_ab, catalog),
      // One copy of the state update crosses every edge of the tree.
      make_emission(t, st.mn_id, MsgKind::state_update, tree_edges, catalog),
  };
}

void icn_on_link_down(IcnState& st, double t) {
  if (st.phase != IcnPhase::prepared)
    throw ProtocolError("icn: link_down without preparation");
  st.phase = IcnPhase::executing;
  st.t_link_down = t;
}

std::vector<SignalEmission> icn_on_link_up(IcnState& st, double t, topo::NodeId landing,
                                           const topo::Topology& topology,
                                           const MessageCatalog& catalog) {
  if (st.phase != IcnPhase::executing)
    throw ProtocolError("icn: link_up without link_down");
  const bool prepared = std::binary_search(st.route.destinations.begin(),
                                           st.route.destinations.end(), landing) ||
                        landing == st.route.source;
  if (!prepared)
    throw UnpreparedTargetError("icn: mobile landed on unprepared cell " +
                                std::to_string(landing));
  st.phase = IcnPhase::completing;
  st.nap_next = landing;
  st.t_link_up = t;
  const unsigned h_cb = topology.hop_distance(landing, st.nap_cn);
  return {make_emission(t, st.mn_id, MsgKind::pubisub, h_cb, catalog)};
}

void icn_on_complete(IcnState& st, double t) {
  if (st.phase != IcnPhase::completing)
    throw ProtocolError("icn: complete without link_up");
  st.phase = IcnPhase::idle;
  (void)t;
}

void icn_cancel(IcnState& st) {
  if (st.phase != IcnPhase::prepared)
    throw ProtocolError("icn: cancel outside the prepared phase");
  st.phase = IcnPhase::idle;
  st.route = topo::MulticastRoute{};
}

bool icn_multicast_active(const IcnState& st) {
  return st.phase == IcnPhase::prepared || st.phase == IcnPhase::executing;
}

double icn_packet_cost(const IcnState& st, topo::NodeId serving,
                       const topo::Topology& topology, const MessageCatalog& catalog) {
  const double packet = catalog.icn_header + catalog.payload;
  if (icn_multicast_active(st))
    return static_cast<double>(topo::tree_edge_count(st.route.fid)) * packet;
  if (st.nap_cn == serving) return 0.0;  // both ends on one attachment point
  return static_cast<double>(topology.hop_distance(st.nap_cn, serving)) * packet;
}

double pfmip_data_plane_tick(const PfmipState& st, double t, double dt,
                             std::uint64_t base_packets, topo::NodeId serving,
                             const topo::Topology& topology, const MessageCatalog& catalog) {
  if (dt < 0) throw std::invalid_argument("pfmip: negative tick");
  if (dt == 0 || base_packets == 0) return 0.0;
  return static_cast<double>(base_packets) *
         pfmip_packet_cost(st, t, serving, topology, catalog);
}

double icn_data_plane_tick(const IcnState& st, double t, double dt,
                           std::uint64_t base_packets, std::uint64_t extra_coded_packets,
                           topo::NodeId serving, const topo::Topology& topology,
                           const MessageCatalog& catalog) {
  if (dt < 0) throw std::invalid_argument("icn: negative tick");
  if (dt == 0) return 0.0;
  (void)t;
  const std::uint64_t packets =
      base_packets + (icn_multicast_active(st) ? extra_coded_packets : 0);
  if (packets == 0) return 0.0;
  return static_cast<double>(packets) * icn_packet_cost(st, serving, topology, catalog);
}

}  // namespace hosim::proto
