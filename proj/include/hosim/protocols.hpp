#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hosim/mobility.hpp"
#include "hosim/rng.hpp"
#include "hosim/topology.hpp"

namespace hosim::proto {

enum class Scheme { pfmipv6, icn };

std::string to_string(Scheme scheme);

/// Control and data message sizes in bytes.
struct MessageCatalog {
  unsigned binding_update = 76;      // anchor binding registration
  unsigned binding_ack = 76;
  unsigned handover_init_req = 104;  // gateway-to-gateway tunnel setup
  unsigned handover_ack = 168;
  unsigned tunnel_header = 40;       // IP-in-IP encapsulation per data packet
  unsigned payload = 1024;           // mean data payload
  unsigned state_update = 102;       // replicated session state, multicast
  unsigned group_subscribe = 102;    // neighbourhood group subscription
  unsigned pubisub = 166;            // publish with implicit subscribe
  unsigned icn_header = 96;          // ICN data packet header

  unsigned binding_pair() const { return binding_update + binding_ack; }

  /// Throws std::invalid_argument unless every size is positive.
  void validate() const;
};

enum class MsgKind {
  binding_update,
  binding_ack,
  handover_init_req,
  handover_ack,
  group_subscribe,
  state_update,
  pubisub,
};

std::string to_string(MsgKind kind);
Scheme scheme_of(MsgKind kind);
unsigned size_of(MsgKind kind, const MessageCatalog& catalog);

/// One control message sent over a known number of hops.
struct SignalEmission {
  double time = 0;
  Scheme scheme = Scheme::pfmipv6;
  std::uint32_t mn_id = 0;
  MsgKind kind = MsgKind::binding_update;
  unsigned size_bytes = 0;
  unsigned hops = 0;

  double bytes_hops() const { return static_cast<double>(size_bytes) * hops; }
};

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised when a mobile lands on a cell the handover never prepared. Under
/// the mobility invariants this cannot happen; if it does, the run is
/// invalid and aborts.
class UnpreparedTargetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Anchored fast-handover scheme (predictive with reactive re-execution).
// ---------------------------------------------------------------------------

enum class PfPhase { idle, initiated, forwarding, draining };

struct PfmipState {
  std::uint32_t mn_id = 0;
  PfPhase phase = PfPhase::idle;
  bool reactive = false;  // this handover failed predictively; signalling and
                          // buffered traffic are re-run once on attach
  topo::NodeId pmag = 0;
  topo::NodeId nmag = 0;
  topo::NodeId anchor = 0;
  topo::NodeId cn_attach = 0;
  double t_prepare = 0;
  double t_link_down = 0;
  double t_link_up = 0;
  double tunnel_until = 0;
};

struct PfmipParams {
  double failure_prob = 0.0;
  double residual_s = 0.3;  // tunnel keeps forwarding this long after attach
};

/// Preparation: handover initiation request/ack between the gateways plus
/// binding update/ack pairs from both gateways to the anchor. Draws the
/// failure outcome for this handover.
std::vector<SignalEmission> pfmip_on_prepare(PfmipState& st, double t, topo::NodeId serving,
                                             topo::NodeId predicted_target,
                                             topo::NodeId cn_attach,
                                             const topo::Topology& topology,
                                             const MessageCatalog& catalog,
                                             const PfmipParams& params,
                                             rng::Stream& failure);

void pfmip_on_link_down(PfmipState& st, double t);

/// Attach at the new gateway. A failed predictive handover re-emits the full
/// signalling set here (reactive re-execution over the same hop counts).
std::vector<SignalEmission> pfmip_on_link_up(PfmipState& st, double t, topo::NodeId landing,
                                             const topo::Topology& topology,
                                             const MessageCatalog& catalog,
                                             const PfmipParams& params);

void pfmip_on_complete(PfmipState& st, double t);
void pfmip_cancel(PfmipState& st);

/// Tunnelled forwarding is active from link_down until residual_s past
/// link_up.
bool pfmip_tunnel_active(const PfmipState& st, double t);

/// Bytes*Hops for one data packet at time t: anchor-tunnelled delivery over
/// the full detour while the tunnel is up (doubled when this handover drew a
/// failure, covering re-delivery), anchored two-leg delivery otherwise.
double pfmip_packet_cost(const PfmipState& st, double t, topo::NodeId serving,
                         const topo::Topology& topology, const MessageCatalog& catalog);

// ---------------------------------------------------------------------------
// ICN multicast scheme with coded delivery during handover.
// ---------------------------------------------------------------------------

enum class IcnPhase { idle, prepared, executing, completing };

struct IcnState {
  std::uint32_t mn_id = 0;
  IcnPhase phase = IcnPhase::idle;
  topo::NodeId nap_prev = 0;  // serving attachment point at preparation
  topo::NodeId nap_cn = 0;    // correspondent's attachment point
  topo::NodeId nap_next = 0;  // landing attachment point, set at link_up
  topo::MulticastRoute route; // valid while prepared/executing
  double t_prepare = 0;
  double t_link_down = 0;
  double t_link_up = 0;
};

/// Preparation: group subscription to the correspondent NAP, multicast
/// forwarding identifier over the serving NAP and its whole neighbourhood,
/// and the state-update message replicated across every tree edge. Data
/// delivery switches to coded multicast over the same tree.
std::vector<SignalEmission> icn_on_prepare(IcnState& st, double t, topo::NodeId serving,
                                           topo::NodeId cn_attach,
                                           const topo::Topology& topology,
                                           const topo::HandoverNamespace& ns,
                                           const MessageCatalog& catalog);

void icn_on_link_down(IcnState& st, double t);

/// Attach at the landing NAP: publish-with-implicit-subscribe back to the
/// correspondent NAP, after which delivery reverts to unicast. Throws
/// UnpreparedTargetError if the landing NAP is not in the prepared tree.
std::vector<SignalEmission> icn_on_link_up(IcnState& st, double t, topo::NodeId landing,
                                           const topo::Topology& topology,
                                           const MessageCatalog& catalog);

void icn_on_complete(IcnState& st, double t);
void icn_cancel(IcnState& st);

bool icn_multicast_active(const IcnState& st);

/// Bytes*Hops for one data packet: every tree edge while the coded multicast
/// runs, the direct unicast path otherwise.
double icn_packet_cost(const IcnState& st, topo::NodeId serving,
                       const topo::Topology& topology, const MessageCatalog& catalog);

// ---------------------------------------------------------------------------
// Data plane accrual, one segment at a time.
// ---------------------------------------------------------------------------

/// Delivery cost contributed by `base_packets` data packets generated over
/// [t, t+dt) under the scheme's current mode. dt == 0 contributes nothing.
double pfmip_data_plane_tick(const PfmipState& st, double t, double dt,
                             std::uint64_t base_packets, topo::NodeId serving,
                             const topo::Topology& topology, const MessageCatalog& catalog);

/// Same for the ICN scheme. extra_coded_packets is the coding overhead draw
/// (rate R*epsilon) and is only meaningful while the multicast is active.
double icn_data_plane_tick(const IcnState& st, double t, double dt,
                           std::uint64_t base_packets, std::uint64_t extra_coded_packets,
                           topo::NodeId serving, const topo::Topology& topology,
                           const MessageCatalog& catalog);

}  // namespace hosim::proto
