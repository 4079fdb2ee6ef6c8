#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hosim/protocols.hpp"
#include "hosim/rlc.hpp"

namespace hosim::costs {

/// Hop counts of one handover, the inputs of the closed-form cost formulas.
/// The multicast fields describe a single-fan-out decomposition of the tree;
/// multicast_edges is its directed edge count, which is what both the
/// simulator's event accounting and the delivery formulas use (the two
/// coincide whenever the tree really has a single fan-out node).
struct HopProfile {
  unsigned h_cn_anchor = 0;      // correspondent attachment <-> anchor
  unsigned h_pmag_anchor = 0;    // previous gateway <-> anchor
  unsigned h_nmag_anchor = 0;    // next gateway <-> anchor
  unsigned h_pmag_nmag = 0;      // previous <-> next gateway

  unsigned h_prev_cn = 0;        // previous NAP <-> correspondent NAP
  unsigned h_next_cn = 0;        // landing NAP <-> correspondent NAP
  unsigned h_cn_fanout = 0;      // correspondent NAP -> fan-out node
  std::vector<unsigned> h_fanout_dst;  // fan-out node -> each prepared NAP
  unsigned multicast_edges = 0;        // directed edges of the multicast tree

  /// Profile for a tree with one fan-out node; multicast_edges is the leg sum.
  static HopProfile single_fanout(unsigned h_prev_cn, unsigned h_next_cn,
                                  unsigned h_cn_fanout, std::vector<unsigned> h_fanout_dst);
};

/// Signalling Bytes*Hops of one anchored fast handover, including the
/// expected reactive re-execution: (1+P) * {|binding pair|*(h_pm + h_nm) +
/// h_pn*(|init req| + |ack|)}.
double pfmip_signalling_cost(const HopProfile& hp, const proto::MessageCatalog& catalog,
                             double failure_prob);

/// Delivery Bytes*Hops per second while the anchored tunnel forwards:
/// (1+P) * R * (h_cn_anchor + h_pmag_anchor + h_pmag_nmag) * (tunnel hdr + payload).
double pfmip_delivery_cost(const HopProfile& hp, const proto::MessageCatalog& catalog,
                           double failure_prob, double packet_rate);

/// Signalling Bytes*Hops of one ICN handover: group subscription over
/// h_prev_cn, publish-with-implicit-subscribe over h_next_cn, and one state
/// update per multicast tree edge.
double icn_signalling_cost(const HopProfile& hp, const proto::MessageCatalog& catalog);

/// Delivery Bytes*Hops per second of the coded multicast:
/// R * (1+epsilon) * multicast_edges * (icn hdr + payload).
double icn_delivery_cost(const HopProfile& hp, const proto::MessageCatalog& catalog,
                         double packet_rate, const rlc::CodingStats& stats);

/// Accumulated costs per scheme, bucketed per second for time series.
/// Append-only; amounts must be non-negative, so totals are monotone.
class CostLedger {
 public:
  void add_signalling(proto::Scheme scheme, double t, double bytes_hops);
  void add_delivery(proto::Scheme scheme, double t, double bytes_hops);

  double signalling_total(proto::Scheme scheme) const;
  double delivery_total(proto::Scheme scheme) const;
  double total(proto::Scheme scheme) const;

  struct Bucket {
    double signalling = 0;
    double delivery = 0;
  };
  /// Keyed by (scheme, floor(t)).
  const std::map<std::pair<proto::Scheme, long>, Bucket>& buckets() const { return buckets_; }

  /// CSV rows: t,scheme,signalling_bh,delivery_bh
  void write_csv(std::ostream& out) const;

 private:
  void add(proto::Scheme scheme, double t, double bytes_hops, bool delivery);

  std::map<std::pair<proto::Scheme, long>, Bucket> buckets_;
  std::map<proto::Scheme, Bucket> totals_;
};

/// Everything the simulator learned about one handover under one scheme.
struct HandoverRecord {
  proto::Scheme scheme = proto::Scheme::pfmipv6;
  std::uint32_t mn_id = 0;
  double t_prepare = 0;
  double t_link_down = 0;
  double t_link_up = 0;
  topo::NodeId source_cell = 0;
  topo::NodeId target_cell = 0;
  bool cancelled = false;
  bool completed = false;  // reached its natural end before the run stopped
  bool failed = false;     // anchored scheme's failure draw
  HopProfile profile;
  double signalling_bh = 0;          // control bytes*hops actually emitted
  double handover_delivery_bh = 0;   // delivery accrued in the execution window
  std::uint64_t handover_packets = 0;
  double window_s = 0;               // execution window length
  bool landing_in_tree = false;      // ICN
  bool target_in_neighborhood = false;
  unsigned decode_packets_used = 0;  // ICN: coded packets until full rank
  bool decode_ok = false;            // ICN: block recovered bit-exact
};

/// Event-counted costs checked against the closed forms. Deterministic
/// quantities (signalling, per-packet delivery cost) must match exactly;
/// per-second delivery rates are stochastic and compared in aggregate
/// against the (1+P)-weighted closed form within `rel_tol`.
struct ReconcileReport {
  struct Mismatch {
    std::size_t record_index = 0;
    std::string what;
    double expected = 0;
    double actual = 0;
  };

  std::size_t records_checked = 0;
  std::vector<Mismatch> exact_failures;
  double mean_signalling_actual = 0;
  double mean_signalling_expected = 0;  // (1+P)-weighted closed form
  double delivery_rate_actual = 0;      // aggregate bytes*hops per window second
  double delivery_rate_expected = 0;
  bool signalling_within_tol = true;
  bool delivery_within_tol = true;

  bool passed() const;
  std::string to_string() const;
};

ReconcileReport reconcile(const std::vector<HandoverRecord>& records,
                          const proto::MessageCatalog& catalog, proto::Scheme scheme,
                          double failure_prob, double packet_rate,
                          const rlc::CodingStats& stats, double rel_tol);

}  // namespace hosim::costs
