#include "hosim/costs.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hosim::costs {

HopProfile HopProfile::single_fanout(unsigned h_prev_cn, unsigned h_next_cn,
                                     unsigned h_cn_fanout,
                                     std::vector<unsigned> h_fanout_dst) {
  HopProfile hp;
  hp.h_prev_cn = h_prev_cn;
  hp.h_next_cn = h_next_cn;
  hp.h_cn_fanout = h_cn_fanout;
  hp.multicast_edges =
      h_cn_fanout + std::accumulate(h_fanout_dst.begin(), h_fanout_dst.end(), 0u);
  hp.h_fanout_dst = std::move(h_fanout_dst);
  return hp;
}

double pfmip_signalling_cost(const HopProfile& hp, const proto::MessageCatalog& catalog,
                             double failure_prob) {
  if (failure_prob < 0 || failure_prob > 1)
    throw std::invalid_argument("costs: failure probability outside [0, 1]");
  const double binding = static_cast<double>(catalog.binding_pair()) *
                         (hp.h_pmag_anchor + hp.h_nmag_anchor);
  const double tunnel_setup =
      static_cast<double>(hp.h_pmag_nmag) *
      (catalog.handover_init_req + catalog.handover_ack);
  return (1.0 + failure_prob) * (binding + tunnel_setup);
}

double pfmip_delivery_cost(const HopProfile& hp, const proto::MessageCatalog& catalog,
                           double failure_prob, double packet_rate) {
  if (packet_rate < 0) throw std::invalid_argument("costs: negative packet rate");
  const double hops = hp.h_cn_anchor + hp.h_pmag_anchor + hp.h_pmag_nmag;
  const double packet = catalog.tunnel_header + catalog.payload;
  return (1.0 + failure_prob) * packet_rate * hops * packet;
}

double icn_signalling_cost(const HopProfile& hp, const proto::MessageCatalog& catalog) {
  return static_cast<double>(hp.h_prev_cn) * catalog.group_subscribe +
         static_cast<double>(hp.h_next_cn) * catalog.pubisub +
         static_cast<double>(hp.multicast_edges) * catalog.state_update;
}

double icn_delivery_cost(const HopProfile& hp, const proto::MessageCatalog& catalog,
                         double packet_rate, const rlc::CodingStats& stats) {
  if (packet_rate < 0) throw std::invalid_argument("costs: negative packet rate");
  if (stats.epsilon < 0) throw std::invalid_argument("costs: negative coding overhead");
  const double packet = catalog.icn_header + catalog.payload;
  return packet_rate * (1.0 + stats.epsilon) * hp.multicast_edges * packet;
}

void CostLedger::add_signalling(proto::Scheme scheme, double t, double bytes_hops) {
  add(scheme, t, bytes_hops, false);
}

void CostLedger::add_delivery(proto::Scheme scheme, double t, double bytes_hops) {
  add(scheme, t, bytes_hops, true);
}

void CostLedger::add(proto::Scheme scheme, double t, double bytes_hops, bool delivery) {
  if (bytes_hops < 0) throw std::invalid_argument("ledger: negative cost");
  if (bytes_hops == 0) return;
  Bucket& b = buckets_[{scheme, static_cast<long>(std::floor(t))}];
  Bucket& total = totals_[scheme];
  if (delivery) {
    b.delivery += bytes_hops;
    total.delivery += bytes_hops;
  } else {
    b.signalling += bytes_hops;
    total.signalling += bytes_hops;
  }
}

double CostLedger::signalling_total(proto::Scheme scheme) const {
  auto it = totals_.find(scheme);
  return it == totals_.end() ? 0.0 : it->second.signalling;
}

double CostLedger::delivery_total(proto::Scheme scheme) const {
  auto it = totals_.find(scheme);
  return it == totals_.end() ? 0.0 : it->second.delivery;
}

double CostLedger::total(proto::Scheme scheme) const {
  return signalling_total(scheme) + delivery_total(scheme);
}

void CostLedger::write_csv(std::ostream& out) const {
  out << "t,scheme,signalling_bh,delivery_bh\n";
  char line[160];
  for (const auto& [key, bucket] : buckets_) {
    std::snprintf(line, sizeof line, "%ld,%s,%.6f,%.6f\n", key.second,
                  proto::to_string(key.first).c_str(), bucket.signalling, bucket.delivery);
    out << line;
  }
}

namespace {

double per_packet_cost(const HandoverRecord& r, const proto::MessageCatalog& catalog) {
  if (r.scheme == proto::Scheme::pfmipv6) {
    const double hops =
        r.profile.h_cn_anchor + r.profile.h_pmag_anchor + r.profile.h_pmag_nmag;
    return (r.failed ? 2.0 : 1.0) * hops * (catalog.tunnel_header + catalog.payload);
  }
  return static_cast<double>(r.profile.multicast_edges) *
         (catalog.icn_header + catalog.payload);
}

}  // namespace

bool ReconcileReport::passed() const {
  return exact_failures.empty() && signalling_within_tol && delivery_within_tol;
}

std::string ReconcileReport::to_string() const {
  std::ostringstream out;
  out << "reconciliation: " << (passed() ? "PASS" : "FAIL") << "\n"
      << "  handovers checked: " << records_checked << "\n"
      << "  mean signalling  : " << mean_signalling_actual << " (closed form "
      << mean_signalling_expected << ")" << (signalling_within_tol ? "" : "  <- out of tol")
      << "\n"
      << "  delivery rate    : " << delivery_rate_actual << " (closed form "
      << delivery_rate_expected << ")" << (delivery_within_tol ? "" : "  <- out of tol")
      << "\n";
  if (!exact_failures.empty()) {
    out << "  exact mismatches (" << exact_failures.size() << "):\n";
    std::size_t shown = 0;
    for (const auto& m : exact_failures) {
      if (++shown > 10) {
        out << "    ...\n";
        break;
      }
      out << "    handover " << m.record_index << ": " << m.what << " expected "
          << m.expected << " got " << m.actual << "\n";
    }
  }
  return out.str();
}

ReconcileReport reconcile(const std::vector<HandoverRecord>& records,
                          const proto::MessageCatalog& catalog, proto::Scheme scheme,
                          double failure_prob, double packet_rate,
                          const rlc::CodingStats& stats, double rel_tol) {
  ReconcileReport report;
  double sig_actual_sum = 0;
  double sig_expected_sum = 0;
  double del_actual_sum = 0;
  double del_expected_sum = 0;
  double window_sum = 0;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const HandoverRecord& r = records[i];
    if (r.scheme != scheme || r.cancelled || !r.completed) continue;
    ++report.records_checked;

    // Signalling is deterministic given the profile and the failure draw.
    double expected_sig;
    if (scheme == proto::Scheme::pfmipv6) {
      const double base = pfmip_signalling_cost(r.profile, catalog, 0.0);
      expected_sig = (r.failed ? 2.0 : 1.0) * base;
      sig_expected_sum += pfmip_signalling_cost(r.profile, catalog, failure_prob);
    } else {
      expected_sig = icn_signalling_cost(r.profile, catalog);
      sig_expected_sum += expected_sig;
    }
    if (std::abs(expected_sig - r.signalling_bh) > 1e-6)
      report.exact_failures.push_back({i, "signalling", expected_sig, r.signalling_bh});
    sig_actual_sum += r.signalling_bh;

    // So is the per-packet delivery cost inside the execution window.
    const double per_packet = per_packet_cost(r, catalog);
    const double expected_delivery = per_packet * static_cast<double>(r.handover_packets);
    if (std::abs(expected_delivery - r.handover_delivery_bh) > 1e-6)
      report.exact_failures.push_back(
          {i, "window delivery", expected_delivery, r.handover_delivery_bh});

    del_actual_sum += r.handover_delivery_bh;
    window_sum += r.window_s;
    if (scheme == proto::Scheme::pfmipv6)
      del_expected_sum +=
          pfmip_delivery_cost(r.profile, catalog, failure_prob, packet_rate) * r.window_s;
    else
      del_expected_sum += icn_delivery_cost(r.profile, catalog, packet_rate, stats) * r.window_s;
  }

  if (report.records_checked > 0) {
    report.mean_signalling_actual = sig_actual_sum / report.records_checked;
    report.mean_signalling_expected = sig_expected_sum / report.records_checked;
    const double sig_rel = std::abs(report.mean_signalling_actual -
                                    report.mean_signalling_expected) /
                           std::max(report.mean_signalling_expected, 1e-12);
    report.signalling_within_tol = sig_rel <= rel_tol;
  }
  if (window_sum > 0) {
    report.delivery_rate_actual = del_actual_sum / window_sum;
    report.delivery_rate_expected = del_expected_sum / window_sum;
    const double del_rel =
        std::abs(report.delivery_rate_actual - report.delivery_rate_expected) /
        std::max(report.delivery_rate_expected, 1e-12);
    report.delivery_within_tol = del_rel <= rel_tol;
  }
  return report;
}

}  // namespace hosim::costs
