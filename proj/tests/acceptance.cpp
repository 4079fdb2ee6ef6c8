// Acceptance suite: one self-contained check per release criterion, one
// pass/fail line each. Exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hosim/costs.hpp"
#include "hosim/gf.hpp"
#include "hosim/mobility.hpp"
#include "hosim/protocols.hpp"
#include "hosim/rlc.hpp"
#include "hosim/rng.hpp"
#include "hosim/simrun.hpp"
#include "hosim/topology.hpp"

using namespace hosim;
using proto::Scheme;
using topo::NodeId;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;
};

#define REQUIRE_THAT(out, cond, what)                                   \
  do {                                                                  \
    if (!(cond)) {                                                      \
      (out).ok = false;                                                 \
      (out).detail << " [" << (what) << "]";                            \
    }                                                                   \
  } while (0)

bool within_rel(double value, double target, double tol) {
  return std::abs(value - target) <= tol * std::abs(target);
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

// Shared across criteria 7-10.
struct Context {
  sim::SweepTable sweep;
  sim::RunReport mixed;
  sim::SequentSummary sequent;
  bool sweep_ok = false;
  bool mixed_ok = false;
  bool sequent_ok = false;
};

// --------------------------------------------------------------------------

Outcome criterion_field_axioms() {
  Outcome out;
  const double t0 = now_seconds();
  const gf::Field f(4, 0x13);
  for (unsigned a = 0; a < 16; ++a) {
    REQUIRE_THAT(out, f.mul(a, 1) == a, "identity");
    REQUIRE_THAT(out, f.add(a, a) == 0, "additive self-inverse");
    if (a != 0) REQUIRE_THAT(out, f.mul(a, f.inv(a)) == 1, "inverse");
    for (unsigned b = 0; b < 16; ++b) {
      REQUIRE_THAT(out, f.mul(a, b) == f.mul(b, a), "commutativity");
      REQUIRE_THAT(out, f.add(a, b) == f.add(b, a), "additive commutativity");
    }
  }
  rng::Stream rng(1);
  for (int i = 0; i < 20000; ++i) {
    const auto a = static_cast<gf::Element>(rng.uniform_int(16));
    const auto b = static_cast<gf::Element>(rng.uniform_int(16));
    const auto c = static_cast<gf::Element>(rng.uniform_int(16));
    REQUIRE_THAT(out, f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c)), "associativity");
    REQUIRE_THAT(out, f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c)),
                 "distributivity");
  }
  const double elapsed = now_seconds() - t0;
  REQUIRE_THAT(out, elapsed < 1.0, "runtime limit 1 s");
  out.detail << " 256 pairs + 20000 triples in " << elapsed << " s";
  return out;
}

Outcome criterion_decode_probability_monte_carlo() {
  Outcome out;
  const double t0 = now_seconds();
  const gf::Field f(4);
  std::mt19937_64 master(0xD15EA5E);
  for (std::size_t n : {1u, 2u, 4u, 8u}) {
    const int trials = 100000;
    int decodable = 0;
    for (int t = 0; t < trials; ++t) {
      rlc::Decoder dec(n, 1, f);
      rlc::SourceBlock block;
      block.packets.assign(n, std::vector<std::uint8_t>{0x5A});
      for (std::size_t k = 0; k < n; ++k)
        dec.ingest(rlc::encode(block, static_cast<std::uint16_t>(master() & 0xFFFF), f));
      if (dec.ready()) ++decodable;
    }
    const double empirical = static_cast<double>(decodable) / trials;
    const double analytic = rlc::decode_probability(n, n, 16);
    out.detail << " n=" << n << ": " << empirical << " vs " << analytic << ";";
    REQUIRE_THAT(out, std::abs(empirical - analytic) < 0.01, "1% absolute agreement");
  }
  const double elapsed = now_seconds() - t0;
  REQUIRE_THAT(out, elapsed < 30.0, "runtime limit 30 s");
  out.detail << " in " << elapsed << " s";
  return out;
}

Outcome criterion_expected_overhead() {
  Outcome out;
  const auto one = rlc::expected_transmission_count(1, 16);
  REQUIRE_THAT(out, std::abs(one.expected_transmissions - 16.0 / 15.0) < 1e-9,
               "geometric closed form 16/15");

  const gf::Field f(4);
  std::mt19937_64 master(0xFEED);
  const int trials = 100000;
  double sum = 0, sum_sq = 0;
  rlc::SourceBlock block;
  block.packets.assign(16, std::vector<std::uint8_t>{0x11});
  for (int t = 0; t < trials; ++t) {
    rlc::Decoder dec(16, 1, f);
    unsigned k = 0;
    while (!dec.ready()) {
      dec.ingest(rlc::encode(block, static_cast<std::uint16_t>(master() & 0xFFFF), f));
      ++k;
    }
    sum += k;
    sum_sq += static_cast<double>(k) * k;
  }
  const double mc_mean = sum / trials;
  const double variance = (sum_sq - sum * sum / trials) / (trials - 1);
  const double se = std::sqrt(variance / trials);
  const auto sixteen = rlc::expected_transmission_count(16, 16);
  out.detail << " E[K]=" << sixteen.expected_transmissions << " vs MC " << mc_mean
             << " (se " << se << ")";
  REQUIRE_THAT(out, std::abs(mc_mean - sixteen.expected_transmissions) <= 3 * se,
               "within 3 standard errors");
  return out;
}

Outcome criterion_round_trip() {
  Outcome out;
  const gf::Field f(4);
  rng::Stream rng(0xC0FFEE);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(32);
    const std::size_t size = 1 + rng.uniform_int(1024);
    rlc::SourceBlock block;
    block.packets.resize(n);
    for (auto& p : block.packets) {
      p.resize(size);
      for (auto& byte : p) byte = static_cast<std::uint8_t>(rng.uniform_int(256));
    }
    // Collect a full-rank seed set, then ingest it in a shuffled order.
    std::vector<std::uint16_t> seeds;
    {
      rlc::Decoder probe(n, 1, f);
      rlc::SourceBlock tiny;
      tiny.packets.assign(n, std::vector<std::uint8_t>{1});
      while (!probe.ready()) {
        const auto s = static_cast<std::uint16_t>(rng.uniform_int(65536));
        if (probe.ingest(rlc::encode(tiny, s, f))) seeds.push_back(s);
      }
    }
    for (std::size_t i = seeds.size(); i > 1; --i)
      std::swap(seeds[i - 1], seeds[rng.uniform_int(i)]);
    rlc::Decoder dec(n, size, f);
    for (auto s : seeds) dec.ingest(rlc::encode(block, s, f));
    if (!dec.ready() || !(*dec.try_decode() == block)) {
      REQUIRE_THAT(out, false, "round trip broke at trial " + std::to_string(trial));
      break;
    }
  }
  out.detail << " 1000 randomized blocks, arrival order shuffled";
  return out;
}

sim::Scenario micro_scenario(NodeId correspondent) {
  sim::Scenario s;
  s.seed = 11;
  s.duration_s = 30;
  s.failure_prob = 0;
  s.handover_latency_s = 1.0;
  s.pfmip_residual_s = 0.3;
  s.walk.walk_epoch_s = 1e9;
  s.pinned.push_back(sim::PinnedMn{0, 0, 0, correspondent});
  s.playground_bounds = {{-1300, -100, 1300, 100}};
  return s;
}

topo::Topology micro_topology() {
  using Spec = topo::Topology::NodeSpec;
  // Correspondent NAP 13 reaches the serving NAP 10 through core 0; core 1
  // hangs the neighbour NAPs 11/12 and the anchor chain 2-3.
  std::vector<Spec> nodes{
      {0, topo::NodeRole::core, std::nullopt},
      {1, topo::NodeRole::core, std::nullopt},
      {2, topo::NodeRole::core, std::nullopt},
      {3, topo::NodeRole::anchor, std::nullopt},
      {10, topo::NodeRole::access, topo::Vec2{0, 0}},
      {11, topo::NodeRole::access, topo::Vec2{900, 0}},
      {12, topo::NodeRole::access, topo::Vec2{-900, 0}},
      {13, topo::NodeRole::access, topo::Vec2{0, 5000}},
  };
  std::vector<std::pair<NodeId, NodeId>> edges{
      {13, 0}, {0, 10}, {0, 1}, {1, 10}, {1, 11}, {1, 12}, {1, 2}, {2, 3},
  };
  return topo::Topology(std::move(nodes), std::move(edges));
}

Outcome criterion_closed_form_micro() {
  Outcome out;
  const auto report = sim::run(micro_scenario(13), micro_topology());
  REQUIRE_THAT(out, report.completed_handovers(Scheme::icn) == 1, "one ICN handover");
  REQUIRE_THAT(out, report.completed_handovers(Scheme::pfmipv6) == 1,
               "one anchored handover");
  for (const auto& r : report.handovers) {
    if (!r.completed || r.cancelled) continue;
    if (r.scheme == Scheme::icn) {
      REQUIRE_THAT(out, std::abs(r.signalling_bh - 1212.0) < 1e-9,
                   "ICN signalling exactly 1212");
      REQUIRE_THAT(out, r.handover_packets > 0, "traffic in the window");
      const double per_packet =
          r.handover_delivery_bh / static_cast<double>(r.handover_packets);
      REQUIRE_THAT(out, std::abs(per_packet - 5600.0) < 1e-9,
                   "per-packet delivery exactly 5600");
      out.detail << " icn sig " << r.signalling_bh << ", per-packet " << per_packet << ";";
    } else {
      REQUIRE_THAT(out, std::abs(r.signalling_bh - 1456.0) < 1e-9,
                   "anchored signalling exactly 1456");
      out.detail << " pfmipv6 sig " << r.signalling_bh << ";";
    }
  }
  return out;
}

Outcome criterion_stochastic_reconciliation() {
  Outcome out;
  const double t0 = now_seconds();
  const auto topology = micro_topology();
  const proto::MessageCatalog cat;
  const proto::PfmipParams params{0.2, 0.0};
  rng::Stream failure(20240811);

  double total = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    proto::PfmipState st;
    st.cn_attach = 13;
    for (const auto& em :
         proto::pfmip_on_prepare(st, 0, 10, 11, 13, topology, cat, params, failure))
      total += em.bytes_hops();
    proto::pfmip_on_link_down(st, 1);
    for (const auto& em : proto::pfmip_on_link_up(st, 2, 11, topology, cat, params))
      total += em.bytes_hops();
  }
  const double mean = total / n;
  const double expected = 1.2 * 1456.0;
  const double elapsed = now_seconds() - t0;
  out.detail << " mean " << mean << " vs " << expected << " over 10^4 handovers in "
             << elapsed << " s";
  REQUIRE_THAT(out, within_rel(mean, expected, 0.02), "within 2% of (1+P) form");
  REQUIRE_THAT(out, elapsed < 60.0, "runtime limit 60 s");
  return out;
}

Outcome criterion_failure_sweep(Context& ctx) {
  Outcome out;
  const std::vector<double> probs{0.2, 0.3, 0.4, 0.5, 0.6};
  const std::vector<double> lats{1, 2, 3, 4, 5};
  ctx.sweep = sim::experiment_failure_sweep(sim::failure_sweep_base(), probs, lats);
  ctx.sweep_ok = true;

  for (double lat : lats) {
    double prev_pdc = 0;
    for (double p : probs) {
      const auto& pf = ctx.sweep.at(p, lat, Scheme::pfmipv6);
      const auto& icn = ctx.sweep.at(p, lat, Scheme::icn);
      REQUIRE_THAT(out, pf.handovers == 100, "100 anchored handovers per cell");
      REQUIRE_THAT(out, icn.handovers == 100, "100 ICN handovers per cell");
      REQUIRE_THAT(out, pf.pdc_bytes_hops > prev_pdc, "PDC strictly increasing in P");
      prev_pdc = pf.pdc_bytes_hops;
      REQUIRE_THAT(out, pf.pdc_bytes_hops / icn.pdc_bytes_hops > 1.0,
                   "anchored PDC above ICN PDC");
      // The ICN cells must be bit-identical across the failure axis.
      const auto& icn_base = ctx.sweep.at(probs.front(), lat, Scheme::icn);
      REQUIRE_THAT(out, icn.pdc_bytes_hops == icn_base.pdc_bytes_hops,
                   "ICN PDC independent of P");
      REQUIRE_THAT(out, icn.sc_bytes_hops == icn_base.sc_bytes_hops,
                   "ICN SC independent of P");
    }
  }
  for (double p : probs) {
    double prev = 0;
    for (double lat : lats) {
      const auto& pf = ctx.sweep.at(p, lat, Scheme::pfmipv6);
      REQUIRE_THAT(out, pf.pdc_bytes_hops > prev, "PDC strictly increasing in latency");
      prev = pf.pdc_bytes_hops;
    }
  }
  // Delivery scales with (1+P): the 0.6-to-0.2 cells differ by about 4/3.
  for (double lat : lats) {
    const double factor = ctx.sweep.at(0.6, lat, Scheme::pfmipv6).pdc_bytes_hops /
                          ctx.sweep.at(0.2, lat, Scheme::pfmipv6).pdc_bytes_hops;
    REQUIRE_THAT(out, within_rel(factor, 1.6 / 1.2, 0.10), "PDC factor near 4/3");
  }
  // Signalling: the ICN scheme starts more expensive and the gap closes as
  // the anchored scheme's failures mount.
  for (double lat : lats) {
    const double gap_low = ctx.sweep.at(0.2, lat, Scheme::icn).sc_bytes_hops -
                           ctx.sweep.at(0.2, lat, Scheme::pfmipv6).sc_bytes_hops;
    REQUIRE_THAT(out, gap_low > 0, "ICN SC above anchored SC at P=0.2");
    double prev_gap = gap_low;
    for (double p : {0.3, 0.4, 0.5, 0.6}) {
      const double gap = ctx.sweep.at(p, lat, Scheme::icn).sc_bytes_hops -
                         ctx.sweep.at(p, lat, Scheme::pfmipv6).sc_bytes_hops;
      REQUIRE_THAT(out, gap < prev_gap, "SC gap shrinking in P");
      prev_gap = gap;
    }
  }
  const double pf_sc = ctx.sweep.at(0.6, 1.0, Scheme::pfmipv6).sc_bytes_hops;
  const double icn_sc = ctx.sweep.at(0.6, 1.0, Scheme::icn).sc_bytes_hops;
  out.detail << " SC@P=0.6,L=1: pfmipv6 " << pf_sc << " icn " << icn_sc;
  REQUIRE_THAT(out, within_rel(pf_sc, 3e5, 0.30), "anchored SC near 3e5");
  REQUIRE_THAT(out, within_rel(icn_sc, 2.8e5, 0.30), "ICN SC near 2.8e5");
  return out;
}

Outcome criterion_mixed_mode(Context& ctx) {
  Outcome out;
  const double t0 = now_seconds();
  ctx.mixed = sim::experiment_mixed_mode(sim::mixed_mode_base());
  ctx.mixed_ok = true;
  const double icn_total = ctx.mixed.ledger.total(Scheme::icn);
  const double pf_total = ctx.mixed.ledger.total(Scheme::pfmipv6);
  const double ratio = icn_total / pf_total;
  const double elapsed = now_seconds() - t0;
  out.detail << " totals icn " << icn_total << " / pfmipv6 " << pf_total << " = " << ratio
             << " in " << elapsed << " s";
  REQUIRE_THAT(out, icn_total < pf_total, "ICN total below anchored total");
  REQUIRE_THAT(out, within_rel(ratio, 1.45e9 / 1.92e9, 0.25), "ratio near 0.755");
  REQUIRE_THAT(out, elapsed < 300.0, "runtime limit 5 min");
  return out;
}

Outcome criterion_sequent(Context& ctx) {
  Outcome out;
  ctx.sequent = sim::experiment_sequent_handovers(sim::sequent_base());
  ctx.sequent_ok = true;
  const auto& pf = ctx.sequent.pfmipv6;
  const auto& icn = ctx.sequent.icn;
  out.detail << " mean pdc pfmipv6 " << pf.mean_pdc << " icn " << icn.mean_pdc
             << "; mean sc pfmipv6 " << pf.mean_sc << " icn " << icn.mean_sc;
  REQUIRE_THAT(out, pf.handovers == 100 && icn.handovers == 100, "100 of each");
  REQUIRE_THAT(out, pf.mean_pdc > icn.mean_pdc, "PDC ordering anchored > ICN");
  REQUIRE_THAT(out, icn.mean_sc > pf.mean_sc, "SC ordering ICN > anchored");
  REQUIRE_THAT(out, within_rel(pf.mean_pdc, 2e6, 0.30), "anchored PDC near 2e6");
  REQUIRE_THAT(out, within_rel(icn.mean_pdc, 1.85e6, 0.30), "ICN PDC near 1.85e6");
  REQUIRE_THAT(out, within_rel(icn.mean_sc, 2.75e3, 0.30), "ICN SC near 2.75e3");
  REQUIRE_THAT(out, within_rel(pf.mean_sc, 1.25e3, 0.30), "anchored SC near 1.25e3");
  REQUIRE_THAT(out, icn.mean_pdc + icn.mean_sc < pf.mean_pdc + pf.mean_sc,
               "total cost ordering");
  return out;
}

Outcome criterion_zero_loss(const Context& ctx) {
  Outcome out;
  REQUIRE_THAT(out, ctx.sweep_ok && ctx.mixed_ok && ctx.sequent_ok,
               "criteria 7-9 must have produced runs");
  unsigned violations = ctx.mixed.neighborhood_violations +
                        ctx.sequent.report.neighborhood_violations;
  unsigned checked = 0;
  unsigned decode_failures = 0;
  double decode_packets = 0;
  auto scan = [&](const sim::RunReport& report) {
    for (const auto& r : report.handovers) {
      if (r.scheme != Scheme::icn || !r.completed || r.cancelled) continue;
      ++checked;
      if (!r.landing_in_tree) ++violations;
      if (!r.decode_ok) ++decode_failures;
      decode_packets += r.decode_packets_used;
    }
  };
  if (ctx.mixed_ok) scan(ctx.mixed);
  if (ctx.sequent_ok) scan(ctx.sequent.report);
  out.detail << " " << checked << " ICN handovers checked, " << violations
             << " violations";
  REQUIRE_THAT(out, violations == 0, "zero landings outside the prepared tree");
  // Statistical side of the invariant: every landing NAP decoded its block,
  // consuming on average the analytic number of coded packets.
  REQUIRE_THAT(out, decode_failures == 0, "every block recovered at the landing NAP");
  if (checked > 0) {
    const double mean_k = decode_packets / checked;
    const double expected_k =
        ctx.mixed.coding.expected_transmissions;  // same block size everywhere
    out.detail << ", mean coded packets " << mean_k << " vs " << expected_k;
    REQUIRE_THAT(out, within_rel(mean_k, expected_k, 0.05), "mean near E[K]");
  }
  return out;
}

Outcome criterion_determinism() {
  Outcome out;
  sim::Scenario s = sim::mixed_mode_base();
  s.duration_s = 180;
  s.n_mns = 12;
  auto render = [](const sim::RunReport& report) {
    std::ostringstream text;
    report.write_ledger_csv(text);
    report.write_emissions_csv(text);
    report.write_handovers_csv(text);
    return text.str();
  };
  const std::string a = render(sim::run(s));
  const std::string b = render(sim::run(s));
  REQUIRE_THAT(out, a == b, "byte-identical CSV outputs");
  sim::Scenario other = s;
  other.seed += 1;
  REQUIRE_THAT(out, render(sim::run(other)) != a, "seed actually matters");
  out.detail << " " << a.size() << " CSV bytes compared";
  return out;
}

}  // namespace

int main() {
  Context ctx;
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Entry> entries{
      {1, "finite-field axioms, exhaustive + sampled", [] { return criterion_field_axioms(); }},
      {2, "decode probability vs Monte Carlo",
       [] { return criterion_decode_probability_monte_carlo(); }},
      {3, "expected coded transmissions", [] { return criterion_expected_overhead(); }},
      {4, "coded round trips, order independent", [] { return criterion_round_trip(); }},
      {5, "micro-topology closed-form reconciliation",
       [] { return criterion_closed_form_micro(); }},
      {6, "stochastic signalling reconciliation",
       [] { return criterion_stochastic_reconciliation(); }},
      {7, "failure-rate sweep trends", [&ctx] { return criterion_failure_sweep(ctx); }},
      {8, "mixed-mode totals", [&ctx] { return criterion_mixed_mode(ctx); }},
      {9, "sequent handover statistics", [&ctx] { return criterion_sequent(ctx); }},
      {10, "zero-loss invariant", [&ctx] { return criterion_zero_loss(ctx); }},
      {11, "determinism", [] { return criterion_determinism(); }},
  };

  int failures = 0;
  for (const auto& entry : entries) {
    Outcome out;
    try {
      out = entry.fn();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail << " [exception: " << e.what() << "]";
    }
    std::printf("[%s] criterion %2d: %s —%s\n", out.ok ? "PASS" : "FAIL", entry.id,
                entry.name, out.detail.str().c_str());
    std::fflush(stdout);
    if (!out.ok) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
