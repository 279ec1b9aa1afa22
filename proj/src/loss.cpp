#include "ubsim/loss.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace ubsim::engine {

namespace {

enum class EvKind : std::uint8_t { arrive, opack, ack, nak, sack, rto };

struct Ev {
  EvKind kind;
  std::uint32_t psn = 0;  // arrive/opack psn, ack/nak/sack cum
  std::uint64_t bitmap = 0;
  std::uint64_t gen = 0;
};

struct Timing {
  double pre = 0;     // host work before the NIC
  double tx = 0;      // NIC TX pipeline latency
  double target = 0;  // target side, NIC RX through response TX
  double post = 0;    // initiator side after the response lands
  double ctrl = 0;    // NAK/SACK generation at the target NIC
  double refetch = 0; // extra host-memory fetch before a retransmit
  double service = 0; // NIC TX pipeline occupancy
};

Timing timing_for(Stack s, const cost::CostParams& p) {
  const auto d = cost::roundtrip_decompose(s, wire::Opcode::WRITE, p);
  Timing t;
  for (const auto& c : d.components) {
    if (c.name == "NIC TX pipeline") {
      t.tx = c.ns;
      continue;
    }
    switch (c.side) {
      case cost::Side::initiator_pre: t.pre += c.ns; break;
      case cost::Side::target: t.target += c.ns; break;
      case cost::Side::initiator_post: t.post += c.ns; break;
      default: break;
    }
  }
  t.post += d.sched_ns;
  const Stack exec = cost::executing_stack(s, wire::Opcode::WRITE);
  t.ctrl = p.nic_ns(exec);
  t.refetch = state::is_ub(s) ? 0.0 : p.pcie_dma_read;
  t.service = p.nic_service_ns(exec);
  return t;
}

}  // namespace

LossResult run_loss_stream(const LossConfig& cfg) {
  using namespace transport;
  if (cfg.depth == 0) throw ConfigInvalid("depth must be >= 1");
  cost::validate(cfg.params);
  cost::CostParams p = cfg.params;
  p.wire_delay = cfg.link.delay_ns;
  const Timing tm = timing_for(cfg.stack, p);
  const Scheme scheme = cfg.scheme();
  const std::uint32_t data_flits = wire::flit_count(wire::Opcode::WRITE, cfg.payload);

  LossResult res;
  res.rtt_estimate_ns = cost::measured_ns(cfg.stack, wire::Opcode::READ, p);
  Rng loss_rng(cfg.seed, "loss");
  Rng jitter_rng(cfg.seed, "jitter");
  LinkConfig ctrl_link = cfg.link;
  ctrl_link.loss_rate = 0;

  TxWindow tx(cfg.window);
  RxState rx(scheme);
  RtoTimer rto(res.rtt_estimate_ns, cfg.rto_multiplier);
  std::uint64_t rto_gen = 0;
  EventQueue<Ev> q;

  const std::uint64_t n = cfg.ops;
  std::vector<Tick> post_time;
  std::vector<std::uint32_t> attempts;
  std::vector<char> done, placed;
  std::vector<Tick> last_retx;
  std::deque<Tick> waiting;  // app posts blocked on the window
  std::uint64_t posted = 0, completed = 0;
  Tick tx_free = 0, last_done = 0;
  std::int64_t nak_sent_for = -1;
  auto& st = res.stats;

  auto ensure = [&](std::uint32_t psn) {
    if (post_time.size() <= psn) {
      post_time.resize(psn + 1, 0);
      attempts.resize(psn + 1, 0);
      done.resize(psn + 1, 0);
      placed.resize(psn + 1, 0);
      last_retx.resize(psn + 1, std::numeric_limits<Tick>::min() / 2);
    }
  };

  auto send = [&](std::uint32_t psn, Tick t, double extra) {
    const Tick start = std::max(t + to_ticks(extra), tx_free);
    tx_free = start + to_ticks(tm.service);
    const Tick depart = start + to_ticks(tm.tx);
    const std::uint32_t attempt = attempts[psn]++;
    ++res.data_packets;
    std::optional<double> flight;
    if (cfg.drop) {
      flight = cfg.drop(psn, attempt) ? std::nullopt : link_transmit(ctrl_link, data_flits, jitter_rng);
    } else {
      if (cfg.link.loss_rate > 0 && loss_rng.bernoulli(cfg.link.loss_rate))
        flight = std::nullopt;
      else
        flight = link_transmit(ctrl_link, data_flits, jitter_rng);
    }
    if (!flight) {
      ++res.dropped;
      return;
    }
    q.push(depart + to_ticks(*flight), {EvKind::arrive, psn});
  };

  auto arm = [&](Tick t) {
    ++rto_gen;
    q.push(t + to_ticks(rto.arm()), {EvKind::rto, 0, 0, rto_gen});
  };

  auto start_op = [&](Tick posted_at, Tick now) {
    const std::uint32_t psn = tx.allocate_psn();
    ensure(psn);
    post_time[psn] = posted_at;
    send(psn, now, tm.pre);
    if (psn == tx.last_acked()) arm(now + to_ticks(tm.pre));
  };

  auto post_op = [&](Tick t) {
    ++posted;
    if (tx.in_flight() < tx.window_limit() && waiting.empty())
      start_op(t, t);
    else
      waiting.push_back(t);
  };

  auto complete = [&](std::uint32_t psn, Tick at) {
    if (done[psn]) return;
    done[psn] = 1;
    ++completed;
    st.latencies_ns.push_back(to_ns(at - post_time[psn]));
    last_done = std::max(last_done, at);
    if (posted < n) post_op(at);
  };

  auto on_progress = [&](Tick t) {
    rto.on_progress();
    while (!waiting.empty() && tx.in_flight() < tx.window_limit()) {
      Tick posted_at = waiting.front();
      waiting.pop_front();
      start_op(posted_at, t);
    }
    if (tx.last_acked() < tx.psn_next())
      arm(t);
    else
      ++rto_gen, rto.cancel();
  };

  auto retransmit = [&](const std::vector<std::uint32_t>& set, Tick t, bool holdoff) {
    for (auto psn : set) {
      if (holdoff && last_retx[psn] >= t - to_ticks(res.rtt_estimate_ns)) continue;
      last_retx[psn] = t;
      ++st.retransmits;
      send(psn, t, tm.refetch);
    }
  };

  for (std::uint32_t i = 0; i < cfg.depth && posted < n; ++i) post_op(0);

  auto ctrl_delay = [&](double host) {
    return to_ticks(host + *link_transmit(ctrl_link, 1, jitter_rng));
  };

  while (!q.empty() && completed < n) {
    auto e = q.pop();
    const Tick t = e.at;
    const Ev& ev = e.data;
    switch (ev.kind) {
      case EvKind::arrive: {
        if (scheme == Scheme::sack) {
          if (placed[ev.psn]) break;  // already written; nothing to do
          placed[ev.psn] = 1;
          q.push(t + ctrl_delay(tm.target), {EvKind::opack, ev.psn});
        }
        auto r = rx.receive(ev.psn);
        res.delivered.insert(res.delivered.end(), r.delivered.begin(), r.delivered.end());
        switch (r.status) {
          case RxStatus::accepted:
          case RxStatus::duplicate:
            q.push(t + ctrl_delay(tm.target), {EvKind::ack, rx.epsn()});
            break;
          case RxStatus::out_of_order:
            if (scheme == Scheme::sack) {
              ++res.sacks;
              q.push(t + ctrl_delay(tm.ctrl), {EvKind::sack, rx.epsn(), rx.sack_bitmap()});
            } else if (nak_sent_for != static_cast<std::int64_t>(rx.epsn())) {
              nak_sent_for = rx.epsn();
              ++res.naks;
              q.push(t + ctrl_delay(tm.ctrl), {EvKind::nak, rx.epsn()});
            }
            break;
          case RxStatus::out_of_window:
            break;
        }
        break;
      }
      case EvKind::opack: {
        const Tick at = t + to_ticks(tm.post);
        const std::uint32_t before = tx.last_acked();
        tx.ack_one(ev.psn);
        complete(ev.psn, at);
        if (tx.last_acked() > before) on_progress(t);
        break;
      }
      case EvKind::ack: {
        const std::uint32_t before = tx.last_acked();
        if (tx.ack_cumulative(ev.psn) == 0) break;
        const Tick at = t + to_ticks(tm.post);
        for (std::uint32_t psn = before; psn < tx.last_acked(); ++psn) complete(psn, at);
        on_progress(t);
        break;
      }
      case EvKind::nak: {
        if (ev.psn < tx.last_acked()) break;
        retransmit(recover(tx, {TriggerKind::nak, ev.psn}, scheme), t, false);
        break;
      }
      case EvKind::sack: {
        Trigger tr{TriggerKind::sack, 0, ev.psn, ev.bitmap};
        retransmit(recover(tx, tr, scheme), t, true);
        break;
      }
      case EvKind::rto: {
        if (ev.gen != rto_gen || tx.last_acked() >= tx.psn_next()) break;
        ++res.rto_fires;
        retransmit(recover(tx, {TriggerKind::rto}, scheme), t, false);
        rto.expire();
        arm(t);
        break;
      }
    }
  }

  st.issued = posted;
  st.elapsed_ns = to_ns(last_done);
  st.wire_ops = res.data_packets;
  st.finalize(cfg.payload);
  return res;
}

}  // namespace ubsim::engine
