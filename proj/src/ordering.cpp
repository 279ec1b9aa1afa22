#include "ubsim/ordering.hpp"

#include <queue>
#include <tuple>

namespace ubsim::ordering {

std::vector<OrderingMode> all_combinations() {
  std::vector<OrderingMode> out;
  for (auto sm : {ServiceMode::ROI, ServiceMode::ROT, ServiceMode::ROL, ServiceMode::UNO})
    for (auto tag : {ExecTag::NO, ExecTag::RO, ExecTag::SO}) out.push_back({sm, tag, false, false});
  return out;
}

Gate gate_check(JettyOrderState& j, const OrderingMode& m) {
  if (m.fence) {
    j.fence_latched = j.outstanding() > 0;
    return j.fence_latched ? Gate::hold : Gate::emit;
  }
  if (m.exec_tag == ExecTag::SO) return j.outstanding() == 0 ? Gate::emit : Gate::hold;
  return Gate::emit;
}

double gating_delay_ns(bool ub, const OrderingMode&, bool gated, const cost::CostParams& p) {
  if (!ub) return p.roce_psn_serial_ns;
  return gated ? p.order_gate_ns : 0.0;
}

std::vector<std::uint64_t> CompletionReorderBuffer::release(std::uint64_t seq) {
  if (!ordered_) return {seq};
  std::vector<std::uint64_t> out;
  pending_.insert(seq);
  while (!pending_.empty() && *pending_.begin() == cursor_) {
    out.push_back(cursor_++);
    pending_.erase(pending_.begin());
  }
  return out;
}

std::vector<std::vector<OpOutcome>> simulate_jetties(
    const std::vector<std::vector<JettyOp>>& queues, bool ub, const cost::CostParams& p) {
  const std::size_t nj = queues.size();
  std::vector<std::vector<OpOutcome>> out(nj);
  std::vector<JettyOrderState> st(nj);
  std::vector<std::size_t> head(nj, 0);
  std::vector<double> held_since(nj, -1);
  for (std::size_t j = 0; j < nj; ++j) out[j].resize(queues[j].size());

  // (time, insertion seq, jetty, op index) completion events.
  using Ev = std::tuple<double, std::uint64_t, std::size_t, std::size_t>;
  std::priority_queue<Ev, std::vector<Ev>, std::greater<>> ev;
  std::uint64_t seq = 0;

  auto pump = [&](std::size_t j, double now) {
    while (head[j] < queues[j].size()) {
      const auto& op = queues[j][head[j]];
      auto& o = out[j][head[j]];
      if (gate_check(st[j], op.mode) == Gate::hold) {
        if (held_since[j] < 0) held_since[j] = now;
        return;
      }
      const bool gated = held_since[j] >= 0;
      held_since[j] = -1;
      o.gated = gated;
      o.eligible_ns = now;
      o.emit_ns = now + gating_delay_ns(ub, op.mode, gated, p);
      st[j].on_issue();
      if (!op.never_completes) {
        o.complete_ns = o.emit_ns + op.service_ns;
        ev.emplace(o.complete_ns, seq++, j, head[j]);
      }
      ++head[j];
    }
  };

  for (std::size_t j = 0; j < nj; ++j) pump(j, 0.0);
  while (!ev.empty()) {
    auto [t, s, j, i] = ev.top();
    ev.pop();
    st[j].on_complete();
    pump(j, t);
  }
  return out;
}

}  // namespace ubsim::ordering
