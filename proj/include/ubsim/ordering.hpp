#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "ubsim/costmodel.hpp"
#include "ubsim/wire.hpp"

namespace ubsim::ordering {

using wire::ExecTag;
using wire::ServiceMode;

struct OrderingMode {
  ServiceMode service_mode = ServiceMode::ROI;
  ExecTag exec_tag = ExecTag::NO;
  bool fence = false;
  bool completion_order = false;

  bool emits_ta_ack() const { return service_mode != ServiceMode::UNO; }
};

// All 4 x 3 service-mode x execution-tag pairs, no fence, unordered completion.
std::vector<OrderingMode> all_combinations();

struct JettyOrderState {
  std::uint64_t issue_seq = 0;
  std::uint64_t completed_seq = 0;
  bool fence_latched = false;

  std::uint64_t outstanding() const { return issue_seq - completed_seq; }
  void on_issue() { ++issue_seq; }
  void on_complete() {
    ++completed_seq;
    if (outstanding() == 0) fence_latched = false;
  }
};

enum class Gate : std::uint8_t { emit, hold };

// RO emits at once and is ordered at completion; SO and fences wait for
// every earlier op on the Jetty to finish.
Gate gate_check(JettyOrderState& j, const OrderingMode& m);

double gating_delay_ns(bool ub, const OrderingMode& m, bool gated, const cost::CostParams& p);

class CompletionReorderBuffer {
 public:
  explicit CompletionReorderBuffer(bool ordered) : ordered_(ordered) {}
  std::vector<std::uint64_t> release(std::uint64_t seq);
  std::uint64_t cursor() const { return cursor_; }
  std::size_t pending() const { return pending_.size(); }

 private:
  bool ordered_;
  std::uint64_t cursor_ = 0;
  std::set<std::uint64_t> pending_;
};

struct JettyOp {
  OrderingMode mode;
  double service_ns = 0;  // issue-to-completion time before any gate cost
  bool never_completes = false;
};

struct OpOutcome {
  double eligible_ns = -1;  // gate opened (or posted, if never held)
  double emit_ns = -1;      // first flit leaves; -1 if never emitted
  double complete_ns = -1;  // -1 if it never completed
  bool gated = false;
  double latency_ns() const { return complete_ns - eligible_ns; }
};

// Runs pre-posted per-Jetty queues through their gates. Jetties share no
// gating state, which is the head-of-line isolation property.
std::vector<std::vector<OpOutcome>> simulate_jetties(
    const std::vector<std::vector<JettyOp>>& queues, bool ub, const cost::CostParams& p);

}  // namespace ubsim::ordering
