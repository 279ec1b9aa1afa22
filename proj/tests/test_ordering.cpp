#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "ubsim/ordering.hpp"
#include "ubsim/workloads.hpp"

using namespace ubsim;
using namespace ubsim::ordering;

namespace {

const cost::CostParams kP;

OrderingMode so() { return {ServiceMode::ROI, ExecTag::SO}; }
OrderingMode ro() { return {ServiceMode::ROI, ExecTag::RO}; }

}  // namespace

TEST_CASE("twelve combinations, UNO without a transaction ack") {
  const auto all = all_combinations();
  CHECK(all.size() == 12);
  for (const auto& m : all) CHECK(m.emits_ta_ack() == (m.service_mode != ServiceMode::UNO));
}

TEST_CASE("gate decisions") {
  SUBCASE("NO bypasses however much is outstanding") {
    JettyOrderState j;
    for (int i = 0; i < 10; ++i) j.on_issue();
    CHECK(gate_check(j, OrderingMode{}) == Gate::emit);
  }
  SUBCASE("SO waits behind one outstanding RO") {
    JettyOrderState j;
    CHECK(gate_check(j, ro()) == Gate::emit);
    j.on_issue();
    CHECK(gate_check(j, so()) == Gate::hold);
    j.on_complete();
    CHECK(gate_check(j, so()) == Gate::emit);
  }
  SUBCASE("fenced write waits for both reads") {
    JettyOrderState j;
    j.on_issue();
    j.on_issue();
    OrderingMode f{ServiceMode::ROI, ExecTag::NO, true};
    CHECK(gate_check(j, f) == Gate::hold);
    CHECK(j.fence_latched);
    j.on_complete();
    CHECK(gate_check(j, f) == Gate::hold);
    j.on_complete();
    CHECK_FALSE(j.fence_latched);
    CHECK(gate_check(j, f) == Gate::emit);
  }
}

TEST_CASE("gating delay") {
  CHECK(gating_delay_ns(true, OrderingMode{ServiceMode::UNO, ExecTag::NO}, false, kP) == 0.0);
  CHECK(gating_delay_ns(true, so(), true, kP) == 20.0);
  CHECK(gating_delay_ns(true, so(), false, kP) == 0.0);
  for (const auto& m : all_combinations()) {
    CHECK(gating_delay_ns(false, m, false, kP) == 50.0);
    CHECK(gating_delay_ns(false, m, true, kP) == 50.0);
  }
}

TEST_CASE("completion reorder buffer") {
  CompletionReorderBuffer ord(true);
  CHECK(ord.release(2).empty());
  CHECK(ord.release(0) == std::vector<std::uint64_t>{0});
  CHECK(ord.release(1) == std::vector<std::uint64_t>{1, 2});

  CompletionReorderBuffer un(false);
  CHECK(un.release(2) == std::vector<std::uint64_t>{2});
  CHECK(un.release(0) == std::vector<std::uint64_t>{0});
  CHECK(un.release(1) == std::vector<std::uint64_t>{1});

  CompletionReorderBuffer one(true);
  CHECK(one.release(0) == std::vector<std::uint64_t>{0});
}

TEST_CASE("ordered release over every arrival order of six completions") {
  std::vector<std::uint64_t> order(6);
  std::iota(order.begin(), order.end(), 0u);
  do {
    CompletionReorderBuffer crb(true);
    std::vector<std::uint64_t> released;
    for (auto s : order) {
      const auto r = crb.release(s);
      released.insert(released.end(), r.begin(), r.end());
    }
    CHECK(std::is_sorted(released.begin(), released.end()));
    CHECK(released.size() == 6);
    CHECK(crb.pending() == 0);
  } while (std::next_permutation(order.begin(), order.end()));
}

TEST_CASE("every ungated combination gives the same latency") {
  for (bool ub : {true, false}) {
    std::vector<double> lat;
    for (const auto& m : all_combinations()) {
      const auto out = simulate_jetties({{{m, 500.0}}}, ub, kP);
      lat.push_back(out[0][0].latency_ns());
      CHECK_FALSE(out[0][0].gated);
    }
    CHECK(std::all_of(lat.begin(), lat.end(), [&](double x) { return x == lat.front(); }));
  }
}

TEST_CASE("a stalled SO jetty does not delay its neighbours") {
  std::vector<JettyOp> free_ops;
  for (int i = 0; i < 8; ++i) free_ops.push_back({OrderingMode{}, 400.0 + i});
  const auto alone = simulate_jetties({free_ops}, true, kP);

  std::vector<JettyOp> stalled = {{ro(), 0, true}, {so(), 400.0}, {so(), 400.0}};
  const auto shared = simulate_jetties({stalled, free_ops, free_ops}, true, kP);
  CHECK(shared[0][1].emit_ns == -1);
  CHECK(shared[0][1].complete_ns == -1);
  for (std::size_t j = 1; j <= 2; ++j)
    for (std::size_t i = 0; i < free_ops.size(); ++i) {
      CHECK(shared[j][i].latency_ns() == alone[0][i].latency_ns());
      CHECK(shared[j][i].emit_ns == alone[0][i].emit_ns);
    }
}

TEST_CASE("SO behind an RO is released at the RO's completion and pays the gate") {
  const auto out = simulate_jetties({{{ro(), 300.0}, {so(), 300.0}}}, true, kP);
  CHECK(out[0][1].gated);
  CHECK(out[0][1].eligible_ns == out[0][0].complete_ns);
  CHECK(out[0][1].emit_ns - out[0][1].eligible_ns == 20.0);
}

TEST_CASE("mixed-order sweep") {
  using workloads::mixed_order_latency_ns;
  const auto ub = state::Stack::ub_ldst;
  const auto roce = state::Stack::roce_dma;
  CHECK(mixed_order_latency_ns(roce, 0, kP) / mixed_order_latency_ns(ub, 0, kP) ==
        doctest::Approx(4.47).epsilon(0.03));
  CHECK(mixed_order_latency_ns(roce, 1, kP) / mixed_order_latency_ns(ub, 1, kP) ==
        doctest::Approx(4.30).epsilon(0.03));
  // UB is affine with a 20 ns slope, RoCE flat.
  const double u0 = mixed_order_latency_ns(ub, 0, kP);
  for (double f = 0; f <= 1.0; f += 0.125) {
    CHECK(mixed_order_latency_ns(ub, f, kP) == doctest::Approx(u0 + 20.0 * f));
    CHECK(mixed_order_latency_ns(roce, f, kP) == mixed_order_latency_ns(roce, 0, kP));
  }
  CHECK_THROWS(mixed_order_latency_ns(ub, 1.5, kP));
}

TEST_CASE("fused ack saves 25 ns per op") {
  cost::Extras sep, fused;
  sep.ack_mode = cost::AckMode::transaction_taack;
  fused.ack_mode = cost::AckMode::fused;
  for (auto s : {state::Stack::ub_urma}) {
    const double a = cost::measured_ns(s, wire::Opcode::WRITE, kP, sep);
    const double b = cost::measured_ns(s, wire::Opcode::WRITE, kP, fused);
    CHECK(a - b == doctest::Approx(25.0).epsilon(1e-12));
  }
}
