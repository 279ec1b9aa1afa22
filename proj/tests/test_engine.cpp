#include <cmath>

#include "doctest.h"
#include "ubsim/engine.hpp"

using namespace ubsim;
using namespace ubsim::engine;

namespace {

SimConfig cold(Stack s) {
  SimConfig c;
  c.stack = s;
  c.locality = 0;
  c.ops = 2000;
  return c;
}

}  // namespace

TEST_CASE("event queue orders by time then insertion") {
  EventQueue<int> q;
  q.push(10, 1);
  q.push(5, 2);
  q.push(10, 3);
  q.push(5, 4);
  std::vector<int> got;
  while (!q.empty()) got.push_back(q.pop().data);
  CHECK(got == std::vector<int>{2, 4, 1, 3});
  CHECK(q.now() == 10);
  CHECK_THROWS_AS(q.push(9, 0), std::logic_error);
}

TEST_CASE("tick conversion") {
  CHECK(to_ticks(3.106) == 3106);
  CHECK(to_ns(to_ticks(499.392)) == doctest::Approx(499.392));
}

TEST_CASE("nearest-rank percentiles") {
  const std::vector<double> v = {5, 1, 4, 2, 3};
  CHECK(percentile(v, 0.5) == 3);
  CHECK(percentile(v, 0.99) == 5);
  CHECK(percentile(v, 0.0) == 1);
  CHECK(percentile({}, 0.5) == 0);
  CHECK(nearest_rank_sorted({1, 2, 3, 4}, 0.5) == 2);
}

TEST_CASE("headline runs") {
  CHECK(run(cold(Stack::ub_ldst)).mean_ns == doctest::Approx(500).epsilon(0.01));
  CHECK(run(cold(Stack::roce_dma)).mean_ns == doctest::Approx(2186).epsilon(0.01));
  for (auto s : state::kAllStacks)
    CHECK(run(cold(s)).mean_ns ==
          doctest::Approx(cost::measured_ns(s, wire::Opcode::READ, cost::CostParams{})));
}

TEST_CASE("zero-op run is empty") {
  auto c = cold(Stack::ub_urma);
  c.ops = 0;
  const auto st = run(c);
  CHECK(st.completed == 0);
  CHECK(st.latencies_ns.empty());
  CHECK(st.mean_ns == 0);
}

TEST_CASE("invalid configs are rejected") {
  auto c = cold(Stack::ub_ldst);
  c.concurrency = 0;
  CHECK_THROWS_AS(run(c), ConfigInvalid);
  c = cold(Stack::ub_ldst);
  c.locality = 1.5;
  CHECK_THROWS_AS(run(c), ConfigInvalid);
  c = cold(Stack::ub_ldst);
  c.link.loss_rate = -0.1;
  CHECK_THROWS_AS(run(c), ConfigInvalid);
  c = cold(Stack::ub_ldst);
  c.payload = 8192;
  CHECK_THROWS_AS(run(c), ConfigInvalid);
}

TEST_CASE("link transmit") {
  Rng rng(kDefaultSeed, "link-test");
  LinkConfig l;
  for (int i = 0; i < 1000; ++i) CHECK(link_transmit(l, 1, rng).value() == doctest::Approx(100.64));
  l.loss_rate = 1;
  for (int i = 0; i < 1000; ++i) CHECK_FALSE(link_transmit(l, 1, rng).has_value());
  l.loss_rate = 0.05;
  int drops = 0;
  for (int i = 0; i < 10000; ++i) drops += !link_transmit(l, 1, rng).has_value();
  // Binomial(10^4, 0.05): sd ~21.8, 99% interval is 500 +- 56.
  CHECK(std::abs(drops - 500) <= 56);
}

TEST_CASE("conservation") {
  for (double loss : {0.0, 0.1, 1.0}) {
    auto c = cold(Stack::roce_dma);
    c.link.loss_rate = loss;
    c.concurrency = 4;
    const auto st = run(c);
    CHECK(st.completed + st.lost == st.issued);
    CHECK(st.issued == c.ops);
    if (loss == 0.0) CHECK(st.lost == 0);
    if (loss == 1.0) CHECK(st.completed == 0);
  }
}

TEST_CASE("determinism") {
  for (auto s : state::kAllStacks) {
    auto c = cold(s);
    c.locality = 0.2;
    c.link.jitter_factor = 0.2;
    c.concurrency = 8;
    const auto a = run(c);
    const auto b = run(c);
    CHECK(a.latencies_ns == b.latencies_ns);
    CHECK(a.elapsed_ns == b.elapsed_ns);
    c.seed += 1;
    CHECK(run(c).latencies_ns != a.latencies_ns);
  }
}

TEST_CASE("closed-loop latency rises 2 ns per ns of one-way delay") {
  for (auto s : state::kAllStacks) {
    auto c = cold(s);
    c.link.delay_ns = 50;
    const double a = run(c).mean_ns;
    c.link.delay_ns = 500;
    const double b = run(c).mean_ns;
    CHECK((b - a) / 450.0 == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("pipeline caps") {
  const cost::CostParams p;
  const double ub = pipeline_burst_rate(Stack::ub_urma, p);
  const double roce = pipeline_burst_rate(Stack::roce_dma, p);
  CHECK(ub == doctest::Approx(150.36).epsilon(0.001));
  CHECK(roce == doctest::Approx(53.62).epsilon(0.001));
  CHECK(ub / roce == doctest::Approx(2.80).epsilon(0.005));
}

TEST_CASE("concurrency sweep") {
  auto ub = cold(Stack::ub_ldst);
  ub.locality = 0.2;
  ub.ops = 10000;
  const auto u = sweep_concurrency(ub, {1, 2, 4, 16});
  CHECK(u[0].ops_per_s / 1e6 == doctest::Approx(2.5).epsilon(0.05));
  for (std::size_t i = 1; i < u.size(); ++i) CHECK(u[i].ops_per_s >= u[i - 1].ops_per_s);
  // Linear through 16 in flight.
  CHECK(u[3].ops_per_s / u[0].ops_per_s == doctest::Approx(16).epsilon(0.05));

  auto roce = ub;
  roce.stack = Stack::roce_dma;
  const auto r = sweep_concurrency(roce, {1, 2, 4, 16, 64});
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i].ops_per_s >= r[i - 1].ops_per_s);
  for (std::size_t i = 2; i < r.size(); ++i) CHECK(r[i].ops_per_s / 1e6 == doctest::Approx(0.74).epsilon(0.10));
  // Sustained WR rate never exceeds the NIC cap.
  for (const auto& pt : r) CHECK(pt.wire_ops_per_s <= 53.62e6 * 1.0001);
  for (const auto& pt : u) CHECK(pt.wire_ops_per_s <= 150.36e6 * 1.0001);
}

TEST_CASE("open loop at a trickle matches the closed-loop latency") {
  auto c = cold(Stack::ub_ldst);
  const auto pts = open_loop_envelope(c, {0.01});
  CHECK(pts.at(0).p99_ns == doctest::Approx(run(c).p99_ns).epsilon(0.01));
  CHECK(pts.at(0).achieved_mops == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("workload names") {
  for (auto w : {Workload::pointer_chase, Workload::bulk_read, Workload::bulk_write, Workload::pingpong,
                 Workload::dist_barrier, Workload::cas_lock})
    CHECK(workload_from_name(name(w)) == w);
  CHECK(workload_verb(Workload::cas_lock) == wire::Opcode::CAS);
}
