#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "ubsim/workloads.hpp"

using namespace ubsim;
using namespace ubsim::workloads;

namespace {

const cost::CostParams kP;

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<double> swap_pooled(const SwapProfile& prof) {
  // Each trial starts from a cold page cache.
  std::vector<double> all;
  for (std::uint64_t i = 0; i < 3; ++i) {
    const auto v = swap_key_latencies(zipf_keys(65536, 0.99, 8500, kDefaultSeed + i), prof, kP);
    all.insert(all.end(), v.begin(), v.end());
  }
  return all;
}

std::vector<double> ub_pooled() {
  std::vector<double> all;
  for (std::uint64_t i = 0; i < 3; ++i) {
    const auto v = ub_ldst_key_latencies(zipf_keys(65536, 0.99, 8500, kDefaultSeed + i), kP);
    all.insert(all.end(), v.begin(), v.end());
  }
  return all;
}

}  // namespace

TEST_CASE("zipf stream is reproducible") {
  WorkloadSpec s;
  s.variant = Variant::zipf_read;
  s.ops = 100;
  const auto a = generate(s, 7);
  const auto b = generate(s, 7);
  CHECK(a.size() == 100);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].addr == b[i].addr);
  const auto c = generate(s, 8);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a[i].addr != c[i].addr;
  CHECK(differs);
}

TEST_CASE("zipf rank-1 frequency matches its mass") {
  const ZipfSampler z(65536, 0.99, kDefaultSeed);
  Rng rng(kDefaultSeed, "zipf-freq");
  const auto top = z.key_of_rank(0);
  std::uint64_t hits = 0;
  const std::uint64_t n = 1000000;
  for (std::uint64_t i = 0; i < n; ++i) hits += z.sample(rng) == top;
  CHECK(static_cast<double>(hits) / n == doctest::Approx(z.rank_mass(0)).epsilon(0.05));
  double total = 0;
  for (std::uint64_t r = 0; r < z.keys(); ++r) total += z.rank_mass(r);
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("zipf permutation is a bijection") {
  const ZipfSampler z(1000, 0.99, 3);
  std::vector<bool> seen(1000, false);
  for (std::uint64_t r = 0; r < 1000; ++r) seen.at(z.key_of_rank(r)) = true;
  CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
}

TEST_CASE("sequential scan addresses") {
  WorkloadSpec s;
  s.variant = Variant::seq_scan;
  s.ops = 5;
  const auto ops = generate(s, 1);
  for (std::size_t i = 0; i < ops.size(); ++i) CHECK(ops[i].addr == 64 * i);
  s.ops = 16385;
  CHECK(generate(s, 1).back().addr == 0);
}

TEST_CASE("ycsb-a get fraction") {
  WorkloadSpec s;
  s.variant = Variant::ycsb_a;
  s.keys = 10000;
  s.ops = 100000;
  const auto ops = generate(s, kDefaultSeed);
  const auto gets = std::count_if(ops.begin(), ops.end(), [](const Op& o) { return o.verb == Opcode::READ; });
  CHECK(static_cast<double>(gets) / ops.size() == doctest::Approx(0.50).epsilon(0.02));
}

TEST_CASE("pointer chase mixes a hot set with cold lines") {
  WorkloadSpec s;
  s.variant = Variant::pointer_chase;
  s.ops = 10000;
  s.locality = 0.8;
  const auto ops = generate(s, 5);
  const auto hot = std::count_if(ops.begin(), ops.end(), [](const Op& o) { return o.addr < 32 * 64; });
  CHECK(static_cast<double>(hot) / ops.size() == doctest::Approx(0.8).epsilon(0.03));
  for (const auto& o : ops) CHECK(o.verb == Opcode::LOAD);
}

TEST_CASE("poisson arrivals are increasing with the requested mean gap") {
  WorkloadSpec s;
  s.variant = Variant::poisson;
  s.ops = 20000;
  s.rate_mops = 2.0;
  const auto ops = generate(s, 1);
  for (std::size_t i = 1; i < ops.size(); ++i) CHECK(ops[i].at_ns >= ops[i - 1].at_ns);
  CHECK(ops.back().at_ns / (ops.size() - 1) == doctest::Approx(500).epsilon(0.03));
}

TEST_CASE("cas time to acquire") {
  CHECK(cas_time_to_acquire_ns(Stack::ub_urma, 1, kP) == doctest::Approx(750).epsilon(0.001));
  CHECK(cas_time_to_acquire_ns(Stack::ub_urma, 256, kP) / 1000 == doctest::Approx(192).epsilon(0.05));
  CHECK(cas_time_to_acquire_ns(Stack::roce_dma, 256, kP) / 1000 == doctest::Approx(749).epsilon(0.05));
  CHECK_THROWS(cas_time_to_acquire_ns(Stack::ub_urma, 0, kP));
}

TEST_CASE("m2n fan-out") {
  for (std::uint32_t k : {1u, 2u, 64u, 1024u})
    CHECK(m2n_latency_ns(Stack::ub_urma, k, kP) == doctest::Approx(804).epsilon(0.02));
  CHECK(m2n_latency_ns(Stack::roce_dma, 1, kP) == doctest::Approx(1781).epsilon(0.02));
  CHECK(m2n_latency_ns(Stack::roce_dma, 2, kP) == doctest::Approx(1981).epsilon(0.02));
  CHECK(m2n_latency_ns(Stack::roce_dma, 1024, kP) == doctest::Approx(2981).epsilon(0.02));
}

TEST_CASE("connection setup") {
  CHECK(conn_setup_seconds(Stack::roce_dma, 1024, 1024) == doctest::Approx(17.04).epsilon(1e-12));
  CHECK(conn_setup_seconds(Stack::ub_urma, 1024, 1024) == doctest::Approx(0.016).epsilon(1e-12));
  CHECK(WorkloadParams{}.roce_qp_setup_s * 1e6 == doctest::Approx(16.25).epsilon(0.001));
}

TEST_CASE("mesh contention") {
  CHECK(mesh_latency_ns(Stack::ub_urma, 2) == doctest::Approx(447));
  CHECK(mesh_latency_ns(Stack::ub_urma, 64) == doctest::Approx(1997));
  CHECK(mesh_latency_ns(Stack::roce_dma, 2) == doctest::Approx(2199));
  CHECK(mesh_latency_ns(Stack::roce_dma, 64) == doctest::Approx(4749));
  // The QP cache cliff sits between 22 and 23 nodes.
  CHECK(mesh_latency_ns(Stack::roce_dma, 23) - mesh_latency_ns(Stack::roce_dma, 22) ==
        doctest::Approx(1025));
}

TEST_CASE("tp sharing") {
  CHECK(tp_sharing_latency_ns(Stack::ub_urma, 3, kP) - tp_sharing_latency_ns(Stack::ub_urma, 1, kP) ==
        doctest::Approx(10));
  const auto k = tp_sharing_crossover(kP);
  CHECK(tp_sharing_latency_ns(Stack::ub_urma, k, kP) > tp_sharing_latency_ns(Stack::roce_dma, k, kP));
  CHECK(tp_sharing_latency_ns(Stack::ub_urma, k - 1, kP) <= tp_sharing_latency_ns(Stack::roce_dma, 1, kP));
}

TEST_CASE("spill step on a 64 B read") {
  const double r22 = spill_read_latency_ns(Stack::roce_dma, 22 * 22, kP);
  const double r23 = spill_read_latency_ns(Stack::roce_dma, 23 * 23, kP);
  CHECK(r23 - r22 == doctest::Approx(1000).epsilon(0.05));
  CHECK(spill_read_latency_ns(Stack::roce_dma, 1, kP) == r22);
  const double u1024 = spill_read_latency_ns(Stack::ub_ldst, 1024, kP);
  const double u1025 = spill_read_latency_ns(Stack::ub_ldst, 1025, kP);
  CHECK(u1025 - u1024 == doctest::Approx(200).epsilon(0.05));
  CHECK(spill_read_latency_ns(Stack::ub_ldst, 1, kP) == u1024);
}

TEST_CASE("payload regimes") {
  auto ratio = [](std::uint32_t pl) {
    return payload_read_latency_ns(Stack::roce_dma, pl, kP) / payload_read_latency_ns(Stack::ub_ldst, pl, kP);
  };
  CHECK(ratio(64) == doctest::Approx(4.37).epsilon(0.02 / 4.37));
  CHECK(ratio(4096) == doctest::Approx(1.7).epsilon(0.10));
  CHECK(ratio(16384) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(ratio(65536) == doctest::Approx(1.0).epsilon(0.05));
  double prev = 1e9;
  for (std::uint32_t pl : {64u, 256u, 1024u, 4096u, 16384u}) {
    CHECK(ratio(pl) <= prev);
    prev = ratio(pl);
  }
}

TEST_CASE("swap under zipf") {
  const auto ub = ub_pooled();
  const auto inf = swap_pooled(infiniswap());
  const auto fast = swap_pooled(fastswap());
  CHECK(mean(ub) == doctest::Approx(236).epsilon(0.15));
  CHECK(mean(inf) == doctest::Approx(835).epsilon(0.15));
  CHECK(mean(fast) == doctest::Approx(466).epsilon(0.15));
  CHECK(engine::percentile(ub, 0.99) == doctest::Approx(500).epsilon(0.01));
  CHECK(engine::percentile(inf, 0.99) == doctest::Approx(6100).epsilon(0.05));
}

TEST_CASE("swap under a sequential scan") {
  std::vector<std::uint64_t> seq(16384);
  std::iota(seq.begin(), seq.end(), 0);
  CHECK(mean(ub_ldst_key_latencies(seq, kP)) == doctest::Approx(500).epsilon(0.15));
  CHECK(mean(swap_key_latencies(seq, infiniswap(), kP)) == doctest::Approx(164).epsilon(0.15));
  CHECK(mean(swap_key_latencies(seq, fastswap(), kP)) == doctest::Approx(90).epsilon(0.15));
}

TEST_CASE("swap residency is capped and faults count misses") {
  SwapProfile prof = infiniswap();
  prof.resident_cap = 4;
  SwapSim sim(prof, kP);
  for (std::uint64_t page = 0; page < 10; ++page) sim.access(page * prof.keys_per_page);
  CHECK(sim.resident() == 4);
  CHECK(sim.faults() == 10);
  CHECK(sim.access(9 * prof.keys_per_page) == doctest::Approx(WorkloadParams{}.local_dram_ns));
}

TEST_CASE("ycsb-a throughput ratio") {
  const auto ub = ycsb_a(Stack::ub_ldst, kP, 100000, kDefaultSeed);
  const auto roce = ycsb_a(Stack::roce_dma, kP, 100000, kDefaultSeed);
  CHECK(ub.get_fraction == doctest::Approx(0.5).epsilon(0.02));
  CHECK(ub.ops_per_s / roce.ops_per_s == doctest::Approx(9.2).epsilon(0.20));
}

TEST_CASE("sweep grid has 388 configurations, all valid") {
  const auto g = sweep_grid();
  CHECK(g.size() == 388);
  for (const auto& c : g)
    for (auto s : state::kAllStacks) CHECK_NOTHROW(to_sim_config(c, s, 10, 1).validate());
}
