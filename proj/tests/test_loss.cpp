#include <bit>
#include <numeric>
#include <string>

#include "doctest.h"
#include "ubsim/loss.hpp"

using namespace ubsim;
using namespace ubsim::engine;

namespace {

std::vector<std::uint32_t> in_order(std::uint64_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

// Same decision for a (psn, attempt) pair whichever stack asks.
bool hashed_drop(std::uint64_t seed, std::uint32_t psn, std::uint32_t attempt, double p) {
  const auto h = Rng::mix(seed ^ (std::uint64_t{attempt} << 32), std::to_string(psn));
  return static_cast<double>(h >> 11) * 0x1.0p-53 < p;
}

LossConfig small(Stack s, std::uint64_t ops) {
  LossConfig c;
  c.stack = s;
  c.ops = ops;
  c.depth = static_cast<std::uint32_t>(ops);
  return c;
}

}  // namespace

TEST_CASE("lossless stream delivers everything in order without retransmits") {
  for (auto s : {Stack::ub_urma, Stack::roce_dma}) {
    auto c = small(s, 2000);
    c.depth = 8;
    const auto r = run_loss_stream(c);
    CHECK(r.delivered == in_order(2000));
    CHECK(r.stats.retransmits == 0);
    CHECK(r.dropped == 0);
    CHECK(r.stats.completed == 2000);
  }
}

TEST_CASE("scheme follows the stack") {
  CHECK(small(Stack::ub_urma, 1).scheme() == transport::Scheme::sack);
  CHECK(small(Stack::ub_ldst, 1).scheme() == transport::Scheme::sack);
  CHECK(small(Stack::roce_dma, 1).scheme() == transport::Scheme::gbn);
  CHECK(small(Stack::roce_bf, 1).scheme() == transport::Scheme::gbn);
}

TEST_CASE("every drop subset of up to six packets is delivered exactly once in order") {
  for (std::uint32_t n = 1; n <= 6; ++n)
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      std::uint64_t rt[2] = {0, 0};
      int k = 0;
      for (auto s : {Stack::ub_urma, Stack::roce_dma}) {
        auto c = small(s, n);
        c.drop = [mask](std::uint32_t psn, std::uint32_t attempt) {
          return attempt == 0 && psn < 32 && (mask >> psn & 1);
        };
        const auto r = run_loss_stream(c);
        CAPTURE(n);
        CAPTURE(mask);
        REQUIRE(r.delivered == in_order(n));
        REQUIRE(r.stats.completed == n);
        CHECK(r.dropped == static_cast<std::uint64_t>(std::popcount(mask)));
        rt[k++] = r.stats.retransmits;
      }
      CHECK(rt[0] <= rt[1]);
    }
}

TEST_CASE("retransmissions that are themselves dropped still recover") {
  for (auto s : {Stack::ub_urma, Stack::roce_dma}) {
    auto c = small(s, 6);
    c.drop = [](std::uint32_t psn, std::uint32_t attempt) { return psn == 2 && attempt < 3; };
    const auto r = run_loss_stream(c);
    CHECK(r.delivered == in_order(6));
    CHECK(r.dropped >= 3);
  }
}

TEST_CASE("selective ack never retransmits more than go-back-n on the same drops") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    for (double p : {0.01, 0.05, 0.1}) {
      std::uint64_t rt[2];
      int k = 0;
      for (auto s : {Stack::ub_urma, Stack::roce_dma}) {
        LossConfig c;
        c.stack = s;
        c.ops = 1500;
        c.seed = seed;
        c.drop = [seed, p](std::uint32_t psn, std::uint32_t attempt) {
          return hashed_drop(seed, psn, attempt, p);
        };
        const auto r = run_loss_stream(c);
        REQUIRE(r.delivered == in_order(1500));
        rt[k++] = r.stats.retransmits;
      }
      CAPTURE(seed);
      CAPTURE(p);
      CHECK(rt[0] <= rt[1]);
    }
}

TEST_CASE("random loss: goodput and tail at 5%") {
  double ub_drop = 0, roce_drop = 0, roce_p99 = 0;
  const int trials = 4;
  for (int tr = 0; tr < trials; ++tr)
    for (auto s : {Stack::ub_urma, Stack::roce_dma}) {
      LossConfig c;
      c.stack = s;
      c.seed = kDefaultSeed + tr;
      const auto base = run_loss_stream(c);
      c.link.loss_rate = 0.05;
      const auto lossy = run_loss_stream(c);
      CHECK(lossy.delivered.size() == c.ops);
      const double drop = 100.0 * (1.0 - lossy.stats.goodput_ops / base.stats.goodput_ops);
      if (s == Stack::ub_urma) {
        ub_drop += drop / trials;
        // One selective retransmit costs at most one extra round trip.
        CHECK(lossy.stats.p99_ns / base.stats.p99_ns <= 2.0 + 1e-9);
      } else {
        roce_drop += drop / trials;
        roce_p99 += lossy.stats.p99_ns / base.stats.p99_ns / trials;
      }
    }
  CHECK(ub_drop <= 5.0);
  CHECK(roce_drop == doctest::Approx(17.0).epsilon(3.0 / 17.0));
  CHECK(roce_p99 == doctest::Approx(5.5).epsilon(0.20));
}

TEST_CASE("loss stream is deterministic per seed") {
  LossConfig c;
  c.stack = Stack::roce_dma;
  c.ops = 3000;
  c.link.loss_rate = 0.05;
  const auto a = run_loss_stream(c);
  const auto b = run_loss_stream(c);
  CHECK(a.stats.latencies_ns == b.stats.latencies_ns);
  CHECK(a.stats.retransmits == b.stats.retransmits);
}

TEST_CASE("rtt estimate is the cold READ") {
  LossConfig c;
  c.stack = Stack::roce_dma;
  c.ops = 10;
  CHECK(run_loss_stream(c).rtt_estimate_ns == doctest::Approx(2185.816));
}
