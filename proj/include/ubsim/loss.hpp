#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ubsim/costmodel.hpp"
#include "ubsim/engine.hpp"
#include "ubsim/transport.hpp"

namespace ubsim::engine {

// Closed-loop stream of single-packet WRITEs over one reliable channel.
struct LossConfig {
  Stack stack = Stack::ub_urma;  // ub_* -> SACK, roce_* -> Go-Back-N
  cost::CostParams params;
  LinkConfig link;
  std::uint32_t payload = 64;
  std::uint32_t depth = 8;  // application ops in flight
  std::uint32_t window = transport::kDefaultWindow;
  std::uint64_t ops = 12000;
  std::uint64_t seed = kDefaultSeed;
  double rto_multiplier = 3.0;
  // Overrides the random drop decision for data packets: (psn, attempt).
  std::function<bool(std::uint32_t, std::uint32_t)> drop;

  transport::Scheme scheme() const {
    return state::is_ub(stack) ? transport::Scheme::sack : transport::Scheme::gbn;
  }
};

struct LossResult {
  RunStats stats;
  std::uint64_t data_packets = 0;
  std::uint64_t dropped = 0;
  std::uint64_t naks = 0;
  std::uint64_t sacks = 0;
  std::uint64_t rto_fires = 0;
  std::vector<std::uint32_t> delivered;  // receiver's in-order delivery
  double rtt_estimate_ns = 0;
};

LossResult run_loss_stream(const LossConfig& cfg);

}  // namespace ubsim::engine
