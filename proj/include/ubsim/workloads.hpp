#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ubsim/cache.hpp"
#include "ubsim/costmodel.hpp"
#include "ubsim/engine.hpp"
#include "ubsim/rng.hpp"

namespace ubsim::workloads {

using state::Stack;
using wire::Opcode;

// Hot fraction of the pointer-chase stream. Chosen so ub_ldst runs near
// 2.5 Mops/s at depth 1.
inline constexpr double kPointerChaseLocality = 0.2;

// Calibrated constants that are only implied by endpoints. Every field is a
// knob; defaults reproduce the published anchors.
struct WorkloadParams {
  double cpu_dispatch_ns = 200;                // RoCE software fan-out for K >= 2
  double roce_qp_setup_s = 17.04 / 1048576.0;  // per QP pair
  double ub_object_setup_s = 0.016 / 2048.0;   // per Jetty/TP object
  double mesh_base_ub = 447;
  double mesh_base_roce = 2199;
  double mesh_slope_ns = 25;  // per additional peer sharing the wire
  double local_dram_ns = 70;
};

class ZipfSampler {
 public:
  // Ranks are mapped to keys by a permutation drawn from `seed`.
  ZipfSampler(std::uint64_t keys, double alpha, std::uint64_t seed);
  std::uint64_t sample(Rng& rng) const;
  std::uint64_t key_of_rank(std::uint64_t rank) const { return perm_[rank]; }
  double rank_mass(std::uint64_t rank) const;
  std::uint64_t keys() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
  std::vector<std::uint64_t> perm_;
};

enum class Variant : std::uint8_t {
  pointer_chase,
  bulk_read,
  bulk_write,
  pingpong,
  dist_barrier,
  cas_lock,
  ycsb_a,
  zipf_read,
  seq_scan,
  poisson,
};
std::string_view name(Variant v);

struct WorkloadSpec {
  Variant variant = Variant::zipf_read;
  std::uint64_t ops = 1000;
  std::uint32_t payload = 64;
  double locality = kPointerChaseLocality;
  std::uint32_t hot_lines = 32;
  double alpha = 0.99;
  std::uint64_t keys = 65536;
  std::uint64_t working_set_bytes = 1 << 20;  // seq_scan
  double rate_mops = 1.0;                      // poisson
  double get_fraction = 0.5;                   // ycsb_a
};

struct Op {
  Opcode verb = Opcode::READ;
  std::uint64_t addr = 0;  // byte address; key * 64 for keyed variants
  std::uint32_t payload = 64;
  wire::ExecTag order = wire::ExecTag::NO;
  double at_ns = 0;  // poisson arrival time, 0 otherwise
};

std::vector<Op> generate(const WorkloadSpec& spec, std::uint64_t seed);

double cas_time_to_acquire_ns(Stack s, std::uint32_t contenders, const cost::CostParams& p);
double m2n_latency_ns(Stack s, std::uint32_t targets, const cost::CostParams& p,
                      const WorkloadParams& w = {});
double conn_setup_seconds(Stack s, std::uint64_t n, std::uint64_t m, const WorkloadParams& w = {});
double mesh_latency_ns(Stack s, std::uint32_t nodes, const WorkloadParams& w = {});
// Per-op READ latency with K Jetties sharing one TP channel (UB) or K
// private QPs (RoCE).
double tp_sharing_latency_ns(Stack s, std::uint32_t k, const cost::CostParams& p);
// Smallest K at which shared-channel UB is slower than per-QP RoCE.
std::uint32_t tp_sharing_crossover(const cost::CostParams& p);
double mixed_order_latency_ns(Stack s, double so_fraction, const cost::CostParams& p);
// 64 B READ latency with `live` connections against the context cache.
double spill_read_latency_ns(Stack s, std::uint64_t live, const cost::CostParams& p);
double payload_read_latency_ns(Stack s, std::uint32_t payload, const cost::CostParams& p);

struct SwapProfile {
  std::string name;
  double kernel_pf_ns = 3000;
  std::uint32_t prefetch_pages = 0;
  std::uint32_t page_bytes = 4096;
  std::uint64_t resident_cap = 16384;
  std::uint32_t keys_per_page = 64;
};
SwapProfile infiniswap();
SwapProfile fastswap();

// Kernel page-swap far memory over RoCE DMA.
class SwapSim {
 public:
  SwapSim(SwapProfile prof, const cost::CostParams& p, const WorkloadParams& w = {});
  double access(std::uint64_t key);
  std::uint64_t faults() const { return faults_; }
  std::uint64_t resident() const { return lru_.size(); }

 private:
  SwapProfile prof_;
  double hit_ns_;
  double fetch_base_ns_;
  cost::CostParams p_;
  cache::LruSet lru_;
  std::uint64_t faults_ = 0;
};

// Latency per key for ub_ldst through the cache hierarchy.
std::vector<double> ub_ldst_key_latencies(const std::vector<std::uint64_t>& keys,
                                          const cost::CostParams& p,
                                          const cache::CacheConfig& cc = {});
std::vector<double> swap_key_latencies(const std::vector<std::uint64_t>& keys,
                                       const SwapProfile& prof, const cost::CostParams& p);

std::vector<std::uint64_t> zipf_keys(std::uint64_t keys, double alpha, std::uint64_t n,
                                     std::uint64_t seed);

struct YcsbResult {
  double mean_ns = 0;
  double ops_per_s = 0;
  double get_fraction = 0;
};
YcsbResult ycsb_a(Stack s, const cost::CostParams& p, std::uint64_t ops, std::uint64_t seed,
                  const cache::CacheConfig& cc = {});

// One point of the two-node sweep grid.
struct GridConfig {
  engine::Workload workload;
  double link_delay_ns;
  std::uint32_t depth;
  std::uint32_t payload;
  cache::Policy policy;
  double locality;
};
// Workload x link delay x depth, with payload swept for bulk transfers
// and cache policy x locality for pointer chase. Excluded: 64 KB bulk
// reads (LOAD tops out at 4 KB), depth > 1 for the CAS lock, and
// locality points under the uncached policy.
std::vector<GridConfig> sweep_grid();
engine::SimConfig to_sim_config(const GridConfig& g, Stack s, std::uint64_t ops,
                                std::uint64_t seed);

}  // namespace ubsim::workloads
