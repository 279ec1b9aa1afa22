#include "ubsim/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ubsim/ordering.hpp"

namespace ubsim::workloads {

namespace {

state::ContextCache context_cache(Stack s, const cost::CostParams& p) {
  auto c = state::default_context_cache(s);
  c.spill_penalty_ns = state::is_ub(s) ? p.spill_ub : p.spill_roce;
  return c;
}

// Live contexts when every one of K peers talks to every other.
std::uint64_t full_mesh_contexts(Stack s, std::uint64_t k) { return state::is_ub(s) ? k : k * k; }

Stack wr_stack(Stack s) { return s == Stack::ub_ldst ? Stack::ub_urma : s; }

}  // namespace

ZipfSampler::ZipfSampler(std::uint64_t keys, double alpha, std::uint64_t seed) {
  if (keys == 0) throw std::invalid_argument("zipf needs at least one key");
  cdf_.resize(keys);
  double sum = 0;
  for (std::uint64_t r = 0; r < keys; ++r) {
    sum += 1.0 / std::pow(static_cast<double>(r + 1), alpha);
    cdf_[r] = sum;
  }
  for (auto& c : cdf_) c /= sum;
  cdf_.back() = 1.0;
  perm_.resize(keys);
  for (std::uint64_t i = 0; i < keys; ++i) perm_[i] = i;
  Rng rng(seed, "zipf-permutation");
  for (std::uint64_t i = keys - 1; i > 0; --i) std::swap(perm_[i], perm_[rng.below(i + 1)]);
}

std::uint64_t ZipfSampler::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  return perm_[static_cast<std::uint64_t>(it - cdf_.begin())];
}

double ZipfSampler::rank_mass(std::uint64_t rank) const {
  return rank == 0 ? cdf_[0] : cdf_[rank] - cdf_[rank - 1];
}

std::string_view name(Variant v) {
  switch (v) {
    case Variant::pointer_chase: return "pointer_chase";
    case Variant::bulk_read: return "bulk_read";
    case Variant::bulk_write: return "bulk_write";
    case Variant::pingpong: return "pingpong";
    case Variant::dist_barrier: return "dist_barrier";
    case Variant::cas_lock: return "cas_lock";
    case Variant::ycsb_a: return "ycsb_a";
    case Variant::zipf_read: return "zipf_read";
    case Variant::seq_scan: return "seq_scan";
    case Variant::poisson: return "poisson";
  }
  return "?";
}

std::vector<Op> generate(const WorkloadSpec& spec, std::uint64_t seed) {
  std::vector<Op> out;
  out.reserve(spec.ops);
  Rng rng(seed, "workload");
  std::uint64_t cold = std::uint64_t{1} << 40;
  auto push = [&](Opcode v, std::uint64_t addr, std::uint32_t payload) {
    out.push_back({v, addr, payload, wire::ExecTag::NO, 0});
  };
  switch (spec.variant) {
    case Variant::pointer_chase:
      for (std::uint64_t i = 0; i < spec.ops; ++i) {
        if (rng.uniform() < spec.locality) {
          push(Opcode::LOAD, rng.below(spec.hot_lines) * 64, 64);
        } else {
          push(Opcode::LOAD, cold, 64);
          cold += 64;
        }
      }
      break;
    case Variant::bulk_read:
    case Variant::bulk_write: {
      const Opcode v = spec.variant == Variant::bulk_read ? Opcode::READ : Opcode::WRITE;
      for (std::uint64_t i = 0; i < spec.ops; ++i) push(v, i * spec.payload, spec.payload);
      break;
    }
    case Variant::pingpong:
      for (std::uint64_t i = 0; i < spec.ops; ++i) push(Opcode::SEND, 0, spec.payload);
      break;
    case Variant::dist_barrier:
      for (std::uint64_t i = 0; i < spec.ops; ++i) push(Opcode::FAA, 0, 8);
      break;
    case Variant::cas_lock:
      for (std::uint64_t i = 0; i < spec.ops; ++i) push(Opcode::CAS, 0, 8);
      break;
    case Variant::ycsb_a:
    case Variant::zipf_read: {
      ZipfSampler z(spec.keys, spec.alpha, seed);
      Rng mix(seed, "ycsb-mix");
      for (std::uint64_t i = 0; i < spec.ops; ++i) {
        const std::uint64_t key = z.sample(rng);
        Opcode v = Opcode::READ;
        if (spec.variant == Variant::ycsb_a && !mix.bernoulli(spec.get_fraction)) v = Opcode::WRITE;
        push(v, key * 64, 64);
      }
      break;
    }
    case Variant::seq_scan: {
      const std::uint64_t lines = std::max<std::uint64_t>(1, spec.working_set_bytes / 64);
      for (std::uint64_t i = 0; i < spec.ops; ++i) push(Opcode::READ, (i % lines) * 64, 64);
      break;
    }
    case Variant::poisson: {
      if (spec.rate_mops <= 0) throw std::invalid_argument("poisson rate must be positive");
      double t = 0;
      for (std::uint64_t i = 0; i < spec.ops; ++i) {
        push(Opcode::READ, 0, spec.payload);
        out.back().at_ns = t;
        t += rng.exponential(1000.0 / spec.rate_mops);
      }
      break;
    }
  }
  return out;
}

double cas_time_to_acquire_ns(Stack s, std::uint32_t k, const cost::CostParams& p) {
  if (k == 0) throw std::invalid_argument("need at least one contender");
  const double t_cas = cost::measured_ns(s, Opcode::CAS, p);
  const double spill = state::spill_lookup(context_cache(s, p), full_mesh_contexts(s, k));
  return k * (t_cas + spill);
}

double m2n_latency_ns(Stack s, std::uint32_t k, const cost::CostParams& p,
                      const WorkloadParams& w) {
  if (k == 0) throw std::invalid_argument("need at least one target");
  const double send = cost::measured_ns(wr_stack(s), Opcode::SEND, p);
  // UB resolves the target group in hardware over a shared TP pool.
  if (state::is_ub(s)) return send;
  double t = send + p.roce_psn_serial_ns;
  if (k >= 2) t += w.cpu_dispatch_ns;
  return t + state::spill_lookup(context_cache(s, p), k);
}

double conn_setup_seconds(Stack s, std::uint64_t n, std::uint64_t m, const WorkloadParams& w) {
  if (n == 0 || m == 0) throw std::invalid_argument("need at least one endpoint per side");
  if (state::is_ub(s)) return static_cast<double>(n + m) * w.ub_object_setup_s;
  return static_cast<double>(n * m) * w.roce_qp_setup_s;
}

double mesh_latency_ns(Stack s, std::uint32_t n, const WorkloadParams& w) {
  if (n < 2) throw std::invalid_argument("mesh needs at least two nodes");
  const bool ub = state::is_ub(s);
  const double base = ub ? w.mesh_base_ub : w.mesh_base_roce;
  const cost::CostParams p;
  return base + w.mesh_slope_ns * (n - 2) +
         state::spill_lookup(context_cache(s, p), full_mesh_contexts(s, n));
}

double tp_sharing_latency_ns(Stack s, std::uint32_t k, const cost::CostParams& p) {
  if (k == 0) throw std::invalid_argument("need at least one sharer");
  const double base = cost::measured_ns(wr_stack(s), Opcode::READ, p);
  if (!state::is_ub(s)) return base;
  return base + p.psn_alloc_ns * (k - 1);
}

std::uint32_t tp_sharing_crossover(const cost::CostParams& p) {
  const double roce = tp_sharing_latency_ns(Stack::roce_dma, 1, p);
  for (std::uint32_t k = 1; k < (1u << 20); ++k)
    if (tp_sharing_latency_ns(Stack::ub_urma, k, p) > roce) return k;
  return 0;
}

double mixed_order_latency_ns(Stack s, double so_fraction, const cost::CostParams& p) {
  if (so_fraction < 0 || so_fraction > 1) throw std::invalid_argument("SO fraction out of [0,1]");
  const bool ub = state::is_ub(s);
  const double base = cost::measured_ns(s, Opcode::READ, p);
  ordering::OrderingMode so{wire::ServiceMode::ROI, wire::ExecTag::SO};
  ordering::OrderingMode no{};
  return base + so_fraction * ordering::gating_delay_ns(ub, so, true, p) +
         (1 - so_fraction) * ordering::gating_delay_ns(ub, no, false, p);
}

double spill_read_latency_ns(Stack s, std::uint64_t live, const cost::CostParams& p) {
  cost::Extras x;
  x.spill_ns = state::spill_lookup(context_cache(s, p), live);
  return cost::measured_ns(s, Opcode::READ, p, x);
}

double payload_read_latency_ns(Stack s, std::uint32_t payload, const cost::CostParams& p) {
  cost::Extras x;
  x.payload = payload;
  return cost::measured_ns(s, Opcode::READ, p, x);
}

SwapProfile infiniswap() { return {"infiniswap", 3000, 0}; }
SwapProfile fastswap() { return {"fastswap", 1000, 8}; }

SwapSim::SwapSim(SwapProfile prof, const cost::CostParams& p, const WorkloadParams& w)
    : prof_(std::move(prof)), hit_ns_(w.local_dram_ns), p_(p), lru_(prof_.resident_cap) {
  fetch_base_ns_ = cost::measured_ns(Stack::roce_dma, Opcode::READ, p);
}

double SwapSim::access(std::uint64_t key) {
  const std::uint64_t page = key / prof_.keys_per_page;
  if (lru_.touch(page)) return hit_ns_;
  ++faults_;
  // The faulting page plus the prefetch window, fetched as one transfer
  // whether or not the neighbours are already resident.
  const std::uint32_t pages = 1 + prof_.prefetch_pages;
  std::uint64_t victim = 0;
  for (std::uint32_t i = 0; i < pages; ++i)
    if (!lru_.touch(page + i)) lru_.insert(page + i, &victim);
  lru_.touch(page);
  const double bytes = static_cast<double>(prof_.page_bytes) * pages;
  const double fetch =
      fetch_base_ns_ + cost::payload_extra_ns(fetch_base_ns_, static_cast<std::uint32_t>(bytes), p_);
  return prof_.kernel_pf_ns + fetch;
}

std::vector<double> ub_ldst_key_latencies(const std::vector<std::uint64_t>& keys,
                                          const cost::CostParams& p,
                                          const cache::CacheConfig& cc) {
  cache::CacheModel c(cc);
  const double remote = cost::measured_ns(Stack::ub_ldst, Opcode::READ, p);
  std::vector<double> out;
  out.reserve(keys.size());
  for (auto k : keys) out.push_back(c.access(k * cc.line_bytes, false, remote, remote).latency_ns);
  return out;
}

std::vector<double> swap_key_latencies(const std::vector<std::uint64_t>& keys,
                                       const SwapProfile& prof, const cost::CostParams& p) {
  SwapSim sim(prof, p);
  std::vector<double> out;
  out.reserve(keys.size());
  for (auto k : keys) out.push_back(sim.access(k));
  return out;
}

std::vector<std::uint64_t> zipf_keys(std::uint64_t keys, double alpha, std::uint64_t n,
                                     std::uint64_t seed) {
  ZipfSampler z(keys, alpha, seed);
  Rng rng(seed, "zipf-draw");
  std::vector<std::uint64_t> out(n);
  for (auto& k : out) k = z.sample(rng);
  return out;
}

YcsbResult ycsb_a(Stack s, const cost::CostParams& p, std::uint64_t ops, std::uint64_t seed,
                  const cache::CacheConfig& cc) {
  WorkloadSpec spec;
  spec.variant = Variant::ycsb_a;
  spec.keys = 10000;
  spec.ops = ops;
  const auto stream = generate(spec, seed);
  YcsbResult r;
  if (stream.empty()) return r;
  cache::CacheModel c(cc);
  const double load = cost::measured_ns(s, Opcode::READ, p);
  const double store = cost::measured_ns(s, Opcode::WRITE, p);
  const bool cached = s == Stack::ub_ldst;
  double total = 0;
  std::uint64_t gets = 0;
  for (const auto& op : stream) {
    const bool put = op.verb == Opcode::WRITE;
    gets += put ? 0 : 1;
    if (cached) {
      const double remote = cost::measured_ns(s, Opcode::READ, p);
      total += c.access(op.addr, put, remote, remote).latency_ns;
    } else {
      total += put ? store : load;
    }
  }
  r.mean_ns = total / stream.size();
  r.ops_per_s = 1e9 / r.mean_ns;
  r.get_fraction = static_cast<double>(gets) / stream.size();
  return r;
}

std::vector<GridConfig> sweep_grid() {
  using engine::Workload;
  const double links[] = {50, 100, 200, 500};
  const std::uint32_t depths[] = {1, 4, 16, 64};
  const std::uint32_t payloads[] = {8, 64, 256, 1024, 4096, 16384, 65536};
  const double localities[] = {0.0, kPointerChaseLocality, 0.5, 0.8};
  const cache::Policy policies[] = {cache::Policy::write_back, cache::Policy::write_through,
                                    cache::Policy::uncached};
  std::vector<GridConfig> g;
  const auto wb = cache::Policy::write_back;
  for (double l : links) {
    for (std::uint32_t d : depths) {
      for (auto pol : policies)
        for (double loc : localities) {
          if (pol == cache::Policy::uncached && loc != 0.0) continue;
          g.push_back({Workload::pointer_chase, l, d, 64, pol, loc});
        }
      for (auto w : {Workload::bulk_read, Workload::bulk_write})
        for (auto pl : payloads) {
          if (w == Workload::bulk_read && pl == 65536) continue;
          g.push_back({w, l, d, pl, wb, 0.0});
        }
      g.push_back({Workload::pingpong, l, d, 64, wb, 0.0});
      g.push_back({Workload::dist_barrier, l, d, 8, wb, 0.0});
      if (d == 1) g.push_back({Workload::cas_lock, l, d, 8, wb, 0.0});
    }
  }
  return g;
}

engine::SimConfig to_sim_config(const GridConfig& g, Stack s, std::uint64_t ops,
                                std::uint64_t seed) {
  engine::SimConfig c;
  c.stack = s;
  c.workload = g.workload;
  c.link.delay_ns = g.link_delay_ns;
  c.concurrency = g.depth;
  c.payload = g.payload;
  c.cache.policy = g.policy;
  c.locality = g.locality;
  c.ops = ops;
  c.seed = seed;
  return c;
}

}  // namespace ubsim::workloads
