#include "ubsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ubsim/cache.hpp"
#include "ubsim/congestion.hpp"
#include "ubsim/loss.hpp"
#include "ubsim/state.hpp"
#include "ubsim/workloads.hpp"

namespace ubsim::harness {

using state::Stack;
using wire::Opcode;
namespace wl = workloads;

double RunContext::num(const std::string& key, double fallback) {
  used_.insert(key);
  auto it = extra_.find(key);
  if (it == extra_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigInvalid("parameter " + key + " is not a number: " + it->second);
  }
}

std::vector<std::string> RunContext::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : extra_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

namespace {

std::string sname(Stack s) { return std::string(state::name(s)); }
std::string u(std::uint64_t v) { return std::to_string(v); }

std::uint64_t count_knob(RunContext& c, const std::string& key, double fallback) {
  const double v = c.num(key, fallback);
  if (!(v >= 1) || v != std::floor(v)) throw ConfigInvalid(key + " must be a positive integer");
  return static_cast<std::uint64_t>(v);
}

Table make(const std::string& name, std::vector<std::string> cols) {
  Table t;
  t.experiment = name;
  t.columns = {"experiment", "stack"};
  t.columns.insert(t.columns.end(), cols.begin(), cols.end());
  return t;
}

std::string verb_label(Stack s, Opcode v) {
  return std::string(wire::name(cost::executed_verb(s, v)));
}

constexpr Stack kTableStacks[] = {Stack::ub_ldst, Stack::ub_urma, Stack::roce_dma};

Table per_side_table(RunContext& c) {
  auto t = make("per_side_table", {"row", "component", "kind", "ns"});
  for (auto s : kTableStacks) {
    const auto d = cost::roundtrip_decompose(s, Opcode::READ, c.params);
    int i = 0;
    for (const auto& comp : d.components)
      t.add({sname(s), std::to_string(++i), comp.name, std::string(cost::name(comp.kind)),
             fmt(comp.ns)});
    t.add({sname(s), "modeled", "Modeled total", "total", fmt(d.modeled_ns)});
    t.add({sname(s), "sched", "Scheduling overhead", "software", fmt(d.sched_ns)});
    t.add({sname(s), "measured", "Measured-equivalent total", "total", fmt(d.measured_ns)});
  }
  return t;
}

Table headline(RunContext& c) {
  auto t = make("headline", {"verb", "workload", "latency_ns", "ratio_roce_dma"});
  const std::pair<Opcode, const char*> verbs[] = {{Opcode::READ, "bulk_read"},
                                                  {Opcode::WRITE, "bulk_write"},
                                                  {Opcode::SEND, "pingpong"},
                                                  {Opcode::FAA, "dist_barrier"},
                                                  {Opcode::CAS, "cas_lock"}};
  for (auto s : state::kAllStacks)
    for (auto [v, w] : verbs) {
      cost::Extras x;
      x.payload = (v == Opcode::FAA || v == Opcode::CAS) ? 8 : 64;
      const double ns = cost::measured_ns(s, v, c.params, x);
      const double roce = cost::measured_ns(Stack::roce_dma, v, c.params, x);
      const std::string workload =
          s == Stack::ub_ldst && v == Opcode::READ ? "pointer_chase" : w;
      t.add({sname(s), verb_label(s, v), workload, fmt(ns), fmt(roce / ns, 4)});
    }
  return t;
}

Table sram_spill(RunContext& c) {
  auto t = make("sram_spill", {"endpoints", "live_contexts", "latency_ns"});
  for (std::uint64_t n : {2, 4, 8, 16, 20, 22, 23, 24, 32, 48, 64})
    t.add({sname(Stack::roce_dma), u(n), u(n * n),
           fmt(wl::spill_read_latency_ns(Stack::roce_dma, n * n, c.params))});
  for (std::uint64_t n : {1, 16, 64, 256, 512, 1000, 1024, 1025, 1100, 2048, 4096})
    t.add({sname(Stack::ub_ldst), u(n), u(n),
           fmt(wl::spill_read_latency_ns(Stack::ub_ldst, n, c.params))});
  return t;
}

Table m2n(RunContext& c) {
  auto t = make("m2n", {"targets", "latency_ns"});
  for (auto s : {Stack::ub_urma, Stack::roce_dma})
    for (std::uint32_t k = 1; k <= 1024; k *= 2)
      t.add({sname(s), u(k), fmt(wl::m2n_latency_ns(s, k, c.params))});
  return t;
}

Table loss_goodput(RunContext& c) {
  auto t = make("loss_goodput", {"loss_rate", "trial", "goodput_mops", "p50_ns", "p99_ns",
                                 "goodput_drop_pp", "p99_inflation", "retransmits", "rto_fires",
                                 "data_packets"});
  const auto ops = count_knob(c, "ops", 12000);
  const auto trials = count_knob(c, "trials", 4);
  const auto depth = count_knob(c, "depth", 8);
  for (auto s : {Stack::ub_urma, Stack::roce_dma})
    for (std::uint64_t tr = 0; tr < trials; ++tr) {
      engine::LossConfig cfg;
      cfg.stack = s;
      cfg.params = c.params;
      cfg.ops = ops;
      cfg.depth = static_cast<std::uint32_t>(depth);
      cfg.seed = c.seed + tr;
      cfg.link.delay_ns = c.params.wire_delay;
      const auto base = engine::run_loss_stream(cfg);
      for (double rate : {0.0, 0.01, 0.02, 0.05}) {
        cfg.link.loss_rate = rate;
        const auto r = rate == 0.0 ? base : engine::run_loss_stream(cfg);
        const double drop = 100.0 * (1.0 - r.stats.goodput_ops / base.stats.goodput_ops);
        t.add({sname(s), fmt(rate), u(tr), fmt(r.stats.goodput_ops / 1e6, 4), fmt(r.stats.p50_ns),
               fmt(r.stats.p99_ns), fmt(drop, 3), fmt(r.stats.p99_ns / base.stats.p99_ns, 4),
               u(r.stats.retransmits), u(r.rto_fires), u(r.data_packets)});
      }
    }
  return t;
}

Table congestion_exp(RunContext& c) {
  using namespace congestion;
  auto t = make("congestion", {"family", "mark_threshold", "utilisation", "marks", "packets",
                               "window_start", "window_final"});
  const auto slots = count_knob(c, "slots", 200000);
  for (double th : {0.8, 0.9, 0.97, 1.0}) {
    CaqmParams p;
    p.mark_threshold = th;
    auto cfg = default_caqm_incast();
    cfg.slots = slots;
    const auto r = caqm_incast(p, cfg);
    t.add({sname(Stack::ub_urma), "caqm", fmt(th), fmt(r.utilisation, 4), u(r.marks),
           u(r.delivered), "", ""});
  }
  {
    auto cfg = default_dcqcn_incast();
    cfg.slots = slots;
    DcqcnParams p;
    const auto r = dcqcn_incast(p, cfg);
    t.add({sname(Stack::roce_dma), "dcqcn", fmt(p.red_threshold), fmt(r.utilisation, 4),
           u(r.marks), u(r.delivered), "", ""});
  }
  const auto e = element_test();
  t.add({sname(Stack::ub_urma), "element_test", "", "", u(e.marked), u(e.packets),
         fmt(e.window_start), fmt(e.window_final)});
  return t;
}

Table jitter_cdf(RunContext& c) {
  auto t = make("jitter_cdf", {"factor", "statistic", "latency_ns"});
  const auto trials = count_knob(c, "trials", 5000);
  const double factor = c.num("factor", 0.2);
  const std::pair<const char*, double> qs[] = {{"p1", 0.01},   {"p10", 0.10}, {"p25", 0.25},
                                               {"p50", 0.50},  {"p75", 0.75}, {"p90", 0.90},
                                               {"p99", 0.99},  {"p99.9", 0.999}};
  for (auto s : state::kAllStacks)
    for (double f : {0.0, factor}) {
      const auto d = cost::roundtrip_decompose(s, Opcode::READ, c.params);
      Rng rng(c.seed, "jitter-" + sname(s));
      std::vector<double> xs(trials);
      for (auto& x : xs) x = cost::jittered_latency(rng, {f}, d);
      std::sort(xs.begin(), xs.end());
      for (auto [label, q] : qs)
        t.add({sname(s), fmt(f), label, fmt(engine::nearest_rank_sorted(xs, q), 3)});
      t.add({sname(s), fmt(f), "mean",
             fmt(std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size(), 3)});
    }
  return t;
}

Table mixed_order(RunContext& c) {
  auto t = make("mixed_order", {"so_fraction", "latency_ns", "ratio_roce_dma"});
  for (double f : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double roce = wl::mixed_order_latency_ns(Stack::roce_dma, f, c.params);
    for (auto s : {Stack::ub_ldst, Stack::roce_dma}) {
      const double ns = wl::mixed_order_latency_ns(s, f, c.params);
      t.add({sname(s), fmt(f), fmt(ns), fmt(roce / ns, 4)});
    }
  }
  return t;
}

Table fused_ack(RunContext& c) {
  auto t = make("fused_ack", {"verb", "service_mode", "ack_mode", "latency_ns", "saving_ns"});
  for (auto s : {Stack::ub_ldst, Stack::ub_urma})
    for (auto v : {Opcode::WRITE, Opcode::SEND}) {
      cost::Extras sep;
      sep.ack_mode = cost::AckMode::transaction_taack;
      const double separate = cost::measured_ns(s, v, c.params, sep);
      for (auto mode : {cost::AckMode::transaction_taack, cost::AckMode::fused}) {
        cost::Extras x;
        x.ack_mode = mode;
        const double ns = cost::measured_ns(s, v, c.params, x);
        t.add({sname(s), verb_label(s, v), "ROI", std::string(cost::name(mode)), fmt(ns),
               fmt(separate - ns)});
      }
      cost::Extras uno;
      uno.ack_mode = cost::AckMode::transaction_taack;
      uno.emits_ta_ack = false;
      const double ns = cost::measured_ns(s, v, c.params, uno);
      t.add({sname(s), verb_label(s, v), "UNO", "none", fmt(ns), fmt(separate - ns)});
    }
  return t;
}

Table payload_scaling(RunContext& c) {
  auto t = make("payload_scaling", {"payload", "latency_ns", "ratio_vs_ub_ldst"});
  for (std::uint32_t pl : {8u, 64u, 256u, 1024u, 4096u, 16384u, 65536u}) {
    const double ub = wl::payload_read_latency_ns(Stack::ub_ldst, pl, c.params);
    for (auto s : state::kAllStacks) {
      const double ns = wl::payload_read_latency_ns(s, pl, c.params);
      t.add({sname(s), u(pl), fmt(ns), fmt(ns / ub, 4)});
    }
  }
  return t;
}

Table cas_contention(RunContext& c) {
  auto t = make("cas_contention", {"contenders", "time_to_acquire_ns", "time_to_acquire_us"});
  for (auto s : {Stack::ub_urma, Stack::roce_dma})
    for (std::uint32_t k : {1, 2, 4, 8, 16, 22, 23, 32, 64, 128, 256}) {
      const double ns = wl::cas_time_to_acquire_ns(s, k, c.params);
      t.add({sname(s), u(k), fmt(ns), fmt(ns / 1000, 3)});
    }
  return t;
}

Table verb_asymmetry(RunContext& c) {
  auto t = make("verb_asymmetry", {"read_verb", "read_ns", "write_verb", "write_ns", "delta_ns"});
  for (auto s : state::kAllStacks) {
    const Opcode rd = s == Stack::ub_ldst ? Opcode::LOAD : Opcode::READ;
    const Opcode wr = s == Stack::ub_ldst ? Opcode::STORE : Opcode::WRITE;
    t.add({sname(s), std::string(wire::name(rd)), fmt(cost::measured_ns(s, rd, c.params)),
           std::string(wire::name(wr)), fmt(cost::measured_ns(s, wr, c.params)),
           fmt(cost::verb_direction_delta(s, c.params))});
  }
  return t;
}

Table conn_setup(RunContext&) {
  auto t = make("conn_setup", {"n", "m", "seconds"});
  for (auto s : {Stack::ub_urma, Stack::roce_dma})
    for (std::uint64_t n : {1, 8, 64, 256, 1024})
      t.add({sname(s), u(n), u(n), fmt(wl::conn_setup_seconds(s, n, n), 9)});
  return t;
}

Table state_scaling(RunContext&) {
  auto t = make("state_scaling", {"variant", "n", "m", "bytes", "formatted", "ratio_roce_over_ub"});
  for (std::uint64_t n : {1, 8, 64, 256, 1024}) {
    const auto roce = state::state_bytes_roce(n, n);
    for (bool full : {false, true}) {
      if (full && n != 1024) continue;
      const auto ub = state::state_bytes_ub(n, n, full);
      t.add({sname(Stack::ub_urma), full ? "full" : "mvp", u(n), u(n), u(ub),
             state::format_decimal_bytes(ub), fmt(static_cast<double>(roce) / ub, 1)});
    }
    t.add({sname(Stack::roce_dma), "qp", u(n), u(n), u(roce), state::format_decimal_bytes(roce),
           "1"});
  }
  return t;
}

Table fabric_state(RunContext&) {
  auto t = make("fabric_state", {"n", "fabric", "bytes"});
  for (std::uint64_t n : {8, 16, 64, 256, 1024, 4096, 16384}) {
    const auto f = state::fabric_state_curves(n);
    const std::pair<const char*, double> rows[] = {
        {"ub", f.ub}, {"roce", f.roce}, {"cxl_directory", f.cxl_dir}, {"nvlink", f.nvlink}};
    for (auto [name, b] : rows) t.add({"-", u(n), name, fmt(b, 0)});
  }
  return t;
}

Table coherent_overlay(RunContext& c) {
  auto t = make("coherent_overlay", {"loss_rate", "t_base_ns", "mops"});
  const double base = cost::measured_ns(Stack::ub_ldst, Opcode::LOAD, c.params);
  for (double l : {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2})
    t.add({sname(Stack::ub_ldst), fmt(l, 8), fmt(base),
           fmt(cost::coherent_fabric_overlay(l, base) / 1e6, 6)});
  return t;
}

Table swap_compare(RunContext& c) {
  auto t = make("swap_compare", {"system", "pattern", "ops", "mean_ns", "p99_ns"});
  const auto n = count_knob(c, "ops", 8500);
  const auto trials = count_knob(c, "trials", 3);
  const auto keys = count_knob(c, "keys", 65536);
  std::vector<std::vector<std::uint64_t>> zipf;
  for (std::uint64_t i = 0; i < trials; ++i)
    zipf.push_back(wl::zipf_keys(keys, 0.99, n, c.seed + i));
  std::vector<std::uint64_t> seq(16384);
  std::iota(seq.begin(), seq.end(), 0);
  auto emit = [&](Stack s, const std::string& sys, const std::string& pattern,
                  const std::function<std::vector<double>(const std::vector<std::uint64_t>&)>& f,
                  bool is_zipf) {
    std::vector<double> all;
    if (is_zipf) {
      for (const auto& k : zipf) {
        auto v = f(k);
        all.insert(all.end(), v.begin(), v.end());
      }
    } else {
      all = f(seq);
    }
    const double mean = std::accumulate(all.begin(), all.end(), 0.0) / all.size();
    t.add({sname(s), sys, pattern, u(all.size()), fmt(mean, 3), fmt(engine::percentile(all, 0.99), 3)});
  };
  for (bool z : {true, false}) {
    const std::string pattern = z ? "zipf" : "seq_scan";
    emit(Stack::ub_ldst, "ub_ldst", pattern,
         [&](const auto& k) { return wl::ub_ldst_key_latencies(k, c.params); }, z);
    emit(Stack::roce_dma, "infiniswap", pattern,
         [&](const auto& k) { return wl::swap_key_latencies(k, wl::infiniswap(), c.params); }, z);
    emit(Stack::roce_dma, "fastswap", pattern,
         [&](const auto& k) { return wl::swap_key_latencies(k, wl::fastswap(), c.params); }, z);
  }
  return t;
}

Table ycsb(RunContext& c) {
  auto t = make("ycsb", {"ops", "get_fraction", "mean_ns", "mops", "ratio_vs_roce_dma"});
  const auto ops = count_knob(c, "ops", 100000);
  const auto roce = wl::ycsb_a(Stack::roce_dma, c.params, ops, c.seed);
  for (auto s : state::kAllStacks) {
    const auto r = wl::ycsb_a(s, c.params, ops, c.seed);
    t.add({sname(s), u(ops), fmt(r.get_fraction, 4), fmt(r.mean_ns, 3), fmt(r.ops_per_s / 1e6, 4),
           fmt(r.ops_per_s / roce.ops_per_s, 4)});
  }
  return t;
}

// Sweeps that set locality themselves pass sweep_locality so the knob is
// not silently read and ignored.
engine::SimConfig pointer_chase(RunContext& c, Stack s, std::uint64_t ops, bool sweep_locality = false) {
  engine::SimConfig cfg;
  cfg.stack = s;
  cfg.params = c.params;
  cfg.link.delay_ns = c.params.wire_delay;
  cfg.locality = sweep_locality ? 0.0 : c.num("locality", wl::kPointerChaseLocality);
  cfg.ops = ops;
  cfg.seed = c.seed;
  return cfg;
}

Table envelope(RunContext& c) {
  auto t = make("envelope", {"offered_mops", "achieved_mops", "p50_ns", "p99_ns", "knee"});
  const auto ops = count_knob(c, "ops", 20000);
  for (auto s : {Stack::ub_ldst, Stack::roce_dma}) {
    auto cfg = pointer_chase(c, s, ops);
    const bool ub = s == Stack::ub_ldst;
    std::vector<double> rates;
    for (int i = 1; i <= 12; ++i) rates.push_back(ub ? 0.25 * i : 0.1 * i);
    for (const auto& pt : engine::open_loop_envelope(cfg, rates))
      t.add({sname(s), fmt(pt.offered_mops), fmt(pt.achieved_mops, 4), fmt(pt.p50_ns),
             fmt(pt.p99_ns), "0"});
    const auto k = engine::find_knee(cfg, 0.01, ub ? 4.0 : 2.0);
    if (k)
      t.add({sname(s), fmt(k->offered_mops), fmt(k->achieved_mops, 4), fmt(k->p50_ns),
             fmt(k->p99_ns), "1"});
  }
  return t;
}

Table concurrency(RunContext& c) {
  auto t = make("concurrency", {"depth", "mops", "wire_mops", "mean_ns"});
  const auto ops = count_knob(c, "ops", 10000);
  for (auto s : state::kAllStacks) {
    auto cfg = pointer_chase(c, s, ops);
    for (const auto& r : engine::sweep_concurrency(cfg, {1, 2, 4, 8, 16, 32, 64}))
      t.add({sname(s), u(r.depth), fmt(r.ops_per_s / 1e6, 4), fmt(r.wire_ops_per_s / 1e6, 4),
             fmt(r.mean_ns, 3)});
  }
  return t;
}

Table link_delay(RunContext& c) {
  auto t = make("link_delay", {"link_delay_ns", "mean_ns", "ratio_vs_ub_ldst", "gap_ns"});
  const auto ops = count_knob(c, "ops", 20000);
  for (double d : {50.0, 100.0, 200.0, 500.0}) {
    std::map<Stack, double> mean;
    for (auto s : state::kAllStacks) {
      auto cfg = pointer_chase(c, s, ops);
      cfg.link.delay_ns = d;
      mean[s] = engine::run(cfg).mean_ns;
    }
    for (auto s : state::kAllStacks)
      t.add({sname(s), fmt(d), fmt(mean[s], 3), fmt(mean[s] / mean[Stack::ub_ldst], 4),
             fmt(mean[s] - mean[Stack::ub_ldst], 3)});
  }
  return t;
}

Table tp_sharing(RunContext& c) {
  auto t = make("tp_sharing", {"sharers", "latency_ns", "slower_than_roce_dma"});
  const double roce = wl::tp_sharing_latency_ns(Stack::roce_dma, 1, c.params);
  for (auto s : {Stack::ub_urma, Stack::roce_dma})
    for (std::uint32_t k : {1, 16, 64, 128, 255, 256, 286, 287, 512, 1024}) {
      const double ns = wl::tp_sharing_latency_ns(s, k, c.params);
      t.add({sname(s), u(k), fmt(ns), ns > roce ? "1" : "0"});
    }
  return t;
}

Table mesh(RunContext&) {
  auto t = make("mesh", {"nodes", "latency_ns"});
  for (auto s : {Stack::ub_urma, Stack::roce_dma})
    for (std::uint32_t n : {2, 4, 8, 16, 22, 23, 32, 48, 64})
      t.add({sname(s), u(n), fmt(wl::mesh_latency_ns(s, n))});
  return t;
}

Table cache_policy(RunContext& c) {
  auto t = make("cache_policy", {"policy", "locality", "mean_ns", "hit_rate"});
  const auto ops = count_knob(c, "ops", 20000);
  for (auto s : {Stack::ub_ldst, Stack::roce_dma})
    for (auto pol : {cache::Policy::write_back, cache::Policy::write_through, cache::Policy::uncached})
      for (double loc : {0.0, 0.2, 0.5, 0.8}) {
        // RoCE verbs never consult the CPU cache; one policy row is enough.
        if (s == Stack::roce_dma && pol != cache::Policy::uncached) continue;
        auto cfg = pointer_chase(c, s, ops, true);
        cfg.locality = loc;
        cfg.cache.policy = pol;
        const auto st = engine::run(cfg);
        const double hr = 1.0 - static_cast<double>(st.wire_ops) / static_cast<double>(st.completed);
        t.add({sname(s), std::string(cache::name(pol)), fmt(loc), fmt(st.mean_ns, 3), fmt(hr, 4)});
      }
  return t;
}

}  // namespace

const std::vector<Experiment>& registry() {
  using K = Kind;
  static const std::vector<Experiment> r = {
      {"per_side_table", "per-side cost rows and totals for a 64 B READ", K::analytical, 0, per_side_table},
      {"headline", "mean latency by verb and stack", K::analytical, 0, headline},
      {"sram_spill", "64 B READ latency vs live connection contexts", K::analytical, 0, sram_spill},
      {"m2n", "fan-out SEND latency vs target count", K::analytical, 0, m2n},
      {"loss_goodput", "SACK vs Go-Back-N under random loss", K::stochastic, 0.25, loss_goodput},
      {"congestion", "incast utilisation and the marking element test", K::analytical, 0, congestion_exp},
      {"jitter_cdf", "READ latency distribution under PCIe and wire jitter", K::stochastic, 0.10, jitter_cdf},
      {"mixed_order", "per-op latency vs strong-order fraction", K::analytical, 0, mixed_order},
      {"fused_ack", "separate vs fused transaction ack", K::analytical, 0, fused_ack},
      {"payload_scaling", "READ latency vs payload", K::analytical, 0, payload_scaling},
      {"cas_contention", "lock time-to-acquire vs contenders", K::analytical, 0, cas_contention},
      {"verb_asymmetry", "read vs write direction cost", K::analytical, 0, verb_asymmetry},
      {"conn_setup", "connection setup time for an N x M job", K::analytical, 0, conn_setup},
      {"state_scaling", "per-NIC connection state vs endpoint count", K::analytical, 0, state_scaling},
      {"fabric_state", "state growth across fabrics", K::analytical, 0, fabric_state},
      {"coherent_overlay", "coherent fabric throughput vs loss", K::analytical, 0, coherent_overlay},
      {"swap_compare", "far-memory access: load/store vs kernel swap", K::stochastic, 0.15, swap_compare},
      {"ycsb", "YCSB-A mean latency and throughput", K::stochastic, 0.15, ycsb},
      {"envelope", "open-loop latency vs offered load", K::stochastic, 0.5, envelope},
      {"concurrency", "closed-loop op rate vs in-flight depth", K::stochastic, 0.10, concurrency},
      {"link_delay", "pointer-chase latency vs link delay", K::stochastic, 0.10, link_delay},
      {"tp_sharing", "shared TP channel vs per-QP latency", K::analytical, 0, tp_sharing},
      {"mesh", "all-to-all mesh latency vs node count", K::analytical, 0, mesh},
      {"cache_policy", "pointer-chase latency vs cache policy and locality", K::stochastic, 0.10, cache_policy},
  };
  return r;
}

const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  throw UnknownExperiment("unknown experiment: " + name);
}

Table run_experiment(const std::string& name, const std::map<std::string, std::string>& overrides,
                     std::uint64_t seed, const cost::CostParams& base) {
  const auto& e = find_experiment(name);
  cost::CostParams p = base;
  std::map<std::string, std::string> extra;
  std::set<std::string> cost_keys;
  for (const auto& f : cost::cost_param_fields()) cost_keys.insert(std::string(f.name));
  for (const auto& [k, v] : overrides) {
    if (!cost_keys.count(k)) {
      extra[k] = v;
      continue;
    }
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing text");
      cost::set_cost_param(p, k, x);
    } catch (const std::exception& ex) {
      throw ConfigInvalid("bad value for " + k + ": " + v);
    }
  }
  try {
    cost::validate(p);
  } catch (const std::invalid_argument& ex) {
    throw ConfigInvalid(ex.what());
  }
  RunContext ctx(p, seed, extra);
  Table t = e.run(ctx);
  const auto unused = ctx.unused();
  if (!unused.empty()) throw ConfigInvalid("unknown parameter for " + name + ": " + unused.front());
  return t;
}

std::string write_experiment(const std::string& name, const std::string& out_dir,
                             const std::map<std::string, std::string>& overrides,
                             std::uint64_t seed, const cost::CostParams& base) {
  const auto t = run_experiment(name, overrides, seed, base);
  std::filesystem::create_directories(out_dir);
  const auto path = (std::filesystem::path(out_dir) / (name + ".csv")).string();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << to_csv(t, seed);
  return path;
}

std::string default_golden_dir() {
#ifdef UBSIM_SOURCE_DIR
  return std::string(UBSIM_SOURCE_DIR) + "/tests/golden";
#else
  return "tests/golden";
#endif
}

namespace {

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

// Drops the seed from the schema comment so a different seed compares on
// the data alone.
std::string body(const std::string& csv) {
  const auto nl = csv.find('\n');
  return nl == std::string::npos ? "" : csv.substr(nl + 1);
}

}  // namespace

VerifyReport compare_csv(const Experiment& e, const std::string& golden, const std::string& fresh) {
  VerifyReport rep;
  rep.name = e.name;
  if (e.kind == Kind::analytical) {
    if (golden == fresh) {
      rep.pass = true;
      return rep;
    }
    std::istringstream a(golden), b(fresh);
    std::string la, lb;
    for (int line = 1;; ++line) {
      const bool ga = static_cast<bool>(std::getline(a, la));
      const bool gb = static_cast<bool>(std::getline(b, lb));
      if (!ga && !gb) break;
      if (la != lb || ga != gb)
        rep.diffs.push_back("line " + std::to_string(line) + ": golden '" + (ga ? la : "<eof>") +
                            "' fresh '" + (gb ? lb : "<eof>") + "'");
      if (rep.diffs.size() >= 20) break;
    }
    return rep;
  }
  if (body(golden) == body(fresh)) {
    rep.pass = true;
    return rep;
  }
  const Table g = parse_csv(golden), f = parse_csv(fresh);
  if (g.columns != f.columns) {
    rep.diffs.push_back("column set differs");
    return rep;
  }
  if (g.rows.size() != f.rows.size()) {
    rep.diffs.push_back("row count " + std::to_string(g.rows.size()) + " vs " +
                        std::to_string(f.rows.size()));
    return rep;
  }
  for (std::size_t r = 0; r < g.rows.size(); ++r)
    for (std::size_t c = 0; c < g.columns.size(); ++c) {
      const auto& a = g.rows[r][c];
      const auto& b = f.rows[r][c];
      double x, y;
      bool ok;
      if (parse_number(a, x) && parse_number(b, y))
        ok = std::fabs(x - y) <= e.tolerance * std::max(std::fabs(x), std::fabs(y)) + 1e-9;
      else
        ok = a == b;
      if (!ok)
        rep.diffs.push_back("row " + std::to_string(r + 1) + " " + g.columns[c] + ": golden " + a +
                            " fresh " + b);
    }
  rep.pass = rep.diffs.empty();
  return rep;
}

VerifyReport verify_golden(const std::string& name, const std::string& golden_dir,
                           std::uint64_t seed, const cost::CostParams& base) {
  const auto& e = find_experiment(name);
  const auto path = std::filesystem::path(golden_dir) / (name + ".csv");
  std::ifstream is(path, std::ios::binary);
  if (!is) throw GoldenMissing("no golden CSV at " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  const std::string golden = ss.str();
  const std::string fresh = to_csv(run_experiment(name, {}, seed, base), seed);
  // An analytical table does not depend on the seed; compare it without
  // the comment line so a seed override still byte-compares the data.
  if (e.kind == Kind::analytical) {
    auto rep = compare_csv(e, body(golden), body(fresh));
    return rep;
  }
  return compare_csv(e, golden, fresh);
}

Table run_grid(Stack s, std::uint64_t ops, std::uint64_t seed, const cost::CostParams& base) {
  auto t = make("grid", {"workload", "link_delay_ns", "depth", "payload", "policy", "locality",
                         "mean_ns", "p99_ns", "mops"});
  for (const auto& g : wl::sweep_grid()) {
    auto cfg = wl::to_sim_config(g, s, ops, seed);
    cfg.params = base;
    const auto st = engine::run(cfg);
    t.add({sname(s), std::string(engine::name(g.workload)), fmt(g.link_delay_ns), u(g.depth),
           u(g.payload), std::string(cache::name(g.policy)), fmt(g.locality), fmt(st.mean_ns, 3),
           fmt(st.p99_ns, 3), fmt(st.goodput_ops / 1e6, 4)});
  }
  return t;
}

}  // namespace ubsim::harness
