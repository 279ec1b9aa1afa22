#include "ubsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ubsim::engine {

double nearest_rank_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return 0.0;
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(s.size())));
  rank = std::clamp<std::size_t>(rank, 1, s.size());
  return s[rank - 1];
}

double percentile(std::vector<double> samples, double q) {
  std::sort(samples.begin(), samples.end());
  return nearest_rank_sorted(samples, q);
}

void RunStats::finalize(std::uint32_t payload_bytes) {
  completed = latencies_ns.size();
  if (latencies_ns.empty()) return;
  std::vector<double> s = latencies_ns;
  std::sort(s.begin(), s.end());
  mean_ns = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
  p50_ns = nearest_rank_sorted(s, 0.50);
  p99_ns = nearest_rank_sorted(s, 0.99);
  p999_ns = nearest_rank_sorted(s, 0.999);
  if (elapsed_ns > 0) {
    goodput_ops = static_cast<double>(completed) / elapsed_ns * 1e9;
    goodput_bytes = goodput_ops * payload_bytes;
  }
  for (auto& [k, v] : attribution_ns) v /= static_cast<double>(completed);
}

std::string_view name(Workload w) {
  switch (w) {
    case Workload::pointer_chase: return "pointer_chase";
    case Workload::bulk_read: return "bulk_read";
    case Workload::bulk_write: return "bulk_write";
    case Workload::pingpong: return "pingpong";
    case Workload::dist_barrier: return "dist_barrier";
    case Workload::cas_lock: return "cas_lock";
  }
  return "?";
}

Workload workload_from_name(std::string_view s) {
  for (auto w : {Workload::pointer_chase, Workload::bulk_read, Workload::bulk_write,
                 Workload::pingpong, Workload::dist_barrier, Workload::cas_lock})
    if (name(w) == s) return w;
  throw ConfigInvalid("unknown workload: " + std::string(s));
}

wire::Opcode workload_verb(Workload w) {
  using wire::Opcode;
  switch (w) {
    case Workload::pointer_chase:
    case Workload::bulk_read: return Opcode::READ;
    case Workload::bulk_write: return Opcode::WRITE;
    case Workload::pingpong: return Opcode::SEND;
    case Workload::dist_barrier: return Opcode::FAA;
    case Workload::cas_lock: return Opcode::CAS;
  }
  return Opcode::READ;
}

void SimConfig::validate() const {
  cost::validate(params);
  if (concurrency == 0) throw ConfigInvalid("concurrency must be >= 1");
  if (locality < 0 || locality > 1) throw ConfigInvalid("locality must be in [0,1]");
  if (link.loss_rate < 0 || link.loss_rate > 1) throw ConfigInvalid("loss rate must be in [0,1]");
  if (link.jitter_factor < 0) throw ConfigInvalid("jitter factor must be >= 0");
  if (link.delay_ns < 0 || link.bandwidth_gbps <= 0) throw ConfigInvalid("bad link");
  if (open_loop && arrival_mops <= 0) throw ConfigInvalid("arrival rate must be positive");
  if (payload > 65536) throw ConfigInvalid("payload above 64 KB");
  if (stack == Stack::ub_ldst && workload == Workload::pointer_chase && payload > 4096)
    throw ConfigInvalid("LOAD payload above 4 KB");
  (void)cost::executed_verb(stack, workload_verb(workload));
}

double default_open_loop_issue_ns(Stack s) { return state::is_ub(s) ? 200.0 : 670.0; }

std::optional<double> link_transmit(const LinkConfig& link, std::uint32_t flits, Rng& rng) {
  if (link.loss_rate > 0 && rng.bernoulli(link.loss_rate)) return std::nullopt;
  double d = link.delay_ns + wire::serialization_ns(flits, link.bandwidth_gbps);
  if (link.jitter_factor > 0) d += rng.exponential(link.jitter_factor * link.delay_ns);
  return d;
}

namespace {

enum Resource : int { kNone = -1, kHost = 0, kNic = 1, kIssue = 2, kResourceCount = 3 };

struct Stage {
  Tick latency;
  Tick occupancy;
  int resource;
};

struct OpState {
  Tick start;
  std::vector<Stage> stages;
};

void push_stage(std::vector<Stage>& v, Tick lat, Tick occ, int res) {
  if (res == kNone && !v.empty() && v.back().resource == kNone) {
    v.back().latency += lat;
    return;
  }
  v.push_back({lat, occ, res});
}

bool on_host(const cost::Component& c) {
  const bool initiator = c.side == cost::Side::initiator_pre || c.side == cost::Side::initiator_post;
  return initiator && c.ns > 0 && (c.kind == cost::Kind::software || c.kind == cost::Kind::pcie);
}

}  // namespace

RunStats run(const SimConfig& cfg_in) {
  SimConfig cfg = cfg_in;
  cfg.params.wire_delay = cfg.link.delay_ns;
  cfg.validate();

  RunStats st;
  if (cfg.ops == 0) return st;

  const auto verb = workload_verb(cfg.workload);
  cost::Extras ex;
  ex.payload = cfg.payload;
  const auto dec = cost::roundtrip_decompose(cfg.stack, verb, cfg.params, ex);
  const bool use_cache = cfg.stack == Stack::ub_ldst && cfg.workload == Workload::pointer_chase;
  const bool has_host = std::any_of(dec.components.begin(), dec.components.end(), on_host);
  const Stack exec = cost::executing_stack(cfg.stack, verb);
  const double nic_occ =
      exec == Stack::ub_ldst ? cfg.params.nic_ns(exec) : cfg.params.nic_service_ns(exec);
  const double issue_ns =
      cfg.open_loop_issue_ns > 0 ? cfg.open_loop_issue_ns : default_open_loop_issue_ns(cfg.stack);
  const bool contend = cfg.contention && !cfg.open_loop;

  Rng jitter_rng(cfg.seed, "jitter");
  Rng work_rng(cfg.seed, "workload");
  Rng arrival_rng(cfg.seed, "arrivals");
  Rng loss_rng(cfg.seed, "loss");
  cost::JitterModel jm{cfg.link.jitter_factor};
  cache::CacheModel cache(cfg.cache);
  std::uint64_t cold_next = std::uint64_t{1} << 40;

  std::vector<OpState> ops(cfg.ops);
  std::array<Tick, kResourceCount> free{};
  struct Ev {
    std::uint64_t op;
    std::uint32_t stage;
  };
  EventQueue<Ev> q;
  std::uint64_t issued = 0;
  std::uint64_t lost = 0;
  Tick last_done = 0;

  auto build = [&](std::uint64_t id) {
    auto& o = ops[id];
    if (cfg.open_loop) push_stage(o.stages, 0, to_ticks(issue_ns), kIssue);
    bool wire_op = true;
    if (use_cache) {
      std::uint64_t addr;
      if (work_rng.uniform() < cfg.locality) {
        addr = work_rng.below(cfg.hot_lines) * cfg.cache.line_bytes;
      } else {
        addr = cold_next;
        cold_next += cfg.cache.line_bytes;
      }
      auto a = cache.access(addr, false, dec.measured_ns, dec.measured_ns);
      if (a.hit) {
        wire_op = false;
        push_stage(o.stages, to_ticks(a.latency_ns), 0, kNone);
        st.attribution_ns["Cache hit"] += a.latency_ns;
      }
    }
    if (!wire_op) return;
    ++st.wire_ops;
    if (cfg.link.loss_rate > 0 &&
        (loss_rng.bernoulli(cfg.link.loss_rate) || loss_rng.bernoulli(cfg.link.loss_rate))) {
      // No reliability on this path: the op is gone once either crossing drops.
      o.stages.clear();
      o.stages.push_back({-1, 0, kNone});
      return;
    }
    for (const auto& c : dec.components) {
      const double ns = c.ns + cost::sample_jitter(jitter_rng, jm, c);
      st.attribution_ns[c.name] += c.ns;
      int res = kNone;
      Tick occ = 0;
      if (contend && has_host && on_host(c)) {
        res = kHost;
        occ = to_ticks(ns);
      } else if (contend && c.name == "NIC TX pipeline") {
        res = kNic;
        occ = to_ticks(nic_occ);
      }
      push_stage(o.stages, to_ticks(ns), occ, res);
    }
    if (dec.sched_ns > 0) {
      st.attribution_ns["Scheduling overhead"] += dec.sched_ns;
      const bool host = contend && has_host;
      push_stage(o.stages, to_ticks(dec.sched_ns), host ? to_ticks(dec.sched_ns) : 0,
                 host ? kHost : kNone);
    }
  };

  auto issue = [&](Tick t) {
    const std::uint64_t id = issued++;
    ops[id].start = t;
    build(id);
    q.push(t, {id, 0});
  };

  if (cfg.open_loop) {
    const double mean_gap = 1000.0 / cfg.arrival_mops;
    double t = 0;
    for (std::uint64_t i = 0; i < cfg.ops; ++i) {
      issue(to_ticks(t));
      t += arrival_rng.exponential(mean_gap);
    }
  } else {
    for (std::uint32_t i = 0; i < cfg.concurrency && issued < cfg.ops; ++i) issue(0);
  }

  while (!q.empty()) {
    auto e = q.pop();
    const Tick now = e.at;
    auto& o = ops[e.data.op];
    if (e.data.stage < o.stages.size()) {
      const Stage& s = o.stages[e.data.stage];
      if (s.latency < 0) {  // dropped
        ++lost;
        o.stages.clear();
        o.stages.shrink_to_fit();
        if (!cfg.open_loop && issued < cfg.ops) issue(now);
        continue;
      }
      Tick begin = now;
      if (s.resource != kNone) {
        begin = std::max(now, free[s.resource]);
        free[s.resource] = begin + s.occupancy;
      }
      q.push(begin + s.latency, {e.data.op, e.data.stage + 1});
      continue;
    }
    st.latencies_ns.push_back(to_ns(now - o.start));
    last_done = std::max(last_done, now);
    o.stages.clear();
    o.stages.shrink_to_fit();
    if (!cfg.open_loop && issued < cfg.ops) issue(now);
  }

  st.issued = issued;
  st.elapsed_ns = to_ns(last_done);
  st.retransmits = 0;
  st.finalize(cfg.payload);
  st.lost = lost;
  return st;
}

std::vector<RatePoint> sweep_concurrency(SimConfig cfg, const std::vector<std::uint32_t>& depths) {
  std::vector<RatePoint> out;
  for (auto d : depths) {
    if (d == 0) throw ConfigInvalid("depth must be >= 1");
    cfg.concurrency = d;
    cfg.open_loop = false;
    auto s = run(cfg);
    const double wire_rate = s.elapsed_ns > 0 ? s.wire_ops / s.elapsed_ns * 1e9 : 0.0;
    out.push_back({d, s.goodput_ops, wire_rate, s.mean_ns});
  }
  return out;
}

std::vector<EnvelopePoint> open_loop_envelope(SimConfig cfg, const std::vector<double>& rates) {
  std::vector<EnvelopePoint> out;
  cfg.open_loop = true;
  for (double r : rates) {
    cfg.arrival_mops = r;
    auto s = run(cfg);
    out.push_back({r, s.goodput_ops / 1e6, s.p50_ns, s.p99_ns});
  }
  return out;
}

std::optional<EnvelopePoint> find_knee(SimConfig cfg, double step, double max_mops) {
  cfg.open_loop = true;
  const auto steps = static_cast<int>(std::llround(max_mops / step));
  for (int i = 1; i <= steps; ++i) {
    cfg.arrival_mops = std::round(i * step * 1e6) / 1e6;
    auto s = run(cfg);
    if (s.p99_ns > 2.0 * s.p50_ns) return EnvelopePoint{cfg.arrival_mops, s.goodput_ops / 1e6,
                                                         s.p50_ns, s.p99_ns};
  }
  return std::nullopt;
}

double pipeline_burst_rate(Stack s, const cost::CostParams& p, std::uint32_t wrs) {
  if (wrs == 0) return 0;
  const Tick service = to_ticks(p.nic_service_ns(s));
  // All WRs are posted at t=0; each leaves after its predecessor's slot.
  Tick free = 0;
  for (std::uint32_t i = 0; i < wrs; ++i) free += service;
  return wrs / to_ns(free) * 1000.0;
}

}  // namespace ubsim::engine
