#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "ubsim/cache.hpp"
#include "ubsim/costmodel.hpp"
#include "ubsim/rng.hpp"

namespace ubsim::engine {

using state::Stack;

// Internal clock: integer picoseconds (0.001 ns).
using Tick = std::int64_t;
inline Tick to_ticks(double ns) { return static_cast<Tick>(ns * 1000.0 + (ns >= 0 ? 0.5 : -0.5)); }
inline double to_ns(Tick t) { return static_cast<double>(t) / 1000.0; }

class ConfigInvalid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// (time, insertion sequence) total order; ties go to the earlier insert.
template <typename Payload>
class EventQueue {
 public:
  struct Event {
    Tick at;
    std::uint64_t seq;
    Payload data;
  };
  void push(Tick at, Payload p) {
    if (at < now_) throw std::logic_error("event scheduled in the past");
    heap_.push({at, seq_++, std::move(p)});
  }
  bool empty() const { return heap_.empty(); }
  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    now_ = e.at;
    return e;
  }
  Tick now() const { return now_; }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t seq_ = 0;
  Tick now_ = 0;
};

// Nearest rank on a sorted copy: the ceil(q*n)-th smallest sample.
double percentile(std::vector<double> samples, double q);
double nearest_rank_sorted(const std::vector<double>& sorted, double q);

struct RunStats {
  std::vector<double> latencies_ns;
  std::uint64_t issued = 0;
  std::uint64_t completed = 0;
  std::uint64_t lost = 0;  // dropped with no reliability underneath
  double elapsed_ns = 0;
  double mean_ns = 0;
  double p50_ns = 0;
  double p99_ns = 0;
  double p999_ns = 0;
  double goodput_ops = 0;   // ops per second
  double goodput_bytes = 0;  // bytes per second
  std::uint64_t wire_ops = 0;  // ops that crossed the link
  std::uint64_t retransmits = 0;
  std::uint64_t marks = 0;
  std::map<std::string, double> attribution_ns;  // mean per op by component

  void finalize(std::uint32_t payload_bytes);
};

enum class Workload : std::uint8_t {
  pointer_chase,  // LOAD on ub_ldst, READ elsewhere; mixed locality
  bulk_read,
  bulk_write,
  pingpong,      // SEND
  dist_barrier,  // FAA 8 B
  cas_lock,      // CAS 8 B
};
std::string_view name(Workload w);
Workload workload_from_name(std::string_view s);
wire::Opcode workload_verb(Workload w);

struct LinkConfig {
  double delay_ns = 100;
  double bandwidth_gbps = 400;
  double loss_rate = 0;
  double jitter_factor = 0;
};

struct SimConfig {
  Stack stack = Stack::ub_ldst;
  cost::CostParams params;
  cache::CacheConfig cache;
  double locality = 0.0;         // pointer-chase hot fraction
  std::uint32_t hot_lines = 32;  // pointer-chase hot set
  LinkConfig link;
  Workload workload = Workload::pointer_chase;
  std::uint32_t payload = 64;
  std::uint32_t concurrency = 1;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t ops = 10000;
  bool open_loop = false;
  double arrival_mops = 1.0;
  // Serialised issue stage seen by an open-loop driver; 0 picks the
  // stack default.
  double open_loop_issue_ns = 0;
  // Model the serialised host and NIC resources in closed-loop runs.
  bool contention = true;

  void validate() const;
};

double default_open_loop_issue_ns(Stack s);

// Latency of one link crossing, or nullopt if the packet is dropped.
std::optional<double> link_transmit(const LinkConfig& link, std::uint32_t flits, Rng& rng);

RunStats run(const SimConfig& cfg);

struct RatePoint {
  std::uint32_t depth;
  double ops_per_s;
  double wire_ops_per_s;
  double mean_ns;
};
std::vector<RatePoint> sweep_concurrency(SimConfig cfg, const std::vector<std::uint32_t>& depths);

struct EnvelopePoint {
  double offered_mops;
  double achieved_mops;
  double p50_ns;
  double p99_ns;
};
std::vector<EnvelopePoint> open_loop_envelope(SimConfig cfg, const std::vector<double>& rates_mops);
// Lowest grid rate whose p99 exceeds twice its p50.
std::optional<EnvelopePoint> find_knee(SimConfig cfg, double step_mops, double max_mops);

// Back-to-back burst through the NIC transmit pipeline alone.
double pipeline_burst_rate(Stack s, const cost::CostParams& p, std::uint32_t wrs = 256);

}  // namespace ubsim::engine
