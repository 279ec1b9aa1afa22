#include "ubsim/state.hpp"

#include <algorithm>
#include <cstdio>

namespace ubsim::state {

std::string_view name(Stack s) {
  switch (s) {
    case Stack::ub_ldst: return "ub_ldst";
    case Stack::ub_urma: return "ub_urma";
    case Stack::roce_bf: return "roce_bf";
    case Stack::roce_dma: return "roce_dma";
  }
  return "?";
}

Stack stack_from_name(std::string_view s) {
  for (auto st : kAllStacks)
    if (name(st) == s) return st;
  throw std::invalid_argument("unknown stack: " + std::string(s));
}

std::uint64_t state_bytes_ub(std::uint64_t n, std::uint64_t m, bool full_spec) {
  const std::uint64_t jetty = full_spec ? kJettyFullBytes : kJettyMvpBytes;
  return n * (jetty + kMrRecordBytes) + m * kTpChannelBytes;
}

std::uint64_t state_bytes_roce(std::uint64_t n, std::uint64_t m) {
  return n * m * kQueuePairBytes + n * kMrRecordBytes;
}

std::string format_decimal_bytes(std::uint64_t bytes) {
  char buf[32];
  if (bytes < 1000) {
    std::snprintf(buf, sizeof buf, "%llu B", static_cast<unsigned long long>(bytes));
    return buf;
  }
  static constexpr const char* units[] = {"KB", "MB", "GB", "TB"};
  double v = static_cast<double>(bytes) / 1000.0;
  int u = 0;
  while (v >= 1000.0 && u < 3) {
    v /= 1000.0;
    ++u;
  }
  std::snprintf(buf, sizeof buf, "%.1f %s", v, units[u]);
  return buf;
}

bool ContextCache::spilled(std::uint64_t live_contexts) const {
  if (threshold_contexts > 0) return live_contexts > threshold_contexts;
  return live_contexts * entry_bytes > capacity_bytes;
}

ContextCache default_context_cache(Stack s) {
  ContextCache c;
  if (is_ub(s)) {
    c.entry_bytes = kTpChannelBytes;
    c.threshold_contexts = 1024;
    c.spill_penalty_ns = 200.0;
  }
  return c;
}

double spill_lookup(const ContextCache& cache, std::uint64_t live_contexts) {
  return cache.spilled(live_contexts) ? cache.spill_penalty_ns : 0.0;
}

std::uint64_t JettyGroup::state_bytes() const {
  return kJettyGroupBytesPer8 * ((members.size() + 7) / 8);
}

std::size_t group_dispatch(JettyGroup& g, std::uint32_t hint,
                           const std::vector<std::uint32_t>& queue_depths) {
  if (g.members.empty()) throw std::invalid_argument("empty jetty group");
  const std::size_t n = g.members.size();
  switch (g.policy) {
    case DispatchPolicy::hint_hash:
      return hint % n;
    case DispatchPolicy::round_robin: {
      std::size_t i = g.rr_cursor % n;
      g.rr_cursor = static_cast<std::uint32_t>((i + 1) % n);
      return i;
    }
    case DispatchPolicy::queue_depth: {
      if (queue_depths.size() != n) throw std::invalid_argument("queue depth list size mismatch");
      return static_cast<std::size_t>(std::min_element(queue_depths.begin(), queue_depths.end()) -
                                      queue_depths.begin());
    }
  }
  return 0;
}

void GroupTable::add(JettyGroup g) {
  auto id = g.group_id;
  groups_[id] = std::move(g);
}

std::uint32_t GroupTable::resolve(std::uint32_t dst, std::uint32_t hint,
                                  const std::vector<std::uint32_t>& queue_depths) {
  auto it = groups_.find(dst);
  if (it == groups_.end()) return dst;
  auto& g = it->second;
  return g.members[group_dispatch(g, hint, queue_depths)];
}

JettyGroup& GroupTable::at(std::uint32_t id) {
  auto it = groups_.find(id);
  if (it == groups_.end()) throw UnknownGroup("group " + std::to_string(id));
  return it->second;
}

FabricState fabric_state_curves(std::uint64_t n) {
  const double nn = static_cast<double>(n);
  constexpr double kDirectoryWays = 1e6;
  return {136.0 * nn, 512.0 * nn * nn, kDirectoryWays * (nn / 8.0 + 8.0), 2e9 * nn};
}

}  // namespace ubsim::state
