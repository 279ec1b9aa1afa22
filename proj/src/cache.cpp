#include "ubsim/cache.hpp"

#include <stdexcept>
#include <string>

namespace ubsim::cache {

std::string_view name(Policy p) {
  switch (p) {
    case Policy::write_back: return "WB";
    case Policy::write_through: return "WT";
    case Policy::uncached: return "UC";
  }
  return "?";
}

Policy policy_from_name(std::string_view s) {
  if (s == "WB" || s == "write_back") return Policy::write_back;
  if (s == "WT" || s == "write_through") return Policy::write_through;
  if (s == "UC" || s == "uncached") return Policy::uncached;
  throw std::invalid_argument("unknown cache policy: " + std::string(s));
}

std::string_view name(Level l) {
  switch (l) {
    case Level::l1: return "L1";
    case Level::l2: return "L2";
    case Level::llc: return "LLC";
    case Level::remote: return "remote";
  }
  return "?";
}

bool LruSet::touch(std::uint64_t line) {
  auto it = map_.find(line);
  if (it == map_.end()) return false;
  order_.splice(order_.begin(), order_, it->second);
  return true;
}

bool LruSet::insert(std::uint64_t line, std::uint64_t* victim) {
  if (touch(line)) return false;
  bool evicted = false;
  if (cap_ == 0) {
    if (victim) *victim = line;
    return true;
  }
  if (map_.size() >= cap_) {
    std::uint64_t v = order_.back();
    order_.pop_back();
    map_.erase(v);
    if (victim) *victim = v;
    evicted = true;
  }
  order_.push_front(line);
  map_[line] = order_.begin();
  return evicted;
}

void LruSet::erase(std::uint64_t line) {
  auto it = map_.find(line);
  if (it == map_.end()) return;
  order_.erase(it->second);
  map_.erase(it);
}

CacheModel::CacheModel(CacheConfig cfg)
    : cfg_(cfg), levels_{LruSet(cfg.lines[0]), LruSet(cfg.lines[1]), LruSet(cfg.lines[2])} {
  if (cfg_.line_bytes == 0) throw std::invalid_argument("line size must be positive");
}

void CacheModel::install(std::uint64_t line, bool dirty) {
  // Inclusion: an LLC victim is back-invalidated from the upper levels.
  std::uint64_t victim = 0;
  if (levels_[2].insert(line, &victim)) {
    levels_[1].erase(victim);
    levels_[0].erase(victim);
    auto d = dirty_.find(victim);
    if (d != dirty_.end()) {
      if (d->second) ++writebacks_;
      dirty_.erase(d);
    }
  }
  if (levels_[1].insert(line, &victim)) levels_[0].erase(victim);
  levels_[0].insert(line, nullptr);
  if (dirty) dirty_[line] = true;
}

Access CacheModel::access(std::uint64_t addr, bool is_write, double remote_load_ns,
                          double remote_store_ns) {
  const std::uint64_t line = addr / cfg_.line_bytes;
  const double remote = is_write ? remote_store_ns : remote_load_ns;
  if (cfg_.policy == Policy::uncached) {
    ++misses_;
    return {Level::remote, remote, false};
  }
  for (int l = 0; l < 3; ++l) {
    if (levels_[l].touch(line)) {
      ++hits_;
      // Refill the levels above so the next touch hits closer.
      std::uint64_t victim = 0;
      if (l == 2 && levels_[1].insert(line, &victim)) levels_[0].erase(victim);
      if (l >= 1) levels_[0].insert(line, nullptr);
      if (is_write && cfg_.policy == Policy::write_back) dirty_[line] = true;
      if (is_write && cfg_.policy == Policy::write_through)
        return {static_cast<Level>(l), remote_store_ns, true};
      return {static_cast<Level>(l), cfg_.hit_ns[l], true};
    }
  }
  ++misses_;
  install(line, is_write && cfg_.policy == Policy::write_back);
  return {Level::remote, remote, false};
}

}  // namespace ubsim::cache
