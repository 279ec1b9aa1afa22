#pragma once

#include <array>
#include <cstdint>
#include <list>
#include <string_view>
#include <unordered_map>

namespace ubsim::cache {

enum class Policy : std::uint8_t { write_back, write_through, uncached };
std::string_view name(Policy p);
Policy policy_from_name(std::string_view s);

enum class Level : std::uint8_t { l1 = 0, l2, llc, remote };
std::string_view name(Level l);

struct CacheConfig {
  std::array<std::uint32_t, 3> lines = {64, 256, 768};
  std::array<double, 3> hit_ns = {1, 4, 12};
  double local_dram_ns = 70;
  std::uint32_t line_bytes = 64;
  Policy policy = Policy::write_back;
};

// One fully-associative LRU level.
class LruSet {
 public:
  explicit LruSet(std::size_t capacity) : cap_(capacity) {}
  bool touch(std::uint64_t line);  // hit moves to MRU
  // Inserts at MRU; returns true and the victim if something was evicted.
  bool insert(std::uint64_t line, std::uint64_t* victim);
  bool contains(std::uint64_t line) const { return map_.count(line) != 0; }
  void erase(std::uint64_t line);
  std::size_t size() const { return map_.size(); }
  std::size_t capacity() const { return cap_; }

 private:
  std::size_t cap_;
  std::list<std::uint64_t> order_;  // front = MRU
  std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> map_;
};

struct Access {
  Level level;
  double latency_ns;
  bool hit;
};

// Inclusive L1/L2/LLC in front of remote memory. Misses cost the caller's
// remote round trip; hits short-circuit it.
class CacheModel {
 public:
  explicit CacheModel(CacheConfig cfg = {});
  Access access(std::uint64_t addr, bool is_write, double remote_load_ns, double remote_store_ns);
  const CacheConfig& config() const { return cfg_; }
  std::uint64_t writebacks() const { return writebacks_; }
  std::uint64_t hits() const { return hits_; }
  std::uint64_t misses() const { return misses_; }

 private:
  void install(std::uint64_t line, bool dirty);
  CacheConfig cfg_;
  std::array<LruSet, 3> levels_;
  std::unordered_map<std::uint64_t, bool> dirty_;
  std::uint64_t writebacks_ = 0, hits_ = 0, misses_ = 0;
};

}  // namespace ubsim::cache
