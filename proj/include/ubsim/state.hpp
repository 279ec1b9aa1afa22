#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ubsim::state {

struct Field {
  std::string_view name;
  std::uint32_t bytes;
  int sign = +1;  // -1 for alignment give-back
};

template <std::size_t N>
constexpr std::uint32_t field_sum(const Field (&f)[N]) {
  std::int64_t s = 0;
  for (const auto& x : f) s += x.sign * static_cast<std::int64_t>(x.bytes);
  return static_cast<std::uint32_t>(s);
}

inline constexpr Field kJettyMvpFields[] = {
    {"jetty_id", 4}, {"token_value", 4}, {"jfc_id", 4}, {"jetty_type", 1},
    {"state", 1},    {"valid", 1},       {"pad", 5}};

inline constexpr Field kJettyFullExtraFields[] = {
    {"sq_rq_handle", 8},  {"jfae_id", 4},       {"public_owner", 4},
    {"drain", 6},         {"exception_mode", 1}, {"fault_counter", 2},
    {"mr_perm_idx", 2},   {"group_backptr", 4},  {"alignment", 3, -1}};

inline constexpr Field kTpChannelFields[] = {
    {"remote_cna", 4}, {"local_remote_tpn", 8}, {"psn_next", 4}, {"tpmsn_next", 4},
    {"last_acked", 4}, {"flags", 2},            {"epsn", 4},     {"emsn", 4},
    {"base_psn", 4},   {"sack_bitmap", 8},      {"max_rcv_psn", 4}, {"mode_flags", 2},
    {"pad", 4}};

inline constexpr std::uint32_t kJettyMvpBytes = field_sum(kJettyMvpFields);
inline constexpr std::uint32_t kJettyFullBytes = kJettyMvpBytes + field_sum(kJettyFullExtraFields);
inline constexpr std::uint32_t kTpChannelBytes = field_sum(kTpChannelFields);
inline constexpr std::uint32_t kQueuePairBytes = 512;
inline constexpr std::uint32_t kMrRecordBytes = 32;
inline constexpr std::uint32_t kJettyGroupBytesPer8 = 80;

static_assert(kJettyMvpBytes == 20);
static_assert(kJettyFullBytes == 48);
static_assert(kTpChannelBytes == 56);

struct JettyDescriptor {
  std::uint32_t jetty_id = 0;
  std::uint32_t token_value = 0;
  std::uint32_t jfc_id = 0;
  std::uint8_t jetty_type = 0;
  std::uint8_t state = 0;
  std::uint8_t valid = 0;
};

struct TpChannel {
  std::uint32_t remote_cna = 0;
  std::uint32_t local_tpn = 0;
  std::uint32_t remote_tpn = 0;
  std::uint32_t psn_next = 0;
  std::uint32_t tpmsn_next = 0;
  std::uint32_t last_acked = 0;
  std::uint32_t epsn = 0;
  std::uint32_t emsn = 0;
  std::uint32_t base_psn = 0;
  std::uint64_t sack_bitmap = 0;
  std::uint32_t max_rcv_psn = 0;
};

enum class Stack : std::uint8_t { ub_ldst, ub_urma, roce_bf, roce_dma };
inline constexpr Stack kAllStacks[] = {Stack::ub_ldst, Stack::ub_urma, Stack::roce_bf,
                                       Stack::roce_dma};
std::string_view name(Stack s);
Stack stack_from_name(std::string_view s);
inline bool is_ub(Stack s) { return s == Stack::ub_ldst || s == Stack::ub_urma; }

std::uint64_t state_bytes_ub(std::uint64_t n, std::uint64_t m, bool full_spec);
std::uint64_t state_bytes_roce(std::uint64_t n, std::uint64_t m);
// Decimal units, one decimal place: "110.6 KB", "536.9 MB".
std::string format_decimal_bytes(std::uint64_t bytes);

struct ContextCache {
  std::uint64_t capacity_bytes = 262144;
  std::uint64_t entry_bytes = kQueuePairBytes;
  // When nonzero the spill point is this many live contexts instead of
  // the byte comparison.
  std::uint64_t threshold_contexts = 0;
  double spill_penalty_ns = 1000.0;

  bool spilled(std::uint64_t live_contexts) const;
};

ContextCache default_context_cache(Stack s);
double spill_lookup(const ContextCache& cache, std::uint64_t live_contexts);

enum class DispatchPolicy : std::uint8_t { hint_hash, round_robin, queue_depth };

struct JettyGroup {
  std::uint32_t group_id = 0;
  std::vector<std::uint32_t> members;
  DispatchPolicy policy = DispatchPolicy::round_robin;
  std::uint32_t rr_cursor = 0;

  std::uint64_t state_bytes() const;
};

class UnknownGroup : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Returns the chosen member index; throws on an empty group.
std::size_t group_dispatch(JettyGroup& g, std::uint32_t hint,
                           const std::vector<std::uint32_t>& queue_depths);

class GroupTable {
 public:
  void add(JettyGroup g);
  bool contains(std::uint32_t id) const { return groups_.count(id) != 0; }
  // Resolves dst to a member jetty. Unregistered ids pass through.
  std::uint32_t resolve(std::uint32_t dst, std::uint32_t hint,
                        const std::vector<std::uint32_t>& queue_depths = {});
  JettyGroup& at(std::uint32_t id);

 private:
  std::map<std::uint32_t, JettyGroup> groups_;
};

struct FabricState {
  double ub;
  double roce;
  double cxl_dir;
  double nvlink;
};
FabricState fabric_state_curves(std::uint64_t n);

}  // namespace ubsim::state
