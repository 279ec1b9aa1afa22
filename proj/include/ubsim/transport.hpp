#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ubsim/costmodel.hpp"
#include "ubsim/wire.hpp"

namespace ubsim::transport {

using cost::AckMode;

inline constexpr std::uint32_t kRingSlots = 64;
inline constexpr std::uint32_t kDefaultWindow = 32;

enum class Scheme : std::uint8_t { gbn, sack };

class WindowFull : public std::runtime_error {
 public:
  WindowFull() : std::runtime_error("transport window full") {}
};

// Sender side of one TP Channel (or one QP on RoCE). PSNs are 32-bit in the
// header; the simulator keeps them unwrapped.
class TxWindow {
 public:
  explicit TxWindow(std::uint32_t window_limit = kDefaultWindow);

  std::optional<std::uint32_t> try_allocate();
  std::uint32_t allocate_psn();  // throws WindowFull

  // Cumulative ack: everything below cum is done. Returns how many advanced.
  std::uint32_t ack_cumulative(std::uint32_t cum);
  // Per-packet or selective ack of one psn. Returns false if already acked.
  bool ack_one(std::uint32_t psn);
  bool is_acked(std::uint32_t psn) const;

  std::uint32_t psn_next() const { return psn_next_; }
  std::uint32_t last_acked() const { return una_; }  // lowest unacked psn
  std::uint32_t in_flight() const { return psn_next_ - una_; }
  std::uint32_t window_limit() const { return limit_; }
  bool slot_occupied(std::uint32_t psn) const;

  wire::PacketHeader& slot(std::uint32_t psn) { return ring_[psn % kRingSlots]; }

 private:
  void advance();
  std::uint32_t limit_;
  std::uint32_t psn_next_ = 0;
  std::uint32_t una_ = 0;
  std::array<wire::PacketHeader, kRingSlots> ring_{};
  std::array<bool, kRingSlots> acked_{};
};

// Serialisation charged to the k-th of several Jetties sharing one channel's
// PSN allocator (k counts from 0).
double psn_alloc_delay_ns(std::uint32_t position, const cost::CostParams& p);

enum class AckKind : std::uint8_t { ack, sack, nak, duplicate, none };

struct AckDecision {
  AckKind kind = AckKind::none;
  std::uint32_t cum = 0;        // epsn after processing
  std::uint64_t bitmap = 0;     // SACK bitmap over [cum, cum+64)
};

enum class RxStatus : std::uint8_t { accepted, duplicate, out_of_order, out_of_window };

struct RxResult {
  RxStatus status;
  std::vector<std::uint32_t> delivered;
  AckDecision ack;
};

class RxState {
 public:
  explicit RxState(Scheme scheme) : scheme_(scheme) {}
  RxResult receive(std::uint32_t psn);

  std::uint32_t epsn() const { return epsn_; }
  std::uint64_t sack_bitmap() const { return bitmap_; }
  std::uint32_t max_rcv_psn() const { return max_rcv_; }
  Scheme scheme() const { return scheme_; }

 private:
  Scheme scheme_;
  std::uint32_t epsn_ = 0;
  std::uint64_t bitmap_ = 0;
  std::uint32_t max_rcv_ = 0;
  bool seen_any_ = false;
};

enum class TriggerKind : std::uint8_t { nak, sack, rto };
struct Trigger {
  TriggerKind kind;
  std::uint32_t psn = 0;     // nak: first missing psn
  std::uint32_t cum = 0;     // sack: receiver epsn
  std::uint64_t bitmap = 0;  // sack: bits over [cum, cum+64)
};

std::vector<std::uint32_t> recover(const TxWindow& tx, const Trigger& t, Scheme scheme);

class RtoTimer {
 public:
  explicit RtoTimer(double rtt_estimate_ns, double multiplier = 3.0)
      : base_(rtt_estimate_ns * multiplier), current_(base_) {}
  double arm() { armed_ = true; return current_; }  // returns timeout duration
  double expire() { ++expiries_; current_ *= 2; return current_; }
  void on_progress() { current_ = base_; expiries_ = 0; }
  void cancel() { armed_ = false; }
  bool armed() const { return armed_; }
  double current() const { return current_; }
  std::uint32_t consecutive_expiries() const { return expiries_; }

 private:
  double base_;
  double current_;
  bool armed_ = false;
  std::uint32_t expiries_ = 0;
};

// Wire flits spent on one response including its acknowledgement(s).
std::uint32_t response_flits(AckMode mode, wire::ServiceMode sm, std::uint32_t payload);
bool ack_mode_admissible(AckMode mode, wire::ServiceMode sm);

}  // namespace ubsim::transport
