#include "ubsim/transport.hpp"

#include <algorithm>
#include <bit>

namespace ubsim::transport {

TxWindow::TxWindow(std::uint32_t window_limit) : limit_(window_limit) {
  if (limit_ == 0 || limit_ > kRingSlots) throw std::invalid_argument("window limit must be 1..64");
}

std::optional<std::uint32_t> TxWindow::try_allocate() {
  if (in_flight() >= limit_) return std::nullopt;
  std::uint32_t psn = psn_next_++;
  acked_[psn % kRingSlots] = false;
  ring_[psn % kRingSlots] = {};
  ring_[psn % kRingSlots].psn = psn;
  return psn;
}

std::uint32_t TxWindow::allocate_psn() {
  auto p = try_allocate();
  if (!p) throw WindowFull();
  return *p;
}

bool TxWindow::slot_occupied(std::uint32_t psn) const {
  return psn >= una_ && psn < psn_next_ && !acked_[psn % kRingSlots];
}

bool TxWindow::is_acked(std::uint32_t psn) const {
  if (psn < una_) return true;
  if (psn >= psn_next_) return false;
  return acked_[psn % kRingSlots];
}

void TxWindow::advance() {
  while (una_ < psn_next_ && acked_[una_ % kRingSlots]) ++una_;
}

std::uint32_t TxWindow::ack_cumulative(std::uint32_t cum) {
  if (cum > psn_next_) cum = psn_next_;
  std::uint32_t before = una_;
  for (std::uint32_t p = una_; p < cum; ++p) acked_[p % kRingSlots] = true;
  advance();
  return una_ - before;
}

bool TxWindow::ack_one(std::uint32_t psn) {
  if (is_acked(psn) || psn >= psn_next_) return false;
  acked_[psn % kRingSlots] = true;
  advance();
  return true;
}

double psn_alloc_delay_ns(std::uint32_t position, const cost::CostParams& p) {
  return position * p.psn_alloc_ns;
}

RxResult RxState::receive(std::uint32_t psn) {
  RxResult r{RxStatus::accepted, {}, {}};
  if (psn < epsn_) {
    r.status = RxStatus::duplicate;
    r.ack = {AckKind::duplicate, epsn_, bitmap_};
    return r;
  }
  if (psn >= epsn_ + kRingSlots) {
    r.status = RxStatus::out_of_window;
    return r;
  }
  if (!seen_any_ || psn > max_rcv_) max_rcv_ = psn;
  seen_any_ = true;
  const std::uint32_t off = psn - epsn_;
  if (off == 0) {
    r.delivered.push_back(epsn_++);
    bitmap_ >>= 1;
    // Drain the contiguous out-of-order prefix held in the bitmap.
    while (bitmap_ & 1) {
      r.delivered.push_back(epsn_++);
      bitmap_ >>= 1;
    }
    r.ack = {AckKind::ack, epsn_, bitmap_};
    return r;
  }
  r.status = RxStatus::out_of_order;
  if (scheme_ == Scheme::gbn) {
    r.ack = {AckKind::nak, epsn_, 0};
    return r;
  }
  if (bitmap_ >> off & 1) {
    r.status = RxStatus::duplicate;
    r.ack = {AckKind::duplicate, epsn_, bitmap_};
    return r;
  }
  bitmap_ |= std::uint64_t{1} << off;
  r.ack = {AckKind::sack, epsn_, bitmap_};
  return r;
}

std::vector<std::uint32_t> recover(const TxWindow& tx, const Trigger& t, Scheme scheme) {
  std::vector<std::uint32_t> out;
  const std::uint32_t una = tx.last_acked();
  const std::uint32_t next = tx.psn_next();
  if (una >= next) return out;
  switch (t.kind) {
    case TriggerKind::nak: {
      std::uint32_t from = std::max(t.psn, una);
      if (scheme == Scheme::gbn) {
        for (std::uint32_t p = from; p < next; ++p) out.push_back(p);
      } else if (!tx.is_acked(from) && from < next) {
        out.push_back(from);
      }
      break;
    }
    case TriggerKind::sack: {
      if (scheme == Scheme::gbn) {
        for (std::uint32_t p = std::max(t.cum, una); p < next; ++p) out.push_back(p);
        break;
      }
      if (t.bitmap == 0) break;
      const std::uint32_t top = t.cum + (63 - std::countl_zero(t.bitmap));
      for (std::uint32_t p = std::max(t.cum, una); p < top && p < next; ++p) {
        const bool seen = p >= t.cum && (t.bitmap >> (p - t.cum) & 1);
        if (!seen && !tx.is_acked(p)) out.push_back(p);
      }
      break;
    }
    case TriggerKind::rto: {
      if (scheme == Scheme::gbn) {
        for (std::uint32_t p = una; p < next; ++p) out.push_back(p);
      } else {
        out.push_back(una);
      }
      break;
    }
  }
  return out;
}

bool ack_mode_admissible(AckMode mode, wire::ServiceMode sm) {
  return mode != AckMode::fused || sm == wire::ServiceMode::ROL;
}

std::uint32_t response_flits(AckMode mode, wire::ServiceMode sm, std::uint32_t payload) {
  if (!ack_mode_admissible(mode, sm)) throw std::invalid_argument("fused ack requires ROL");
  std::uint32_t f = wire::flit_count(wire::Opcode::TPACK, payload);
  if (mode == AckMode::transaction_taack && sm != wire::ServiceMode::UNO) f += 1;
  return f;
}

}  // namespace ubsim::transport
