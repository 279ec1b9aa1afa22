#include "ubsim/wire.hpp"

#include <vector>

namespace ubsim::wire {

namespace {

constexpr std::array<std::string_view, kOpcodeCount> kOpNames = {
    "LOAD", "STORE", "READ", "WRITE", "SEND", "CAS",    "SWAP",   "FAA",
    "FSUB", "FAND",  "FOR",  "FXOR",  "TPACK", "TAACK", "TPSACK", "NAK"};

// Byte offsets inside the metadata flit.
constexpr std::size_t kOffOpcode = 0;
constexpr std::size_t kOffMode = 1;
constexpr std::size_t kOffTag = 2;
constexpr std::size_t kOffOrder = 3;
constexpr std::size_t kOffTransport = 4;
constexpr std::size_t kOffCong = 5;
constexpr std::size_t kOffHint = 6;
constexpr std::size_t kOffSrc = 8;
constexpr std::size_t kOffDst = 12;
constexpr std::size_t kOffToken = 16;
constexpr std::size_t kOffPsn = 20;
constexpr std::size_t kOffTpmsn = 24;
constexpr std::size_t kOffLen = 28;

constexpr std::uint8_t kFenceBit = 0x01;
constexpr std::uint8_t kCompletionOrderBit = 0x02;
constexpr std::uint8_t kBypassBit = 0x01;
constexpr std::uint8_t kMarkBit = 0x01;
constexpr std::uint8_t kIncreaseBit = 0x02;

void put_u32(HeaderBytes& b, std::size_t off, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[off + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[off + i]) << (8 * i);
  return v;
}

}  // namespace

OpClass classify(Opcode op) {
  switch (op) {
    case Opcode::TAACK:
      return OpClass::response;
    case Opcode::TPACK:
    case Opcode::TPSACK:
    case Opcode::NAK:
      return OpClass::ack;
    default:
      return OpClass::request;
  }
}

bool is_atomic(Opcode op) {
  switch (op) {
    case Opcode::CAS:
    case Opcode::SWAP:
    case Opcode::FAA:
    case Opcode::FSUB:
    case Opcode::FAND:
    case Opcode::FOR:
    case Opcode::FXOR:
      return true;
    default:
      return false;
  }
}

bool bypass_allowed(Opcode op) { return op == Opcode::LOAD || op == Opcode::STORE; }

std::string_view name(Opcode op) { return kOpNames.at(static_cast<std::size_t>(op)); }

std::string_view name(ServiceMode m) {
  static constexpr std::array<std::string_view, 4> n = {"ROI", "ROT", "ROL", "UNO"};
  return n.at(static_cast<std::size_t>(m));
}

std::string_view name(ExecTag t) {
  static constexpr std::array<std::string_view, 3> n = {"NO", "RO", "SO"};
  return n.at(static_cast<std::size_t>(t));
}

Opcode opcode_from_name(std::string_view s) {
  for (std::size_t i = 0; i < kOpNames.size(); ++i)
    if (kOpNames[i] == s) return static_cast<Opcode>(i);
  throw std::invalid_argument("unknown opcode: " + std::string(s));
}

HeaderBytes encode_header(const PacketHeader& h) {
  if (h.tp_bypass && !bypass_allowed(h.opcode))
    throw std::invalid_argument("tp_bypass set on " + std::string(name(h.opcode)));
  HeaderBytes b{};
  b[kOffOpcode] = static_cast<std::uint8_t>(h.opcode);
  b[kOffMode] = static_cast<std::uint8_t>(h.service_mode);
  b[kOffTag] = static_cast<std::uint8_t>(h.exec_tag);
  b[kOffOrder] = (h.fence ? kFenceBit : 0) | (h.completion_order ? kCompletionOrderBit : 0);
  b[kOffTransport] = h.tp_bypass ? kBypassBit : 0;
  b[kOffCong] = (h.cong_mark ? kMarkBit : 0) | (h.cong_increase_req ? kIncreaseBit : 0);
  b[kOffHint] = h.cong_hint;
  put_u32(b, kOffSrc, h.src_jetty);
  put_u32(b, kOffDst, h.dst_jetty);
  put_u32(b, kOffToken, h.token);
  put_u32(b, kOffPsn, h.psn);
  put_u32(b, kOffTpmsn, h.tpmsn);
  b[kOffLen] = static_cast<std::uint8_t>(h.payload_len);
  b[kOffLen + 1] = static_cast<std::uint8_t>(h.payload_len >> 8);
  return b;
}

PacketHeader decode_header(std::span<const std::uint8_t> b) {
  if (b.size() != kHeaderBytes)
    throw MalformedHeader("header length " + std::to_string(b.size()) + ", expected 32");
  if (b[kOffOpcode] >= kOpcodeCount) throw MalformedHeader("invalid opcode");
  if (b[kOffMode] > static_cast<std::uint8_t>(ServiceMode::UNO))
    throw MalformedHeader("invalid service mode");
  if (b[kOffTag] > static_cast<std::uint8_t>(ExecTag::SO))
    throw MalformedHeader("invalid execution tag");
  if (b[kOffOrder] & ~(kFenceBit | kCompletionOrderBit))
    throw MalformedHeader("undefined ordering bits");
  if (b[kOffTransport] & ~kBypassBit) throw MalformedHeader("undefined transport bits");
  if (b[kOffCong] & ~(kMarkBit | kIncreaseBit)) throw MalformedHeader("undefined congestion bits");
  if (b[7] != 0 || b[30] != 0 || b[31] != 0) throw MalformedHeader("reserved byte set");

  PacketHeader h;
  h.opcode = static_cast<Opcode>(b[kOffOpcode]);
  h.service_mode = static_cast<ServiceMode>(b[kOffMode]);
  h.exec_tag = static_cast<ExecTag>(b[kOffTag]);
  h.fence = b[kOffOrder] & kFenceBit;
  h.completion_order = b[kOffOrder] & kCompletionOrderBit;
  h.tp_bypass = b[kOffTransport] & kBypassBit;
  h.cong_mark = b[kOffCong] & kMarkBit;
  h.cong_increase_req = b[kOffCong] & kIncreaseBit;
  h.cong_hint = b[kOffHint];
  h.src_jetty = get_u32(b, kOffSrc);
  h.dst_jetty = get_u32(b, kOffDst);
  h.token = get_u32(b, kOffToken);
  h.psn = get_u32(b, kOffPsn);
  h.tpmsn = get_u32(b, kOffTpmsn);
  h.payload_len = static_cast<std::uint16_t>(b[kOffLen] | (b[kOffLen + 1] << 8));
  if (h.tp_bypass && !bypass_allowed(h.opcode)) throw MalformedHeader("tp_bypass on non load/store");
  return h;
}

std::uint32_t flit_count(Opcode, std::uint32_t payload_len) {
  if (payload_len == 0) return 1;
  if (payload_len <= kInlinePayloadMax) return 2;
  return 1 + (payload_len + kFlitBytes - 1) / kFlitBytes;
}

double serialization_ns(std::uint64_t flits, double bandwidth_gbps) {
  if (bandwidth_gbps <= 0) throw std::invalid_argument("bandwidth must be positive");
  return static_cast<double>(flits) * kFlitBytes * 8.0 / bandwidth_gbps;
}

std::string to_hex(std::span<const std::uint8_t> b) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(b.size() * 2);
  for (auto x : b) {
    s.push_back(digits[x >> 4]);
    s.push_back(digits[x & 0xf]);
  }
  return s;
}

std::vector<std::uint8_t> from_hex(std::string_view s) {
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit");
  };
  if (s.size() % 2) throw std::invalid_argument("odd hex length");
  std::vector<std::uint8_t> out(s.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nib(s[2 * i]) << 4 | nib(s[2 * i + 1]));
  return out;
}

}  // namespace ubsim::wire
