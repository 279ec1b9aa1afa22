#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ubsim::wire {

enum class Opcode : std::uint8_t {
  LOAD = 0,
  STORE,
  READ,
  WRITE,
  SEND,
  CAS,
  SWAP,
  FAA,
  FSUB,
  FAND,
  FOR,
  FXOR,
  TPACK,
  TAACK,
  TPSACK,
  NAK,
};
inline constexpr int kOpcodeCount = 16;

enum class OpClass : std::uint8_t { request, response, ack };

enum class ServiceMode : std::uint8_t { ROI = 0, ROT, ROL, UNO };
enum class ExecTag : std::uint8_t { NO = 0, RO, SO };

OpClass classify(Opcode op);
bool is_atomic(Opcode op);
bool bypass_allowed(Opcode op);
std::string_view name(Opcode op);
std::string_view name(ServiceMode m);
std::string_view name(ExecTag t);
Opcode opcode_from_name(std::string_view s);

struct PacketHeader {
  Opcode opcode = Opcode::LOAD;
  std::uint32_t src_jetty = 0;
  std::uint32_t dst_jetty = 0;
  std::uint32_t token = 0;
  std::uint32_t psn = 0;
  std::uint32_t tpmsn = 0;
  ServiceMode service_mode = ServiceMode::ROI;
  ExecTag exec_tag = ExecTag::NO;
  bool fence = false;
  bool completion_order = false;
  bool tp_bypass = false;
  bool cong_mark = false;
  bool cong_increase_req = false;
  std::uint8_t cong_hint = 0;
  std::uint16_t payload_len = 0;

  bool operator==(const PacketHeader&) const = default;
};

// One metadata flit. See docs/wire-format.md for the byte map.
inline constexpr std::size_t kHeaderBytes = 32;
inline constexpr std::size_t kFlitBytes = 32;
inline constexpr std::size_t kInlinePayloadMax = 8;

using HeaderBytes = std::array<std::uint8_t, kHeaderBytes>;

class MalformedHeader : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// tp_bypass on a non LOAD/STORE opcode is not representable on the wire;
// encode throws rather than emit a header decode would reject.
HeaderBytes encode_header(const PacketHeader& h);
PacketHeader decode_header(std::span<const std::uint8_t> b);

enum class FlitKind : std::uint8_t { metadata, extension, payload };

std::uint32_t flit_count(Opcode op, std::uint32_t payload_len);
double serialization_ns(std::uint64_t flits, double bandwidth_gbps);

std::string to_hex(std::span<const std::uint8_t> b);
std::vector<std::uint8_t> from_hex(std::string_view s);

}  // namespace ubsim::wire
