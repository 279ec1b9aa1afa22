#include <fstream>
#include <set>
#include <string>

#include "doctest.h"
#include "ubsim/rng.hpp"
#include "ubsim/wire.hpp"

using namespace ubsim;
using namespace ubsim::wire;

namespace {

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(UBSIM_SOURCE_DIR) + "/tests/golden/wire/" + name);
  REQUIRE_MESSAGE(in.good(), "missing fixture " << name);
  std::string s;
  in >> s;
  return s;
}

PacketHeader random_header(Rng& rng) {
  PacketHeader h;
  h.opcode = static_cast<Opcode>(rng.below(kOpcodeCount));
  h.src_jetty = static_cast<std::uint32_t>(rng.next());
  h.dst_jetty = static_cast<std::uint32_t>(rng.next());
  h.token = static_cast<std::uint32_t>(rng.next());
  h.psn = static_cast<std::uint32_t>(rng.next());
  h.tpmsn = static_cast<std::uint32_t>(rng.next());
  h.service_mode = static_cast<ServiceMode>(rng.below(4));
  h.exec_tag = static_cast<ExecTag>(rng.below(3));
  h.fence = rng.bernoulli(0.5);
  h.completion_order = rng.bernoulli(0.5);
  h.tp_bypass = bypass_allowed(h.opcode) && rng.bernoulli(0.5);
  h.cong_mark = rng.bernoulli(0.5);
  h.cong_increase_req = rng.bernoulli(0.5);
  h.cong_hint = static_cast<std::uint8_t>(rng.below(256));
  h.payload_len = static_cast<std::uint16_t>(rng.below(65536));
  return h;
}

}  // namespace

TEST_CASE("flit counts at the anchored payloads") {
  CHECK(flit_count(Opcode::WRITE, 4096) == 129);
  CHECK(flit_count(Opcode::WRITE, 8) == 2);
  CHECK(flit_count(Opcode::TPACK, 0) == 1);
  CHECK(flit_count(Opcode::WRITE, 9) == 2);
  CHECK(flit_count(Opcode::WRITE, 33) == 3);
}

TEST_CASE("flit count is at least one and monotone in payload") {
  for (int op = 0; op < kOpcodeCount; ++op) {
    std::uint32_t prev = 0;
    for (std::uint32_t len = 0; len <= 70000; len += 7) {
      const auto n = flit_count(static_cast<Opcode>(op), len);
      CHECK(n >= 1);
      CHECK(n >= prev);
      prev = n;
    }
  }
}

TEST_CASE("serialization time") {
  CHECK(serialization_ns(1, 400) == doctest::Approx(0.64));
  CHECK(serialization_ns(129, 400) == doctest::Approx(82.56));
  CHECK(serialization_ns(0, 400) == 0.0);
  CHECK_THROWS_AS(serialization_ns(1, 0), std::invalid_argument);
}

TEST_CASE("every opcode has exactly one class and only LOAD/STORE may bypass") {
  std::set<std::string_view> names;
  for (int i = 0; i < kOpcodeCount; ++i) {
    const auto op = static_cast<Opcode>(i);
    const auto c = classify(op);
    CHECK((c == OpClass::request || c == OpClass::response || c == OpClass::ack));
    CHECK(bypass_allowed(op) == (op == Opcode::LOAD || op == Opcode::STORE));
    CHECK(opcode_from_name(name(op)) == op);
    names.insert(name(op));
  }
  CHECK(names.size() == kOpcodeCount);
  CHECK(classify(Opcode::TPACK) == OpClass::ack);
  CHECK(classify(Opcode::TPSACK) == OpClass::ack);
  CHECK(classify(Opcode::NAK) == OpClass::ack);
  CHECK(classify(Opcode::READ) == OpClass::request);
  CHECK(is_atomic(Opcode::CAS));
  CHECK_FALSE(is_atomic(Opcode::READ));
}

TEST_CASE("golden header vectors") {
  CHECK(to_hex(encode_header(PacketHeader{})) == read_fixture("header_zero.hex"));

  PacketHeader w;
  w.opcode = Opcode::WRITE;
  w.src_jetty = 0x11223344;
  w.dst_jetty = 0xbeef;
  w.token = 0xcafef00d;
  w.psn = 4095;
  w.tpmsn = 17;
  w.service_mode = ServiceMode::ROL;
  w.exec_tag = ExecTag::SO;
  w.fence = true;
  w.completion_order = true;
  w.cong_mark = true;
  w.cong_hint = 0xa5;
  w.payload_len = 4096;
  CHECK(to_hex(encode_header(w)) == read_fixture("header_write_rol_so.hex"));

  PacketHeader l;
  l.opcode = Opcode::LOAD;
  l.tp_bypass = true;
  l.dst_jetty = 7;
  l.payload_len = 64;
  l.service_mode = ServiceMode::UNO;
  l.cong_increase_req = true;
  l.cong_hint = 255;
  CHECK(to_hex(encode_header(l)) == read_fixture("header_load_bypass.hex"));

  for (const char* f : {"header_zero.hex", "header_write_rol_so.hex", "header_load_bypass.hex"}) {
    const auto bytes = from_hex(read_fixture(f));
    const auto h = decode_header(bytes);
    const auto again = encode_header(h);
    CHECK(std::vector<std::uint8_t>(again.begin(), again.end()) == bytes);
  }
}

TEST_CASE("round trip over random headers") {
  Rng rng(kDefaultSeed, "wire-fuzz");
  for (int i = 0; i < 100000; ++i) {
    const auto h = random_header(rng);
    const auto b = encode_header(h);
    REQUIRE(decode_header(b) == h);
  }
}

TEST_CASE("cong_hint occupies exactly one byte") {
  PacketHeader base;
  base.opcode = Opcode::READ;
  base.psn = 99;
  const auto ref = encode_header(base);
  for (int v = 1; v < 256; ++v) {
    auto h = base;
    h.cong_hint = static_cast<std::uint8_t>(v);
    const auto b = encode_header(h);
    int differing = 0;
    for (std::size_t i = 0; i < kHeaderBytes; ++i) differing += b[i] != ref[i];
    CHECK(differing == 1);
  }
}

TEST_CASE("malformed headers are rejected") {
  const auto good = encode_header(PacketHeader{});
  std::vector<std::uint8_t> b(good.begin(), good.end());

  SUBCASE("truncated") {
    b.pop_back();
    CHECK_THROWS_AS(decode_header(b), MalformedHeader);
    CHECK_THROWS_AS(decode_header(std::vector<std::uint8_t>{}), MalformedHeader);
  }
  SUBCASE("too long") {
    b.push_back(0);
    CHECK_THROWS_AS(decode_header(b), MalformedHeader);
  }
  SUBCASE("service mode out of range") {
    b[1] = 4;
    CHECK_THROWS_AS(decode_header(b), MalformedHeader);
  }
  SUBCASE("opcode out of range") {
    b[0] = kOpcodeCount;
    CHECK_THROWS_AS(decode_header(b), MalformedHeader);
  }
  SUBCASE("execution tag out of range") {
    b[2] = 3;
    CHECK_THROWS_AS(decode_header(b), MalformedHeader);
  }
  SUBCASE("reserved byte") {
    b[31] = 1;
    CHECK_THROWS_AS(decode_header(b), MalformedHeader);
  }
  SUBCASE("bypass on a verb") {
    b[0] = static_cast<std::uint8_t>(Opcode::READ);
    b[4] = 1;
    CHECK_THROWS_AS(decode_header(b), MalformedHeader);
  }
}

TEST_CASE("bypass on a non load/store opcode cannot be encoded") {
  PacketHeader h;
  h.opcode = Opcode::WRITE;
  h.tp_bypass = true;
  CHECK_THROWS_AS(encode_header(h), std::invalid_argument);
}

TEST_CASE("hex helpers") {
  CHECK(to_hex(from_hex("00ff10Ab")) == "00ff10ab");
  CHECK_THROWS(from_hex("abc"));
  CHECK_THROWS(from_hex("zz"));
}
