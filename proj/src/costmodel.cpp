#include "ubsim/costmodel.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ubsim::cost {

double CostParams::nic_ns(Stack s) const {
  switch (s) {
    case Stack::ub_ldst: return nic_cycles_ub_ldst * cycle_ns;
    case Stack::ub_urma: return nic_cycles_ub_urma * cycle_ns;
    default: return nic_cycles_roce * cycle_ns;
  }
}

double CostParams::sched_ns(Stack s) const {
  if (sched_enabled == 0) return 0;
  switch (s) {
    case Stack::ub_ldst: return sched_ub_ldst;
    case Stack::ub_urma: return sched_ub_urma;
    default: return sched_roce;
  }
}

double CostParams::nic_service_ns(Stack s) const {
  return 1000.0 / (state::is_ub(s) ? nic_rate_ub : nic_rate_roce);
}

const std::vector<ParamField>& cost_param_fields() {
  using P = CostParams;
  static const std::vector<ParamField> f = {
      {"verb_post", &P::verb_post},
      {"wqe_construct", &P::wqe_construct},
      {"doorbell_mmio", &P::doorbell_mmio},
      {"dma_wqe_fetch", &P::dma_wqe_fetch},
      {"pcie_dma_read", &P::pcie_dma_read},
      {"pcie_dma_write", &P::pcie_dma_write},
      {"dma_cqe_write", &P::dma_cqe_write},
      {"cqe_poll_roce", &P::cqe_poll_roce},
      {"cqe_poll_ub", &P::cqe_poll_ub},
      {"verb_poll", &P::verb_poll},
      {"membus", &P::membus},
      {"wire_delay", &P::wire_delay},
      {"wire_bandwidth", &P::wire_bandwidth},
      {"dram_row_hit", &P::dram_row_hit},
      {"nic_cycles_ub_ldst", &P::nic_cycles_ub_ldst},
      {"nic_cycles_ub_urma", &P::nic_cycles_ub_urma},
      {"nic_cycles_roce", &P::nic_cycles_roce},
      {"cycle_ns", &P::cycle_ns},
      {"sched_ub_ldst", &P::sched_ub_ldst},
      {"sched_ub_urma", &P::sched_ub_urma},
      {"sched_roce", &P::sched_roce},
      {"sched_enabled", &P::sched_enabled},
      {"ack_tx_saving_ub", &P::ack_tx_saving_ub},
      {"ack_tx_saving_roce", &P::ack_tx_saving_roce},
      {"recv_match", &P::recv_match},
      {"payload_flit_stream_ns", &P::payload_flit_stream_ns},
      {"payload_flit_floor_ns", &P::payload_flit_floor_ns},
      {"separate_ack_ns", &P::separate_ack_ns},
      {"order_gate_ns", &P::order_gate_ns},
      {"roce_psn_serial_ns", &P::roce_psn_serial_ns},
      {"psn_alloc_ns", &P::psn_alloc_ns},
      {"spill_roce", &P::spill_roce},
      {"spill_ub", &P::spill_ub},
      {"nic_rate_ub", &P::nic_rate_ub},
      {"nic_rate_roce", &P::nic_rate_roce},
  };
  return f;
}

void set_cost_param(CostParams& p, std::string_view key, double value) {
  for (const auto& f : cost_param_fields()) {
    if (f.name == key) {
      if (!(value >= 0)) throw std::invalid_argument(std::string(key) + " must be >= 0");
      p.*f.ptr = value;
      return;
    }
  }
  throw std::invalid_argument("unknown cost parameter: " + std::string(key));
}

double get_cost_param(const CostParams& p, std::string_view key) {
  for (const auto& f : cost_param_fields())
    if (f.name == key) return p.*f.ptr;
  throw std::invalid_argument("unknown cost parameter: " + std::string(key));
}

void validate(const CostParams& p) {
  for (const auto& f : cost_param_fields())
    if (!(p.*f.ptr >= 0)) throw std::invalid_argument(std::string(f.name) + " must be >= 0");
  if (p.wire_bandwidth <= 0 || p.nic_rate_ub <= 0 || p.nic_rate_roce <= 0)
    throw std::invalid_argument("rates must be positive");
}

CostParams load_cost_params(const std::string& path, CostParams base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cost config " + path);
  auto j = nlohmann::json::parse(in);
  if (!j.is_object()) throw std::invalid_argument("cost config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) throw std::invalid_argument(it.key() + " is not a number");
    set_cost_param(base, it.key(), it.value().get<double>());
  }
  validate(base);
  return base;
}

std::string dump_cost_params(const CostParams& p) {
  nlohmann::ordered_json j;
  for (const auto& f : cost_param_fields()) j[std::string(f.name)] = p.*f.ptr;
  return j.dump(2);
}

std::string_view name(Kind k) {
  switch (k) {
    case Kind::software: return "software";
    case Kind::onchip: return "onchip";
    case Kind::pcie: return "pcie";
    case Kind::wire: return "wire";
    case Kind::nic: return "nic";
  }
  return "?";
}

std::string_view name(AckMode m) {
  switch (m) {
    case AckMode::per_packet: return "per_packet";
    case AckMode::transaction_taack: return "transaction_taack";
    case AckMode::fused: return "fused";
  }
  return "?";
}

Opcode executed_verb(Stack s, Opcode v) {
  if (wire::classify(v) != wire::OpClass::request)
    throw InadmissibleVerb(std::string(wire::name(v)) + " is not an application verb");
  if (s == Stack::ub_ldst) return v == Opcode::READ ? Opcode::LOAD : v;
  if (v == Opcode::LOAD || v == Opcode::STORE)
    throw InadmissibleVerb(std::string(wire::name(v)) + " only runs on ub_ldst");
  return v;
}

Stack executing_stack(Stack s, Opcode v) {
  Opcode e = executed_verb(s, v);
  if (s == Stack::ub_ldst && e != Opcode::LOAD && e != Opcode::STORE) return Stack::ub_urma;
  return s;
}

double payload_extra_ns(double base_ns, std::uint32_t payload, const CostParams& p) {
  const std::uint32_t data_flits = (payload + 31) / 32;
  const double extra = data_flits > 2 ? data_flits - 2 : 0;
  const double floor = wire::flit_count(Opcode::READ, payload) * p.payload_flit_floor_ns;
  return std::max(base_ns + extra * p.payload_flit_stream_ns, floor) - base_ns;
}

Decomposition roundtrip_decompose(Stack requested, Opcode verb, const CostParams& p,
                                  const Extras& x) {
  const Opcode v = executed_verb(requested, verb);
  const Stack s = executing_stack(requested, verb);
  const bool ub = state::is_ub(s);
  const bool roce = !ub;
  const bool ldst = s == Stack::ub_ldst;
  const bool data_response = v == Opcode::READ || v == Opcode::LOAD;
  const bool target_reads = data_response || wire::is_atomic(v);
  const double nic = p.nic_ns(s);
  const double ack_saving =
      (ldst || data_response) ? 0.0 : (ub ? p.ack_tx_saving_ub : p.ack_tx_saving_roce);

  Decomposition d;
  d.stack = requested;
  d.verb = v;
  auto add = [&](const char* n, double ns, Kind k, Side sd) {
    d.components.push_back({n, ns, k, sd});
  };
  using enum Side;
  add("Verb library post", ldst ? 0 : p.verb_post, Kind::software, initiator_pre);
  add("WQE construct", ldst ? 0 : p.wqe_construct, Kind::software, initiator_pre);
  add("Doorbell MMIO", roce ? p.doorbell_mmio : 0, Kind::pcie, initiator_pre);
  add("DMA WQE fetch", s == Stack::roce_dma ? p.dma_wqe_fetch : 0, Kind::pcie, initiator_pre);
  add("Submit (membus)", ub ? p.membus : 0, Kind::onchip, initiator_pre);
  add("NIC TX pipeline", nic, Kind::nic, initiator_pre);
  add("Wire forward", p.wire_delay, Kind::wire, wire_fwd);
  add("NIC RX (stack proc.)", nic, Kind::nic, target);
  if (ub)
    add("Target NIC<->DRAM", p.membus, Kind::onchip, target);
  else
    add("Target NIC<->DRAM", target_reads ? p.pcie_dma_read : p.pcie_dma_write, Kind::pcie, target);
  add("Target DRAM row hit", p.dram_row_hit, Kind::onchip, target);
  if (v == Opcode::SEND) add("Target receive match", p.recv_match, Kind::onchip, target);
  add("NIC TX (response)", nic - ack_saving, Kind::nic, target);
  add("Wire back", p.wire_delay, Kind::wire, wire_back);
  add("NIC RX (response)", nic, Kind::nic, initiator_post);
  add("Initiator resp DMA", roce && data_response ? p.pcie_dma_write : 0, Kind::pcie, initiator_post);
  add("DMA CQE write", roce ? p.dma_cqe_write : 0, Kind::pcie, initiator_post);
  add("Complete (membus)", ub ? p.membus : 0, Kind::onchip, initiator_post);
  add("CQE poll", ldst ? 0 : (ub ? p.cqe_poll_ub : p.cqe_poll_roce), Kind::software, initiator_post);
  add("Verb library poll", ldst ? 0 : p.verb_poll, Kind::software, initiator_post);
  if (x.ack_mode == AckMode::transaction_taack && x.emits_ta_ack)
    add("Transaction ack", p.separate_ack_ns, Kind::nic, wire_back);
  if (x.spill_ns > 0) add("Context refetch", x.spill_ns, ub ? Kind::onchip : Kind::pcie, target);

  double modeled = 0;
  for (const auto& c : d.components) modeled += c.ns;
  d.sched_ns = p.sched_ns(s);
  const double extra = payload_extra_ns(modeled + d.sched_ns, x.payload, p);
  if (x.payload > 64 || extra > 0) add("Payload streaming", extra, Kind::nic, wire_fwd);
  modeled += extra;
  d.modeled_ns = modeled;
  d.measured_ns = modeled + d.sched_ns;
  return d;
}

double verb_direction_delta(Stack s, const CostParams& p) {
  if (s == Stack::ub_ldst)
    return measured_ns(s, Opcode::LOAD, p) - measured_ns(s, Opcode::STORE, p);
  return measured_ns(s, Opcode::READ, p) - measured_ns(s, Opcode::WRITE, p);
}

double sample_jitter(Rng& rng, const JitterModel& m, const Component& c) {
  if (m.factor <= 0 || !jittered(c.kind) || c.ns <= 0) return 0.0;
  return rng.exponential(m.factor * c.ns);
}

double jittered_latency(Rng& rng, const JitterModel& m, const Decomposition& d) {
  double t = d.measured_ns;
  for (const auto& c : d.components) t += sample_jitter(rng, m, c);
  return t;
}

double coherent_fabric_overlay(double loss_rate, double t_base_ns, double t_reset_ns) {
  if (loss_rate < 0 || loss_rate > 1) throw std::invalid_argument("loss rate outside [0,1]");
  return 1e9 / (t_base_ns + loss_rate * t_reset_ns);
}

}  // namespace ubsim::cost
