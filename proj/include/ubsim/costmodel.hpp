#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ubsim/rng.hpp"
#include "ubsim/state.hpp"
#include "ubsim/wire.hpp"

namespace ubsim::cost {

using state::Stack;
using wire::Opcode;

struct CostParams {
  double verb_post = 50;
  double wqe_construct = 30;
  double doorbell_mmio = 150;
  double dma_wqe_fetch = 500;
  double pcie_dma_read = 500;
  double pcie_dma_write = 250;
  double dma_cqe_write = 250;
  double cqe_poll_roce = 70;
  double cqe_poll_ub = 5;
  double verb_poll = 30;
  double membus = 30;
  double wire_delay = 100;
  double wire_bandwidth = 400;
  double dram_row_hit = 30;
  double nic_cycles_ub_ldst = 8;
  double nic_cycles_ub_urma = 25;
  double nic_cycles_roce = 9;
  double cycle_ns = 3.106;
  double sched_ub_ldst = 80;
  double sched_ub_urma = 12;
  double sched_roce = 14;
  double sched_enabled = 1;

  // A WRITE or atomic returns a bare ack instead of a data response;
  // the target's response TX pass is shorter by this much.
  double ack_tx_saving_ub = 7;
  double ack_tx_saving_roce = 9;
  // Target-side receive-queue match for two-sided SEND.
  double recv_match = 54;
  // Per extra 32 B flit once the payload no longer fits one response
  // packet, and the per-flit floor a fully serialised transfer hits.
  double payload_flit_stream_ns = 7.25;
  double payload_flit_floor_ns = 14.15;
  double separate_ack_ns = 25;
  double order_gate_ns = 20;
  double roce_psn_serial_ns = 50;
  double psn_alloc_ns = 5;
  double spill_roce = 1000;
  double spill_ub = 200;
  double nic_rate_ub = 150.36;  // WR per microsecond
  double nic_rate_roce = 53.62;

  double nic_ns(Stack s) const;
  double sched_ns(Stack s) const;
  double nic_service_ns(Stack s) const;  // 1 / sustained cap
};

// Name/pointer table over every CostParams field, in declaration order.
struct ParamField {
  std::string_view name;
  double CostParams::*ptr;
};
const std::vector<ParamField>& cost_param_fields();
// Throws std::invalid_argument for unknown names or negative values.
void set_cost_param(CostParams& p, std::string_view key, double value);
double get_cost_param(const CostParams& p, std::string_view key);
void validate(const CostParams& p);
// JSON object of field -> number. Unknown keys are an error.
CostParams load_cost_params(const std::string& path, CostParams base = {});
std::string dump_cost_params(const CostParams& p);

enum class Kind : std::uint8_t { software, onchip, pcie, wire, nic };
std::string_view name(Kind k);
inline bool jittered(Kind k) { return k == Kind::pcie || k == Kind::wire; }

enum class Side : std::uint8_t { initiator_pre, wire_fwd, target, wire_back, initiator_post };

struct Component {
  std::string name;
  double ns;
  Kind kind;
  Side side;
};

enum class AckMode : std::uint8_t { per_packet, transaction_taack, fused };
std::string_view name(AckMode m);

struct Extras {
  std::uint32_t payload = 64;
  AckMode ack_mode = AckMode::per_packet;
  bool emits_ta_ack = true;  // false under UNO
  double spill_ns = 0;
};

struct Decomposition {
  Stack stack;
  Opcode verb;  // as executed (READ on ub_ldst becomes LOAD)
  std::vector<Component> components;
  double modeled_ns = 0;
  double sched_ns = 0;
  double measured_ns = 0;
};

class InadmissibleVerb : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Maps the requested verb to what the stack executes. ub_ldst runs READ as
// LOAD and routes WR-only verbs over its URMA path.
Opcode executed_verb(Stack s, Opcode v);
Stack executing_stack(Stack s, Opcode v);

Decomposition roundtrip_decompose(Stack s, Opcode verb, const CostParams& p,
                                  const Extras& x = {});
inline double measured_ns(Stack s, Opcode verb, const CostParams& p, const Extras& x = {}) {
  return roundtrip_decompose(s, verb, p, x).measured_ns;
}

double verb_direction_delta(Stack s, const CostParams& p);

// Payload term added on top of the 64 B round trip.
double payload_extra_ns(double base_ns, std::uint32_t payload, const CostParams& p);

struct JitterModel {
  double factor = 0.0;
};
double sample_jitter(Rng& rng, const JitterModel& m, const Component& c);
double jittered_latency(Rng& rng, const JitterModel& m, const Decomposition& d);

double coherent_fabric_overlay(double loss_rate, double t_base_ns, double t_reset_ns = 1e6);

}  // namespace ubsim::cost
