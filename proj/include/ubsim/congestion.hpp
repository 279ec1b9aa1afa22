#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace ubsim::congestion {

struct CaqmParams {
  double mark_threshold = 0.97;
  double beta = 0.1;
  double additive_increase = 4;  // packets per window round
  double window_cap = 32;        // packets
  void validate() const;
};

struct DcqcnParams {
  double red_threshold = 0.5;
  double p_max = 0.1;
  double decrease_factor = 0.5;  // rate multiplier per CNP
  double increase_step = 0.005;  // fraction of line rate per recovery period
  std::uint32_t recovery_slots = 50;
  void validate() const;
};

enum class Family : std::uint8_t { caqm, dcqcn };
std::string_view name(Family f);

struct SwitchQueue {
  std::uint32_t capacity = 44;  // packets
  std::uint32_t occupancy = 0;
  double fill() const { return static_cast<double>(occupancy) / capacity; }
};

// RED ramp: 0 at or below the knee, p_max when full.
double red_probability(double fill, const DcqcnParams& p);

// Deterministic marker: accumulates the marking probability and marks each
// time the sum crosses 1, so a given occupancy trace always yields the same
// marks. For caqm the test is a plain threshold.
struct Marker {
  double acc = 0;
  bool mark(double fill_with_arrival, Family f, const CaqmParams& c, const DcqcnParams& d);
};

struct Echo {
  bool mark = false;
  bool increase_req = true;
  std::uint8_t hint = 255;
};

// Hint encodes the available fraction of the queue in 8 bits.
std::uint8_t encode_hint(double fill);

// One echo's update. echoes_per_round spreads a window round's additive
// increase over that many echoes (1 = whole-round update).
double caqm_update(double window, const Echo& e, const CaqmParams& p, double echoes_per_round = 1);
double dcqcn_update(double rate, bool cnp, const DcqcnParams& p);

struct IncastConfig {
  std::uint32_t flows = 2;
  std::uint32_t queue_capacity = 44;
  std::uint32_t feedback_delay_slots = 10;  // one way
  std::uint64_t slots = 200000;
  double warmup_fraction = 0.2;
};

struct UtilisationResult {
  double utilisation = 0;
  std::uint64_t marks = 0;
  std::uint64_t delivered = 0;
  std::vector<double> window_trace;  // flow 0, sampled every 100 slots
};

// Slot model: one packet per slot leaves the bottleneck.
UtilisationResult caqm_incast(const CaqmParams& p, const IncastConfig& cfg);
UtilisationResult dcqcn_incast(const DcqcnParams& p, const IncastConfig& cfg);

IncastConfig default_caqm_incast();
IncastConfig default_dcqcn_incast();

struct ElementTestConfig {
  std::uint32_t wrs = 200;
  std::uint32_t wr_bytes = 64;
  std::uint32_t packet_bytes = 512;
  std::uint32_t watermark_packets = 16;
  double window_start = 65536;
  double window_floor = 4096;
  double window_max = 65536;
  double additive_bytes = 512;
};

struct ElementTestResult {
  std::uint32_t packets = 0;
  std::uint32_t marked = 0;
  double window_start = 0;
  double window_final = 0;
  std::vector<double> window_trace;
};

ElementTestResult element_test(const ElementTestConfig& cfg = {});

}  // namespace ubsim::congestion
