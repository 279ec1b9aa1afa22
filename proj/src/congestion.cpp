#include "ubsim/congestion.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace ubsim::congestion {

void CaqmParams::validate() const {
  if (!(beta > 0 && beta < 1)) throw std::invalid_argument("caqm beta must be in (0,1)");
  if (!(mark_threshold > 0 && mark_threshold <= 1))
    throw std::invalid_argument("caqm mark threshold must be in (0,1]");
  if (window_cap < 1) throw std::invalid_argument("caqm window cap must be >= 1");
}

void DcqcnParams::validate() const {
  if (!(p_max >= 0 && p_max <= 1)) throw std::invalid_argument("dcqcn p_max must be in [0,1]");
  if (!(red_threshold >= 0 && red_threshold < 1))
    throw std::invalid_argument("dcqcn red threshold must be in [0,1)");
  if (!(decrease_factor > 0 && decrease_factor < 1))
    throw std::invalid_argument("dcqcn decrease factor must be in (0,1)");
  if (recovery_slots == 0) throw std::invalid_argument("dcqcn recovery period must be positive");
}

std::string_view name(Family f) { return f == Family::caqm ? "caqm" : "dcqcn"; }

double red_probability(double fill, const DcqcnParams& p) {
  if (fill <= p.red_threshold) return 0.0;
  return p.p_max * std::min(1.0, (fill - p.red_threshold) / (1.0 - p.red_threshold));
}

bool Marker::mark(double fill, Family f, const CaqmParams& c, const DcqcnParams& d) {
  if (f == Family::caqm) return fill > c.mark_threshold;
  acc += red_probability(fill, d);
  if (acc >= 1.0) {
    acc -= 1.0;
    return true;
  }
  return false;
}

std::uint8_t encode_hint(double fill) {
  const double avail = std::clamp(1.0 - fill, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(255.0 * avail));
}

double caqm_update(double w, const Echo& e, const CaqmParams& p, double echoes_per_round) {
  if (e.mark) return std::max(1.0, std::floor(w * (1.0 - p.beta)));
  if (!e.increase_req) return w;
  const double inc = p.additive_increase * (e.hint / 255.0) / std::max(1.0, echoes_per_round);
  return std::min(p.window_cap, w + inc);
}

double dcqcn_update(double rate, bool cnp, const DcqcnParams& p) {
  if (cnp) return rate * p.decrease_factor;
  return std::min(1.0, rate + p.increase_step);
}

IncastConfig default_caqm_incast() { return {}; }

IncastConfig default_dcqcn_incast() {
  IncastConfig c;
  c.feedback_delay_slots = 44;
  return c;
}

namespace {

struct Pkt {
  std::uint32_t flow;
  bool mark;
  std::uint8_t hint;
};

struct Ret {
  std::uint64_t at;
  std::uint32_t flow;
  bool mark;
  std::uint8_t hint;
};

}  // namespace

UtilisationResult caqm_incast(const CaqmParams& p, const IncastConfig& cfg) {
  p.validate();
  UtilisationResult r;
  std::vector<double> w(cfg.flows, p.window_cap);
  std::vector<std::uint32_t> inflight(cfg.flows, 0);
  std::deque<Pkt> q;
  std::deque<Ret> acks;
  Marker marker;
  const CaqmParams& c = p;
  const DcqcnParams unused{};
  const auto start = static_cast<std::uint64_t>(cfg.slots * cfg.warmup_fraction);
  for (std::uint64_t t = 0; t < cfg.slots; ++t) {
    while (!acks.empty() && acks.front().at <= t) {
      auto a = acks.front();
      acks.pop_front();
      --inflight[a.flow];
      Echo e{a.mark, true, a.hint};
      w[a.flow] = caqm_update(w[a.flow], e, c, w[a.flow]);
    }
    for (std::uint32_t f = 0; f < cfg.flows; ++f) {
      while (inflight[f] < std::floor(w[f]) && q.size() < cfg.queue_capacity) {
        const double fill = static_cast<double>(q.size() + 1) / cfg.queue_capacity;
        const bool m = marker.mark(fill, Family::caqm, c, unused);
        if (m && t >= start) ++r.marks;
        q.push_back({f, m, encode_hint(fill)});
        ++inflight[f];
      }
    }
    if (!q.empty()) {
      auto pk = q.front();
      q.pop_front();
      if (t >= start) ++r.delivered;
      acks.push_back({t + 2 * cfg.feedback_delay_slots, pk.flow, pk.mark, pk.hint});
    }
    if (t % 100 == 0) r.window_trace.push_back(w[0]);
  }
  r.utilisation = static_cast<double>(r.delivered) / static_cast<double>(cfg.slots - start);
  return r;
}

UtilisationResult dcqcn_incast(const DcqcnParams& p, const IncastConfig& cfg) {
  p.validate();
  UtilisationResult r;
  const CaqmParams unused{};
  std::vector<double> rate(cfg.flows, 1.0), credit(cfg.flows, 0.0);
  std::vector<std::uint64_t> timer(cfg.flows, 0);
  std::vector<std::int64_t> last_cnp(cfg.flows, -1);
  std::vector<Marker> marker(cfg.flows);
  std::deque<std::pair<std::uint64_t, std::uint32_t>> cnps;
  std::uint32_t q = 0;
  const auto start = static_cast<std::uint64_t>(cfg.slots * cfg.warmup_fraction);
  for (std::uint64_t t = 0; t < cfg.slots; ++t) {
    while (!cnps.empty() && cnps.front().first <= t) {
      auto f = cnps.front().second;
      cnps.pop_front();
      rate[f] = dcqcn_update(rate[f], true, p);
      timer[f] = 0;
    }
    for (std::uint32_t f = 0; f < cfg.flows; ++f) {
      if (++timer[f] >= p.recovery_slots) {
        timer[f] = 0;
        rate[f] = dcqcn_update(rate[f], false, p);
      }
      credit[f] += rate[f];
      while (credit[f] >= 1.0) {
        const double fill = static_cast<double>(q + 1) / cfg.queue_capacity;
        if (fill > 1.0) {
          credit[f] = std::min(credit[f], 1.0);  // paused by backpressure
          break;
        }
        credit[f] -= 1.0;
        if (marker[f].mark(fill, Family::dcqcn, unused, p)) {
          if (t >= start) ++r.marks;
          // At most one CNP per flow per slot.
          if (last_cnp[f] != static_cast<std::int64_t>(t)) {
            last_cnp[f] = static_cast<std::int64_t>(t);
            cnps.emplace_back(t + 2 * cfg.feedback_delay_slots, f);
          }
        }
        ++q;
      }
    }
    if (q > 0) {
      --q;
      if (t >= start) ++r.delivered;
    }
    if (t % 100 == 0) r.window_trace.push_back(rate[0]);
  }
  r.utilisation = static_cast<double>(r.delivered) / static_cast<double>(cfg.slots - start);
  return r;
}

ElementTestResult element_test(const ElementTestConfig& cfg) {
  ElementTestResult r;
  const std::uint32_t per_packet = cfg.packet_bytes / cfg.wr_bytes;
  r.packets = (cfg.wrs + per_packet - 1) / per_packet;
  r.window_start = cfg.window_start;
  // The whole burst lands in the queue before the first departure.
  std::vector<bool> marks;
  for (std::uint32_t occ = 1; occ <= r.packets; ++occ) marks.push_back(occ > cfg.watermark_packets);
  double w = cfg.window_start;
  r.window_trace.push_back(w);
  for (bool m : marks) {
    if (m) {
      ++r.marked;
      w = std::max(cfg.window_floor, w / 2);
    } else {
      w = std::min(cfg.window_max, w + cfg.additive_bytes);
    }
    r.window_trace.push_back(w);
  }
  r.window_final = w;
  return r;
}

}  // namespace ubsim::congestion
