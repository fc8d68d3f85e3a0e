// Domain types for fiber links and WDM channel plans, with validation.
//
// Units follow the wire format throughout this header: lengths in km,
// attenuation in dB/km, frequencies in THz, symbol rates in GBd, slot
// widths in GHz, powers in dBm. All types are immutable value types once
// built; nothing here touches global state.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace qot {

// ITU C-band extent used for all plans.
inline constexpr double c_band_min_thz = 191.3;
inline constexpr double c_band_max_thz = 196.1;
inline constexpr double c_band_width_ghz = 4800.0;
inline constexpr double c_band_center_thz = 193.7;
// Anchor granularity that lets 50 GHz and 75 GHz slots coexist on one grid.
inline constexpr double grid_granularity_ghz = 6.25;
inline constexpr int grid_slice_count = 768;  // 4800 / 6.25

enum class Payload { Qpsk100G, Qpsk200G, Qam16_200G };

inline constexpr Payload all_payloads[] = {Payload::Qpsk100G, Payload::Qpsk200G,
                                           Payload::Qam16_200G};

inline double payload_symbol_rate_gbd(Payload p) {
  switch (p) {
    case Payload::Qpsk200G: return 69.0;
    default: return 35.0;  // QPSK_100G, QAM16_200G
  }
}

inline double payload_slot_width_ghz(Payload p) {
  return payload_symbol_rate_gbd(p) == 69.0 ? 75.0 : 50.0;
}

inline const char* payload_name(Payload p) {
  switch (p) {
    case Payload::Qpsk100G: return "QPSK_100G";
    case Payload::Qpsk200G: return "QPSK_200G";
    default: return "QAM16_200G";
  }
}

inline bool parse_payload(const std::string& name, Payload& out) {
  for (Payload p : all_payloads) {
    if (name == payload_name(p)) {
      out = p;
      return true;
    }
  }
  return false;
}

struct Span {
  double length = 80.0;      // km
  double alpha = 0.2;        // dB/km
  double gamma = 1.3;        // 1/(W*km)
  double dispersion = 16.7;  // ps/(nm*km)
};

struct Link {
  std::vector<Span> spans;

  double total_length() const {
    return std::accumulate(spans.begin(), spans.end(), 0.0,
                           [](double acc, const Span& s) { return acc + s.length; });
  }
};

struct Channel {
  double center_frequency = c_band_center_thz;  // THz
  double symbol_rate = 35.0;                    // GBd
  double slot_width = 50.0;                     // GHz
  double launch_power = 0.0;                    // dBm
  Payload payload = Payload::Qpsk100G;
  bool is_cut = false;
};

inline Channel make_channel(Payload p, double center_thz, double power_dbm, bool is_cut = false) {
  Channel c;
  c.payload = p;
  c.center_frequency = center_thz;
  c.symbol_rate = payload_symbol_rate_gbd(p);
  c.slot_width = payload_slot_width_ghz(p);
  c.launch_power = power_dbm;
  c.is_cut = is_cut;
  return c;
}

struct ChannelPlan {
  std::vector<Channel> channels;  // sorted by center_frequency
  std::size_t cut_index = 0;

  const Channel& cut() const { return channels[cut_index]; }
};

/// True when channels are frequency-sorted and cut_index points at the CUT.
inline bool is_canonical(const ChannelPlan& plan) {
  if (plan.cut_index >= plan.channels.size() || !plan.channels[plan.cut_index].is_cut)
    return false;
  for (std::size_t i = 0; i + 1 < plan.channels.size(); ++i)
    if (plan.channels[i].center_frequency > plan.channels[i + 1].center_frequency) return false;
  return true;
}

/// Sorts channels by center frequency and re-points cut_index. Idempotent.
inline ChannelPlan canonical(ChannelPlan plan) {
  std::stable_sort(plan.channels.begin(), plan.channels.end(),
                   [](const Channel& a, const Channel& b) {
                     return a.center_frequency < b.center_frequency;
                   });
  for (std::size_t i = 0; i < plan.channels.size(); ++i) {
    if (plan.channels[i].is_cut) {
      plan.cut_index = i;
      break;
    }
  }
  return plan;
}

struct Scenario {
  Link link;
  ChannelPlan plan;
  std::uint64_t seed = 0;
};

struct LabeledRecord {
  Scenario scenario;
  double eta = 0.0;     // 1/W^2
  double sigma2 = 0.0;  // W
  double snr_db = 0.0;
};

// --- validation ------------------------------------------------------------

struct Violation {
  std::size_t channel_index;  // channels.size() marks a plan-level violation
  std::string rule;
  std::string detail;
};

/// Hard invariant check. Empty result iff the plan is structurally valid.
/// Soft range checks (launch power bounds of the generated-data space) are
/// deliberate non-errors; see plan_warnings().
inline std::vector<Violation> validate_plan(const ChannelPlan& plan) {
  std::vector<Violation> out;
  const std::size_t n = plan.channels.size();
  if (n == 0) {
    out.push_back({n, "empty_plan", "plan has no channels"});
    return out;
  }

  std::size_t cut_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Channel& c = plan.channels[i];
    if (c.is_cut) ++cut_count;
    const double expect_rate = payload_symbol_rate_gbd(c.payload);
    if (c.symbol_rate != expect_rate)
      out.push_back({i, "payload_rate",
                     std::string(payload_name(c.payload)) + " requires " +
                         std::to_string(expect_rate) + " GBd"});
    const double expect_slot = c.symbol_rate == 69.0 ? 75.0 : 50.0;
    if (c.slot_width != expect_slot)
      out.push_back({i, "slot_width", "slot width does not match symbol rate"});
    if (c.center_frequency < c_band_min_thz || c.center_frequency > c_band_max_thz)
      out.push_back({i, "band_range", "center frequency outside the C-band"});
  }
  if (cut_count != 1)
    out.push_back({n, "cut_count",
                   "plan flags " + std::to_string(cut_count) + " channels as CUT, expected 1"});
  else if (plan.cut_index >= n || !plan.channels[plan.cut_index].is_cut)
    out.push_back({plan.cut_index < n ? plan.cut_index : n, "cut_index",
                   "cut_index does not point at the CUT channel"});

  // Overlap on the sorted order; touching slots are legal.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return plan.channels[a].center_frequency < plan.channels[b].center_frequency;
  });
  constexpr double overlap_eps_thz = 1e-9;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Channel& lo = plan.channels[order[k]];
    const Channel& hi = plan.channels[order[k + 1]];
    const double lo_edge = lo.center_frequency + lo.slot_width * 0.5e-3;
    const double hi_edge = hi.center_frequency - hi.slot_width * 0.5e-3;
    if (lo_edge - hi_edge > overlap_eps_thz)
      out.push_back({order[k + 1], "slot_overlap",
                     "slot overlaps previous channel by " +
                         std::to_string((lo_edge - hi_edge) * 1e3) + " GHz"});
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (plan.channels[i].center_frequency > plan.channels[i + 1].center_frequency) {
      out.push_back({i + 1, "sort_order", "channels not sorted by center frequency"});
      break;
    }
  }
  return out;
}

/// Range advisories for user-supplied data; never failures.
inline std::vector<Violation> plan_warnings(const ChannelPlan& plan) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < plan.channels.size(); ++i) {
    const double p = plan.channels[i].launch_power;
    if (p < -6.0 || p > 2.5)
      out.push_back({i, "launch_power_range",
                     "launch power outside the generated-data range [-6, 2.5] dBm"});
  }
  return out;
}

inline std::vector<Violation> link_warnings(const Link& link) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < link.spans.size(); ++i) {
    const Span& s = link.spans[i];
    if (s.length < 10.0 || s.length > 120.0)
      out.push_back({i, "span_length_range", "span length outside [10, 120] km"});
    if (s.alpha < 0.19 || s.alpha > 0.275)
      out.push_back({i, "alpha_range", "attenuation outside [0.19, 0.275] dB/km"});
  }
  return out;
}

// --- neighbours ------------------------------------------------------------

struct Neighbors {
  // Indices into the canonical plan, nearest-first per side. Either list may
  // be shorter than k when the band runs out of channels.
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
};

/// Up to k nearest channels per side of the CUT, by |f - f_cut|. Equidistant
/// cross-side pairs resolve naturally: the lower-frequency one is in `left`.
inline Neighbors neighbor_channels(const ChannelPlan& plan_in, std::size_t k) {
  ChannelPlan sorted_storage;
  const ChannelPlan* plan = &plan_in;
  if (!is_canonical(plan_in)) {
    sorted_storage = canonical(plan_in);
    plan = &sorted_storage;
  }
  Neighbors out;
  // Canonical order is frequency-sorted, so walking outward from the CUT
  // enumerates each side nearest-first. Indices refer to canonical(plan).
  for (std::size_t step = 1; step <= plan->cut_index && out.left.size() < k; ++step)
    out.left.push_back(plan->cut_index - step);
  for (std::size_t i = plan->cut_index + 1; i < plan->channels.size() && out.right.size() < k; ++i)
    out.right.push_back(i);
  return out;
}

}  // namespace qot
