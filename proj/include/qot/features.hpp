// Fixed-length feature mapping from a scenario to the network input, plus
// the z-score normalization statistics fitted on the training split.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qot/linkmodel.hpp"

namespace qot {

// Layout: 12 link/CUT/grid aggregates, then (symbol_rate, power_dbm,
// signed_distance_ghz) for the neighbor slots [2nd-left, 1st-left,
// 1st-right, 2nd-right], then channel counts in the 10 consecutive 150 GHz
// windows covering [f_cut - 750 GHz, f_cut + 750 GHz).
inline constexpr std::size_t feature_count = 34;
inline constexpr std::size_t neighbor_block_offset = 12;
inline constexpr std::size_t window_block_offset = 24;
inline constexpr double absent_neighbor_power_dbm = -60.0;
inline constexpr double absent_neighbor_distance_ghz = 500.0;

using FeatureVector = std::array<double, feature_count>;

inline const std::array<const char*, feature_count>& feature_names() {
  static const std::array<const char*, feature_count> names = {
      "n_spans",           "span_len_mean",  "span_len_min",   "span_len_max",
      "span_len_var",      "span_cumsum_mean", "alpha_mean",   "cut_power_dbm",
      "cut_symbol_rate",   "cut_center_offset_ghz", "total_channel_count", "occupancy_fraction",
      "nb_l2_symbol_rate", "nb_l2_power_dbm", "nb_l2_distance_ghz",
      "nb_l1_symbol_rate", "nb_l1_power_dbm", "nb_l1_distance_ghz",
      "nb_r1_symbol_rate", "nb_r1_power_dbm", "nb_r1_distance_ghz",
      "nb_r2_symbol_rate", "nb_r2_power_dbm", "nb_r2_distance_ghz",
      "win_0", "win_1", "win_2", "win_3", "win_4",
      "win_5", "win_6", "win_7", "win_8", "win_9"};
  return names;
}

/// Raw (unnormalized) features. Invariant under permutation of the channel
/// sequence: the plan is canonicalized first.
inline FeatureVector extract(const Scenario& scenario) {
  FeatureVector f{};
  const std::vector<Span>& spans = scenario.link.spans;
  const std::size_t n = spans.size();
  if (n == 0) throw std::invalid_argument("extract: link has no spans");

  double sum = 0.0, min_len = spans[0].length, max_len = spans[0].length;
  double cumsum_total = 0.0, running = 0.0, alpha_sum = 0.0;
  for (const Span& s : spans) {
    sum += s.length;
    min_len = std::min(min_len, s.length);
    max_len = std::max(max_len, s.length);
    running += s.length;
    cumsum_total += running;
    alpha_sum += s.alpha;
  }
  const double mean = sum / n;
  double var = 0.0;
  for (const Span& s : spans) var += (s.length - mean) * (s.length - mean);
  var /= n;

  f[0] = static_cast<double>(n);
  f[1] = mean;
  f[2] = min_len;
  f[3] = max_len;
  f[4] = var;
  f[5] = cumsum_total / n;
  f[6] = alpha_sum / n;

  ChannelPlan sorted_storage;
  const ChannelPlan* planp = &scenario.plan;
  if (!is_canonical(scenario.plan)) {
    sorted_storage = canonical(scenario.plan);
    planp = &sorted_storage;
  }
  const ChannelPlan& plan = *planp;
  const Channel& cut = plan.cut();
  f[7] = cut.launch_power;
  f[8] = cut.symbol_rate;
  f[9] = (cut.center_frequency - c_band_center_thz) * 1e3;
  f[10] = static_cast<double>(plan.channels.size());
  double slot_sum_ghz = 0.0;
  for (const Channel& c : plan.channels) slot_sum_ghz += c.slot_width;
  f[11] = slot_sum_ghz / c_band_width_ghz;

  const Neighbors nb = neighbor_channels(plan, 2);
  const auto fill_slot = [&](std::size_t slot, const std::vector<std::size_t>& side,
                             std::size_t rank, double sentinel_distance) {
    const std::size_t base = neighbor_block_offset + 3 * slot;
    if (rank < side.size()) {
      const Channel& c = plan.channels[side[rank]];
      f[base] = c.symbol_rate;
      f[base + 1] = c.launch_power;
      f[base + 2] = (c.center_frequency - cut.center_frequency) * 1e3;
    } else {
      f[base] = 0.0;
      f[base + 1] = absent_neighbor_power_dbm;
      f[base + 2] = sentinel_distance;
    }
  };
  fill_slot(0, nb.left, 1, -absent_neighbor_distance_ghz);
  fill_slot(1, nb.left, 0, -absent_neighbor_distance_ghz);
  fill_slot(2, nb.right, 0, absent_neighbor_distance_ghz);
  fill_slot(3, nb.right, 1, absent_neighbor_distance_ghz);

  for (const Channel& c : plan.channels) {
    const double offset_ghz = (c.center_frequency - cut.center_frequency) * 1e3;
    const int w = static_cast<int>(std::floor(offset_ghz / 150.0)) + 5;
    if (w >= 0 && w < 10) f[window_block_offset + w] += 1.0;
  }
  return f;
}

// --- normalization ----------------------------------------------------------

/// Per-feature z-score statistics from the training split, plus the target
/// transform y = log10(eta) z-scored with the same convention. Standard
/// deviations are floored at 1e-12 so constant columns pass through as 0.
struct NormStats {
  std::array<double, feature_count> mean{};
  std::array<double, feature_count> stddev{};
  double target_mean = 0.0;
  double target_stddev = 1.0;
};

inline constexpr double stddev_floor = 1e-12;

inline NormStats fit_normalizer(const std::vector<FeatureVector>& features,
                                const std::vector<double>& etas) {
  if (features.size() < 2 || features.size() != etas.size())
    throw std::invalid_argument("fit_normalizer: need >= 2 training records");
  NormStats stats;
  const double n = static_cast<double>(features.size());
  for (const FeatureVector& f : features)
    for (std::size_t k = 0; k < feature_count; ++k) stats.mean[k] += f[k];
  for (std::size_t k = 0; k < feature_count; ++k) stats.mean[k] /= n;
  for (const FeatureVector& f : features)
    for (std::size_t k = 0; k < feature_count; ++k) {
      const double d = f[k] - stats.mean[k];
      stats.stddev[k] += d * d;
    }
  for (std::size_t k = 0; k < feature_count; ++k)
    stats.stddev[k] = std::max(std::sqrt(stats.stddev[k] / n), stddev_floor);

  double ymean = 0.0;
  for (double eta : etas) ymean += std::log10(eta);
  ymean /= n;
  double yvar = 0.0;
  for (double eta : etas) {
    const double d = std::log10(eta) - ymean;
    yvar += d * d;
  }
  stats.target_mean = ymean;
  stats.target_stddev = std::max(std::sqrt(yvar / n), stddev_floor);
  return stats;
}

inline FeatureVector normalize(const FeatureVector& v, const NormStats& stats) {
  FeatureVector out;
  for (std::size_t k = 0; k < feature_count; ++k) out[k] = (v[k] - stats.mean[k]) / stats.stddev[k];
  return out;
}

inline double normalize_target(double eta, const NormStats& stats) {
  return (std::log10(eta) - stats.target_mean) / stats.target_stddev;
}

/// Inverse of normalize_target: returns eta in 1/W^2 (always positive).
inline double denormalize_target(double y, const NormStats& stats) {
  return std::pow(10.0, y * stats.target_stddev + stats.target_mean);
}

}  // namespace qot
