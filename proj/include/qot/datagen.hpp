// Reproducible sampling of the generation parameter space into labeled
// records. Every record is a pure function of (base_seed, index): each index
// gets its own decorrelated RNG stream, so output is byte-identical no
// matter how record generation is scheduled across threads.
#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <future>
#include <stdexcept>
#include <string>
#include <vector>

#include "qot/jsonio.hpp"
#include "qot/linkmodel.hpp"
#include "qot/physics.hpp"
#include "qot/rng.hpp"

namespace qot {

struct GenConfig {
  std::size_t n_records = 1000;
  std::uint64_t base_seed = 1;
  std::array<double, 2> occupancy_range{0.75, 0.95};
  std::vector<int> span_count_values;        // default {1, 3, ..., 59}
  std::array<int, 2> span_length_range{10, 120};  // integer km
  std::array<double, 2> alpha_range{0.19, 0.275};
  std::vector<double> power_values;          // default {-6.0, -5.5, ..., 2.5}
  std::vector<Payload> payload_mix{Payload::Qpsk100G, Payload::Qpsk200G, Payload::Qam16_200G};
  double nf_db = default_nf_db;

  GenConfig() {
    for (int n = 1; n <= 59; n += 2) span_count_values.push_back(n);
    for (int i = 0; i <= 17; ++i) power_values.push_back(-6.0 + 0.5 * i);
  }
};

inline GenConfig gen_config_from_json(const Json& j) {
  GenConfig cfg;
  if (j.contains("n_records")) cfg.n_records = j.at("n_records").get<std::size_t>();
  if (j.contains("base_seed")) cfg.base_seed = j.at("base_seed").get<std::uint64_t>();
  if (j.contains("occupancy_range")) {
    cfg.occupancy_range[0] = j.at("occupancy_range").at(0).get<double>();
    cfg.occupancy_range[1] = j.at("occupancy_range").at(1).get<double>();
  }
  if (j.contains("span_count_values"))
    cfg.span_count_values = j.at("span_count_values").get<std::vector<int>>();
  if (j.contains("span_length_range")) {
    cfg.span_length_range[0] = j.at("span_length_range").at(0).get<int>();
    cfg.span_length_range[1] = j.at("span_length_range").at(1).get<int>();
  }
  if (j.contains("alpha_range")) {
    cfg.alpha_range[0] = j.at("alpha_range").at(0).get<double>();
    cfg.alpha_range[1] = j.at("alpha_range").at(1).get<double>();
  }
  if (j.contains("power_values")) cfg.power_values = j.at("power_values").get<std::vector<double>>();
  if (j.contains("payload_mix")) {
    cfg.payload_mix.clear();
    for (const Json& jp : j.at("payload_mix")) {
      Payload p;
      if (!parse_payload(jp.get<std::string>(), p))
        throw std::runtime_error("payload_mix: unknown payload " + jp.get<std::string>());
      cfg.payload_mix.push_back(p);
    }
  }
  if (j.contains("nf_db")) cfg.nf_db = j.at("nf_db").get<double>();
  if (cfg.n_records < 1 || cfg.span_count_values.empty() || cfg.power_values.empty() ||
      cfg.payload_mix.empty())
    throw std::runtime_error("gen config: empty parameter set");
  return cfg;
}

inline GenConfig load_gen_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gen config: " + path);
  Json j;
  in >> j;
  return gen_config_from_json(j);
}

namespace detail {

inline int payload_slices(Payload p) {
  return static_cast<int>(payload_slot_width_ghz(p) / grid_granularity_ghz);
}

}  // namespace detail

/// Deterministic scenario draw for one index. Fixed draw order: span count,
/// per-span (length, alpha), occupancy target, payload classes, grid gaps,
/// per-channel launch powers, CUT choice.
///
/// Channels are appended until occupancy first reaches the drawn target; a
/// class whose slot would push occupancy past the top of the occupancy range
/// is redrawn among classes that still fit (or generation stops), which
/// keeps achieved occupancy inside [range lo, range hi] by construction.
/// Free spectrum is distributed as a uniformly random composition of gaps on
/// the 6.25 GHz grid.
inline Scenario generate_scenario(const GenConfig& cfg, std::size_t index) {
  if (index >= cfg.n_records) throw std::invalid_argument("generate_scenario: index out of range");
  RngEngine eng = make_engine(cfg.base_seed, index);
  Scenario scenario;
  scenario.seed = stream_seed(cfg.base_seed, index);

  const int span_count = pick(eng, cfg.span_count_values);
  scenario.link.spans.reserve(span_count);
  for (int s = 0; s < span_count; ++s) {
    Span span;
    span.length = static_cast<double>(
        uniform_int(eng, cfg.span_length_range[0], cfg.span_length_range[1]));
    span.alpha = uniform_real(eng, cfg.alpha_range[0], cfg.alpha_range[1]);
    scenario.link.spans.push_back(span);
  }

  const double target = uniform_real(eng, cfg.occupancy_range[0], cfg.occupancy_range[1]);
  const int max_slices =
      static_cast<int>(std::floor(cfg.occupancy_range[1] * grid_slice_count + 1e-9));

  std::vector<Payload> drawn;
  int used_slices = 0;
  while (static_cast<double>(used_slices) / grid_slice_count < target) {
    Payload p = pick(eng, cfg.payload_mix);
    if (used_slices + detail::payload_slices(p) > max_slices) {
      std::vector<Payload> fitting;
      for (Payload q : cfg.payload_mix)
        if (used_slices + detail::payload_slices(q) <= max_slices) fitting.push_back(q);
      if (fitting.empty()) break;
      p = pick(eng, fitting);
    }
    drawn.push_back(p);
    used_slices += detail::payload_slices(p);
  }
  if (drawn.empty()) {  // degenerate occupancy range; keep the plan non-empty
    drawn.push_back(pick(eng, cfg.payload_mix));
    used_slices += detail::payload_slices(drawn.back());
  }

  // Uniform composition of the free slices into gaps: n dividers among
  // free + n positions, drawn distinct by rejection, then differenced.
  const std::size_t n = drawn.size();
  const int free_slices = grid_slice_count - used_slices;
  std::vector<std::uint32_t> dividers;
  dividers.reserve(n);
  {
    std::vector<bool> taken(free_slices + n + 1, false);
    while (dividers.size() < n) {
      const std::uint32_t d =
          static_cast<std::uint32_t>(1 + u64_below(eng, free_slices + n));
      if (!taken[d]) {
        taken[d] = true;
        dividers.push_back(d);
      }
    }
    std::sort(dividers.begin(), dividers.end());
  }

  scenario.plan.channels.reserve(n);
  int position = 0;
  std::uint32_t prev_divider = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int gap = static_cast<int>(dividers[i] - prev_divider - 1);
    prev_divider = dividers[i];
    position += gap;
    const int width = detail::payload_slices(drawn[i]);
    const double center_thz =
        c_band_min_thz + (position + 0.5 * width) * grid_granularity_ghz * 1e-3;
    scenario.plan.channels.push_back(make_channel(drawn[i], center_thz, 0.0));
    position += width;
  }
  for (Channel& c : scenario.plan.channels) c.launch_power = pick(eng, cfg.power_values);

  const std::size_t cut = n > 0 ? static_cast<std::size_t>(u64_below(eng, n)) : 0;
  scenario.plan.cut_index = cut;
  scenario.plan.channels[cut].is_cut = true;
  return scenario;
}

/// eta from the closed-form GN oracle, sigma2 from the ASE budget, SNR from
/// the combination formula with the plan's fixed penalties.
inline LabeledRecord label_scenario(const Scenario& scenario, double nf_db = default_nf_db) {
  LabeledRecord r;
  r.scenario = scenario;
  r.eta = eta_closed_form(scenario.link, scenario.plan);
  r.sigma2 = linear_noise(scenario.link, scenario.plan.cut(), nf_db);
  r.snr_db = combine_snr(scenario.plan.cut().launch_power, r.sigma2, r.eta,
                         penalties_for(scenario.plan));
  return r;
}

inline LabeledRecord generate_record(const GenConfig& cfg, std::size_t index) {
  return label_scenario(generate_scenario(cfg, index), cfg.nf_db);
}

inline std::vector<LabeledRecord> generate_records(const GenConfig& cfg) {
  std::vector<LabeledRecord> out;
  out.reserve(cfg.n_records);
  for (std::size_t i = 0; i < cfg.n_records; ++i) out.push_back(generate_record(cfg, i));
  return out;
}

/// Writes the dataset as JSONL in index order. Generation parallelises over
/// records; the writer serialises by index, so the bytes do not depend on
/// the thread count.
inline std::size_t generate_dataset(const GenConfig& cfg, const std::string& path,
                                    int threads = 1,
                                    const std::function<void(std::size_t)>& progress = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  const std::size_t chunk = 512;
  for (std::size_t start = 0; start < cfg.n_records; start += chunk) {
    const std::size_t count = std::min(chunk, cfg.n_records - start);
    std::vector<std::string> lines(count);
    if (threads > 1) {
      std::vector<std::future<void>> workers;
      const std::size_t stride = (count + threads - 1) / threads;
      for (int t = 0; t < threads; ++t) {
        const std::size_t lo = t * stride;
        const std::size_t hi = std::min(count, lo + stride);
        if (lo >= hi) break;
        workers.push_back(std::async(std::launch::async, [&, lo, hi] {
          for (std::size_t k = lo; k < hi; ++k)
            lines[k] = to_json(generate_record(cfg, start + k)).dump();
        }));
      }
      for (auto& w : workers) w.get();
    } else {
      for (std::size_t k = 0; k < count; ++k)
        lines[k] = to_json(generate_record(cfg, start + k)).dump();
    }
    for (const std::string& line : lines) out << line << '\n';
    if (!out) throw std::runtime_error("write failure on dataset: " + path);
    if (progress) progress(start + count);
  }
  return cfg.n_records;
}

}  // namespace qot
