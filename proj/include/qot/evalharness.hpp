// Delta-SNR evaluation against the oracle or against ingested measurements,
// and the config-driven channel-plan sweep emulating the field study.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qot/datagen.hpp"
#include "qot/jsonio.hpp"
#include "qot/linkmodel.hpp"
#include "qot/neural.hpp"
#include "qot/physics.hpp"

namespace qot {

using EtaPredictor = std::function<double(const Scenario&)>;

inline EtaPredictor make_predictor(const MlpModel& model) {
  return [&model](const Scenario& s) { return predict_eta(model, s); };
}

struct EvalRow {
  std::string case_id;
  double snr_model_db;
  double snr_ref_db;
  double delta_snr_db;  // |model - ref|
};

struct EvalReport {
  std::vector<EvalRow> rows;  // sorted by case_id
  double mean_delta_db = 0.0;
  double max_delta_db = 0.0;
  std::size_t n_cases = 0;
  std::string model_id;
  std::string reference;  // "oracle" | "measurement"
};

namespace detail {

inline void finalize_report(EvalReport& report) {
  std::sort(report.rows.begin(), report.rows.end(),
            [](const EvalRow& a, const EvalRow& b) { return a.case_id < b.case_id; });
  report.n_cases = report.rows.size();
  double sum = 0.0, maxv = 0.0;
  for (const EvalRow& r : report.rows) {
    sum += r.delta_snr_db;
    maxv = std::max(maxv, r.delta_snr_db);
  }
  report.mean_delta_db = report.rows.empty() ? 0.0 : sum / report.rows.size();
  report.max_delta_db = maxv;
}

inline std::string padded_index(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "rec-%06zu", i);
  return buf;
}

}  // namespace detail

/// Per-record SNR deviation of a predictor against the stored oracle labels.
/// The model-side SNR reuses the record's offline linear noise and the
/// plan's penalties, so the comparison isolates the NLI prediction.
inline EvalReport evaluate(const EtaPredictor& predict, const std::vector<LabeledRecord>& records,
                           std::string model_id) {
  if (records.empty()) throw std::invalid_argument("evaluate: empty dataset");
  EvalReport report;
  report.model_id = std::move(model_id);
  report.reference = "oracle";
  report.rows.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const LabeledRecord& rec = records[i];
    const double eta_hat = predict(rec.scenario);
    const double snr_model = combine_snr(rec.scenario.plan.cut().launch_power, rec.sigma2,
                                         eta_hat, penalties_for(rec.scenario.plan));
    report.rows.push_back({detail::padded_index(i), snr_model, rec.snr_db,
                           std::abs(snr_model - rec.snr_db)});
  }
  detail::finalize_report(report);
  return report;
}

/// Batched overload for trained models.
inline EvalReport evaluate(const MlpModel& model, const std::vector<LabeledRecord>& records) {
  if (records.empty()) throw std::invalid_argument("evaluate: empty dataset");
  std::vector<Scenario> scenarios;
  scenarios.reserve(records.size());
  for (const LabeledRecord& r : records) scenarios.push_back(r.scenario);
  const std::vector<double> etas = predict_etas(model, scenarios);
  EvalReport report;
  report.model_id = model.meta.model_id;
  report.reference = "oracle";
  report.rows.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const LabeledRecord& rec = records[i];
    const double snr_model = combine_snr(rec.scenario.plan.cut().launch_power, rec.sigma2,
                                         etas[i], penalties_for(rec.scenario.plan));
    report.rows.push_back({detail::padded_index(i), snr_model, rec.snr_db,
                           std::abs(snr_model - rec.snr_db)});
  }
  detail::finalize_report(report);
  return report;
}

// --- measurements ------------------------------------------------------------

struct MeasurementTable {
  std::map<std::string, double> snr_db;  // keyed by case id
};

/// Parses "case_id,measured_snr_db[,extra...]" CSV. Extra columns are
/// preserved as opaque text and ignored here. Malformed rows and duplicate
/// case ids are hard errors naming the offending line numbers.
inline MeasurementTable ingest_measurements(std::istream& in, const std::string& origin = "csv") {
  MeasurementTable table;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line.rfind("case_id,measured_snr_db", 0) != 0)
        throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                 ": expected header starting with case_id,measured_snr_db");
      header_seen = true;
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos || comma == 0)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": malformed row");
    const std::string id = line.substr(0, comma);
    const std::string rest = line.substr(comma + 1);
    const std::string value = rest.substr(0, rest.find(','));
    double snr = 0.0;
    try {
      std::size_t used = 0;
      snr = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": cannot parse measured_snr_db '" + value + "'");
    }
    const auto [it, inserted] = first_line.emplace(id, line_no);
    if (!inserted)
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": duplicate case_id '" +
                               id + "' (first seen at line " + std::to_string(it->second) + ")");
    table.snr_db[id] = snr;
  }
  if (!header_seen) throw std::runtime_error(origin + ": missing header");
  return table;
}

inline MeasurementTable ingest_measurements_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open measurements: " + path);
  return ingest_measurements(in, path);
}

inline void emit_measurements(const MeasurementTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write measurements: " + path);
  out << "case_id,measured_snr_db\n";
  for (const auto& [id, snr] : table.snr_db) out << id << ',' << double_to_string(snr) << '\n';
}

// --- sweep --------------------------------------------------------------------

struct SweepLink {
  std::string id;
  Link link;
};

struct SweepCut {
  std::string id;
  std::string link_id;
  Payload payload = Payload::Qpsk100G;
  double launch_power_dbm = 0.0;
  Payload neighbor_payload = Payload::Qpsk100G;
  double neighbor_power_dbm = 0.0;
};

struct SweepRepeat {
  std::string cut_id;
  Payload neighbor_payload = Payload::Qpsk200G;
  std::vector<std::string> modes;  // empty -> config modes minus all-off
};

struct SweepBackground {
  bool enabled = false;
  Payload payload = Payload::Qpsk100G;
  double launch_power_dbm = 0.0;
  double exclusion_window_ghz = 400.0;  // test window centred on the CUT
  double occupancy_target = 0.90;
};

struct SweepConfig {
  std::vector<SweepLink> links;
  std::vector<SweepCut> cuts;
  std::vector<std::string> modes;  // 4-bit patterns over [2L, 1L, 1R, 2R]
  std::vector<SweepRepeat> repeats;
  SweepBackground background;
  double cut_center_thz = 193.95;
  double nf_db = default_nf_db;
};

struct SweepCase {
  std::string case_id;  // "<cut>.<neighbor payload>.<mode>"
  Scenario scenario;
};

namespace detail {

inline void check_mode(const std::string& mode) {
  if (mode.size() != 4 || mode.find_first_not_of("01") != std::string::npos)
    throw std::runtime_error("sweep: mode '" + mode + "' is not a 4-bit pattern");
}

/// CUT at the configured centre plus the active neighbor template slots
/// (adjacent, touching), plus the optional background comb outside the
/// exclusion window, thinned evenly to the occupancy target.
inline ChannelPlan build_sweep_plan(const SweepConfig& cfg, const SweepCut& cut,
                                    Payload neighbor_payload, const std::string& mode) {
  check_mode(mode);
  ChannelPlan plan;
  plan.channels.push_back(make_channel(cut.payload, cfg.cut_center_thz, cut.launch_power_dbm, true));

  const double w_cut = payload_slot_width_ghz(cut.payload);
  const double w_nb = payload_slot_width_ghz(neighbor_payload);
  const double first = 0.5 * (w_cut + w_nb) * 1e-3;  // THz between CUT and 1st neighbor
  const double step = w_nb * 1e-3;
  const double offsets[4] = {-(first + step), -first, first, first + step};
  for (int slot = 0; slot < 4; ++slot) {
    if (mode[slot] == '1')
      plan.channels.push_back(make_channel(neighbor_payload,
                                           cfg.cut_center_thz + offsets[slot],
                                           cut.neighbor_power_dbm));
  }

  if (cfg.background.enabled) {
    const double w_bg = payload_slot_width_ghz(cfg.background.payload);
    const double lo_excl = cfg.cut_center_thz - 0.5 * cfg.background.exclusion_window_ghz * 1e-3;
    const double hi_excl = cfg.cut_center_thz + 0.5 * cfg.background.exclusion_window_ghz * 1e-3;
    std::vector<double> slots;
    for (double lo = c_band_min_thz; lo + w_bg * 1e-3 <= c_band_max_thz + 1e-12; lo += w_bg * 1e-3) {
      const double hi = lo + w_bg * 1e-3;
      if (hi <= lo_excl + 1e-12 || lo >= hi_excl - 1e-12) slots.push_back(lo + 0.5 * w_bg * 1e-3);
    }
    double used_ghz = 0.0;
    for (const Channel& c : plan.channels) used_ghz += c.slot_width;
    const int wanted = std::max(
        0, static_cast<int>((cfg.background.occupancy_target * c_band_width_ghz - used_ghz) / w_bg));
    const int available = static_cast<int>(slots.size());
    const int n_bg = std::min(wanted, available);
    for (int i = 0; i < n_bg; ++i) {
      // spread the kept slots evenly over the available comb
      const int k = static_cast<int>((static_cast<long long>(i) * available) / n_bg);
      plan.channels.push_back(make_channel(cfg.background.payload, slots[k],
                                           cfg.background.launch_power_dbm));
    }
  }
  return canonical(plan);
}

inline const SweepLink& find_link(const SweepConfig& cfg, const std::string& id) {
  for (const SweepLink& l : cfg.links)
    if (l.id == id) return l;
  throw std::runtime_error("sweep: unknown link id '" + id + "'");
}

}  // namespace detail

/// One case per (CUT definition x mode), plus the configured neighbor-payload
/// repeats (defaulting to every mode except all-off, which would duplicate
/// the base case's plan). Case ids are stable composite keys, so measurement
/// joins are order-independent.
inline std::vector<SweepCase> expand_sweep(const SweepConfig& cfg) {
  if (cfg.modes.empty()) throw std::runtime_error("sweep: no modes configured");
  std::vector<SweepCase> cases;
  const auto add_case = [&](const SweepCut& cut, Payload neighbor_payload,
                            const std::string& mode) {
    SweepCase c;
    c.case_id = cut.id + "." + payload_name(neighbor_payload) + "." + mode;
    c.scenario.link = detail::find_link(cfg, cut.link_id).link;
    c.scenario.plan = detail::build_sweep_plan(cfg, cut, neighbor_payload, mode);
    cases.push_back(std::move(c));
  };
  for (const SweepCut& cut : cfg.cuts)
    for (const std::string& mode : cfg.modes) add_case(cut, cut.neighbor_payload, mode);
  for (const SweepRepeat& rep : cfg.repeats) {
    const auto it = std::find_if(cfg.cuts.begin(), cfg.cuts.end(),
                                 [&](const SweepCut& c) { return c.id == rep.cut_id; });
    if (it == cfg.cuts.end())
      throw std::runtime_error("sweep: repeat references unknown cut '" + rep.cut_id + "'");
    std::vector<std::string> modes = rep.modes;
    if (modes.empty()) {
      for (const std::string& m : cfg.modes)
        if (m != "0000") modes.push_back(m);
    }
    for (const std::string& mode : modes) add_case(*it, rep.neighbor_payload, mode);
  }
  return cases;
}

/// Reference SNR from the closed-form oracle, or joined from a measurement
/// table by case id. Missing measurement rows are reported together, never
/// silently dropped.
inline EvalReport sweep(const SweepConfig& cfg, const EtaPredictor& predict, std::string model_id,
                        bool use_oracle_ref, const MeasurementTable* measurements = nullptr) {
  if (!use_oracle_ref && !measurements)
    throw std::invalid_argument("sweep: measurement reference requested without a table");
  EvalReport report;
  report.model_id = std::move(model_id);
  report.reference = use_oracle_ref ? "oracle" : "measurement";
  std::vector<std::string> missing;
  for (const SweepCase& c : expand_sweep(cfg)) {
    const Channel& cut = c.scenario.plan.cut();
    const double sigma2 = linear_noise(c.scenario.link, cut, cfg.nf_db);
    const double penalties = penalties_for(c.scenario.plan);
    const double snr_model =
        combine_snr(cut.launch_power, sigma2, predict(c.scenario), penalties);
    double snr_ref = 0.0;
    if (use_oracle_ref) {
      snr_ref = combine_snr(cut.launch_power, sigma2,
                            eta_closed_form(c.scenario.link, c.scenario.plan), penalties);
    } else {
      const auto it = measurements->snr_db.find(c.case_id);
      if (it == measurements->snr_db.end()) {
        missing.push_back(c.case_id);
        continue;
      }
      snr_ref = it->second;
    }
    report.rows.push_back({c.case_id, snr_model, snr_ref, std::abs(snr_model - snr_ref)});
  }
  if (!missing.empty()) {
    std::string msg = "sweep: missing measurement rows for:";
    for (const std::string& id : missing) msg += " " + id;
    throw std::runtime_error(msg);
  }
  detail::finalize_report(report);
  return report;
}

// --- report emission ------------------------------------------------------------

/// report.csv (rows by case id) + summary.json under `dir`. Reruns on the
/// same inputs are byte-identical.
inline void emit_report(const EvalReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir + "/report.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write report.csv under " + dir);
    csv << "case_id,snr_model_db,snr_ref_db,delta_snr_db\n";
    for (const EvalRow& r : report.rows)
      csv << r.case_id << ',' << double_to_string(r.snr_model_db) << ','
          << double_to_string(r.snr_ref_db) << ',' << double_to_string(r.delta_snr_db) << '\n';
  }
  {
    Json summary{{"mean_delta_db", report.mean_delta_db},
                 {"max_delta_db", report.max_delta_db},
                 {"n_cases", report.n_cases},
                 {"model_id", report.model_id},
                 {"reference", report.reference}};
    std::ofstream js(dir + "/summary.json", std::ios::binary);
    if (!js) throw std::runtime_error("cannot write summary.json under " + dir);
    js << summary.dump(2) << '\n';
  }
}

// --- sweep config file ------------------------------------------------------------

inline SweepConfig sweep_config_from_json(const Json& j) {
  SweepConfig cfg;
  for (const Json& jl : j.at("links")) {
    SweepLink l;
    l.id = jl.at("id").get<std::string>();
    if (jl.contains("spans")) {
      l.link = link_from_json(jl);
    } else {
      const int count = jl.at("span_count").get<int>();
      Span span;
      span.length = jl.at("span_length_km").get<double>();
      span.alpha = jl.value("alpha_db_per_km", 0.2);
      l.link.spans.assign(count, span);
    }
    cfg.links.push_back(std::move(l));
  }
  if (j.contains("cut_center_thz")) cfg.cut_center_thz = j.at("cut_center_thz").get<double>();
  if (j.contains("nf_db")) cfg.nf_db = j.at("nf_db").get<double>();
  for (const Json& jc : j.at("cuts")) {
    SweepCut c;
    c.id = jc.at("id").get<std::string>();
    c.link_id = jc.at("link").get<std::string>();
    if (!parse_payload(jc.at("payload").get<std::string>(), c.payload))
      throw std::runtime_error("sweep cut " + c.id + ": unknown payload");
    c.launch_power_dbm = jc.at("launch_power_dbm").get<double>();
    std::string nb = jc.value("neighbor_payload", std::string(payload_name(c.payload)));
    if (!parse_payload(nb, c.neighbor_payload))
      throw std::runtime_error("sweep cut " + c.id + ": unknown neighbor payload");
    c.neighbor_power_dbm = jc.value("neighbor_power_dbm", c.launch_power_dbm);
    cfg.cuts.push_back(std::move(c));
  }
  cfg.modes = j.at("modes").get<std::vector<std::string>>();
  for (const std::string& m : cfg.modes) detail::check_mode(m);
  if (j.contains("repeats")) {
    for (const Json& jr : j.at("repeats")) {
      SweepRepeat r;
      r.cut_id = jr.at("cut").get<std::string>();
      if (!parse_payload(jr.at("neighbor_payload").get<std::string>(), r.neighbor_payload))
        throw std::runtime_error("sweep repeat: unknown neighbor payload");
      if (jr.contains("modes")) r.modes = jr.at("modes").get<std::vector<std::string>>();
      cfg.repeats.push_back(std::move(r));
    }
  }
  if (j.contains("background")) {
    const Json& jb = j.at("background");
    cfg.background.enabled = true;
    if (jb.contains("payload") &&
        !parse_payload(jb.at("payload").get<std::string>(), cfg.background.payload))
      throw std::runtime_error("sweep background: unknown payload");
    cfg.background.launch_power_dbm = jb.value("launch_power_dbm", 0.0);
    cfg.background.exclusion_window_ghz = jb.value("exclusion_window_ghz", 400.0);
    cfg.background.occupancy_target = jb.value("occupancy_target", 0.90);
  }
  return cfg;
}

inline SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sweep config: " + path);
  Json j;
  in >> j;
  return sweep_config_from_json(j);
}

}  // namespace qot
