// JSON / JSONL / CSV wire formats. Scenario and LabeledRecord serialize as
// one JSON object per line with field names matching the domain types;
// frequencies in THz, powers in dBm, lengths in km. Model files are a single
// JSON document. All emission is deterministic: insertion-ordered keys and
// shortest round-trip number formatting.
#pragma once

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qot/features.hpp"
#include "qot/linkmodel.hpp"
#include "qot/neural.hpp"

namespace qot {

using Json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same bits.
inline std::string double_to_string(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// --- domain types ------------------------------------------------------------

inline Json to_json(const Span& s) {
  return Json{{"length", s.length}, {"alpha", s.alpha}, {"gamma", s.gamma},
              {"dispersion", s.dispersion}};
}

inline Span span_from_json(const Json& j) {
  Span s;
  s.length = j.at("length").get<double>();
  s.alpha = j.at("alpha").get<double>();
  s.gamma = j.value("gamma", 1.3);
  s.dispersion = j.value("dispersion", 16.7);
  return s;
}

inline Json to_json(const Link& link) {
  Json spans = Json::array();
  for (const Span& s : link.spans) spans.push_back(to_json(s));
  return Json{{"spans", std::move(spans)}};
}

inline Link link_from_json(const Json& j) {
  Link link;
  for (const Json& js : j.at("spans")) link.spans.push_back(span_from_json(js));
  return link;
}

inline Json to_json(const Channel& c) {
  return Json{{"center_frequency", c.center_frequency},
              {"symbol_rate", c.symbol_rate},
              {"slot_width", c.slot_width},
              {"launch_power", c.launch_power},
              {"payload", payload_name(c.payload)},
              {"is_cut", c.is_cut}};
}

inline Channel channel_from_json(const Json& j) {
  Channel c;
  c.center_frequency = j.at("center_frequency").get<double>();
  c.symbol_rate = j.at("symbol_rate").get<double>();
  c.slot_width = j.at("slot_width").get<double>();
  c.launch_power = j.at("launch_power").get<double>();
  const std::string name = j.at("payload").get<std::string>();
  if (!parse_payload(name, c.payload))
    throw std::runtime_error("unknown payload class: " + name);
  c.is_cut = j.at("is_cut").get<bool>();
  return c;
}

inline Json to_json(const ChannelPlan& plan) {
  Json channels = Json::array();
  for (const Channel& c : plan.channels) channels.push_back(to_json(c));
  return Json{{"channels", std::move(channels)}, {"cut_index", plan.cut_index}};
}

inline ChannelPlan plan_from_json(const Json& j) {
  ChannelPlan plan;
  for (const Json& jc : j.at("channels")) plan.channels.push_back(channel_from_json(jc));
  plan.cut_index = j.at("cut_index").get<std::size_t>();
  return plan;
}

inline Json to_json(const Scenario& s) {
  return Json{{"link", to_json(s.link)}, {"plan", to_json(s.plan)}, {"seed", s.seed}};
}

inline Scenario scenario_from_json(const Json& j) {
  Scenario s;
  s.link = link_from_json(j.at("link"));
  s.plan = plan_from_json(j.at("plan"));
  s.seed = j.value("seed", std::uint64_t{0});
  return s;
}

inline Json to_json(const LabeledRecord& r) {
  return Json{{"scenario", to_json(r.scenario)},
              {"eta", r.eta},
              {"sigma2", r.sigma2},
              {"snr_db", r.snr_db}};
}

inline LabeledRecord record_from_json(const Json& j) {
  LabeledRecord r;
  r.scenario = scenario_from_json(j.at("scenario"));
  r.eta = j.at("eta").get<double>();
  r.sigma2 = j.at("sigma2").get<double>();
  r.snr_db = j.at("snr_db").get<double>();
  return r;
}

// --- JSONL files ---------------------------------------------------------------

inline std::vector<LabeledRecord> read_labeled_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<LabeledRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

/// Accepts both bare Scenario lines and LabeledRecord lines.
inline std::vector<Scenario> read_scenarios_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::vector<Scenario> scenarios;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      scenarios.push_back(j.contains("scenario") ? scenario_from_json(j.at("scenario"))
                                                 : scenario_from_json(j));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return scenarios;
}

// --- model file ------------------------------------------------------------------

inline Json model_to_json(const MlpModel& model) {
  Json layers = Json::array();
  for (const DenseLayer& layer : model.layers) {
    Json weights = Json::array();
    for (int i = 0; i < layer.weights.rows; ++i) {
      Json row = Json::array();
      for (int j = 0; j < layer.weights.cols; ++j) row.push_back(layer.weights.at(i, j));
      weights.push_back(std::move(row));
    }
    layers.push_back(Json{{"weights", std::move(weights)}, {"bias", layer.bias}});
  }
  return Json{
      {"architecture", model.layer_sizes},
      {"activation", activation_name(model.activation)},
      {"layers", std::move(layers)},
      {"norm_stats",
       Json{{"mean", std::vector<double>(model.norm_stats.mean.begin(), model.norm_stats.mean.end())},
            {"std", std::vector<double>(model.norm_stats.stddev.begin(),
                                        model.norm_stats.stddev.end())}}},
      {"target_transform", Json{{"kind", target_scale_name(model.target_scale)},
                                {"mean", model.norm_stats.target_mean},
                                {"std", model.norm_stats.target_stddev}}},
      {"metadata", Json{{"arch", model.meta.arch},
                        {"model_id", model.meta.model_id},
                        {"seed", model.meta.seed},
                        {"epochs_trained", model.meta.epochs_trained},
                        {"split_seed", model.meta.split_seed},
                        {"dataset_size", model.meta.dataset_size}}}};
}

inline MlpModel model_from_json(const Json& j) {
  MlpModel model;
  model.layer_sizes = j.at("architecture").get<std::vector<int>>();
  const std::string act = j.at("activation").get<std::string>();
  if (!parse_activation(act, model.activation))
    throw std::runtime_error("unknown activation: " + act);
  for (const Json& jl : j.at("layers")) {
    DenseLayer layer;
    const Json& w = jl.at("weights");
    const int rows = static_cast<int>(w.size());
    const int cols = rows > 0 ? static_cast<int>(w[0].size()) : 0;
    layer.weights = Mat(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int jj = 0; jj < cols; ++jj) layer.weights.at(i, jj) = w[i][jj].get<double>();
    layer.bias = jl.at("bias").get<std::vector<double>>();
    model.layers.push_back(std::move(layer));
  }
  const Json& ns = j.at("norm_stats");
  const auto mean = ns.at("mean").get<std::vector<double>>();
  const auto stddev = ns.at("std").get<std::vector<double>>();
  if (mean.size() != feature_count || stddev.size() != feature_count)
    throw std::runtime_error("model norm_stats do not match the feature layout");
  std::copy(mean.begin(), mean.end(), model.norm_stats.mean.begin());
  std::copy(stddev.begin(), stddev.end(), model.norm_stats.stddev.begin());
  const Json& tt = j.at("target_transform");
  if (!parse_target_scale(tt.at("kind").get<std::string>(), model.target_scale))
    throw std::runtime_error("unknown target transform: " + tt.at("kind").get<std::string>());
  model.norm_stats.target_mean = tt.at("mean").get<double>();
  model.norm_stats.target_stddev = tt.at("std").get<double>();
  const Json& meta = j.at("metadata");
  model.meta.arch = meta.value("arch", "custom");
  model.meta.model_id = meta.value("model_id", "");
  model.meta.seed = meta.value("seed", std::uint64_t{0});
  model.meta.epochs_trained = meta.value("epochs_trained", 0);
  model.meta.split_seed = meta.value("split_seed", std::uint64_t{0});
  model.meta.dataset_size = meta.value("dataset_size", std::uint64_t{0});
  return model;
}

inline void save_model(const MlpModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json(model).dump() << '\n';
}

inline MlpModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  Json j;
  in >> j;
  return model_from_json(j);
}

// --- loss log ---------------------------------------------------------------------

inline void write_loss_log(const std::vector<EpochLog>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss log: " + path);
  out << "epoch,lr,train_loss,val_loss\n";
  for (const EpochLog& e : log)
    out << e.epoch << ',' << double_to_string(e.lr) << ',' << double_to_string(e.train_loss)
        << ',' << double_to_string(e.val_loss) << '\n';
}

}  // namespace qot
