// Command-line entry point: synthetic dataset generation, model training,
// prediction, oracle inspection, and the Delta-SNR evaluation/sweep flows.
//
// Exit codes: 0 success, 1 data/validation failure, 2 usage/config error.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qot/datagen.hpp"
#include "qot/evalharness.hpp"
#include "qot/jsonio.hpp"
#include "qot/neural.hpp"
#include "qot/physics.hpp"

namespace {

// Config/usage problems exit 2; everything else that throws exits 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

qot::Json load_json_file(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw UsageError(std::string("missing ") + what + " file: " + path);
  qot::Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw UsageError(std::string("cannot parse ") + what + " file " + path + ": " + e.what());
  }
  return j;
}

struct GenerateArgs {
  std::string config_path, out_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 1;
  bool quiet = false;
};

int cmd_generate(const GenerateArgs& args) {
  qot::GenConfig cfg;
  try {
    cfg = qot::gen_config_from_json(load_json_file(args.config_path, "gen config"));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(std::string("invalid gen config: ") + e.what());
  }
  if (args.seed_set) cfg.base_seed = args.seed;

  const auto t0 = std::chrono::steady_clock::now();
  const auto progress = [&](std::size_t done) {
    if (!args.quiet && done % 4096 == 0)
      std::cerr << "generated " << done << "/" << cfg.n_records << " records\n";
  };
  const std::size_t n = qot::generate_dataset(cfg, args.out_path, args.threads, progress);
  std::cout << "wrote " << n << " records to " << args.out_path << " in "
            << seconds_since(t0) << " s\n";
  return 0;
}

struct TrainArgs {
  std::string data_path, arch = "ann", out_path, log_path;
  std::uint64_t seed = 1;
  int epochs = 0;  // 0 = recipe default
  bool quiet = false;
};

int cmd_train(const TrainArgs& args) {
  const std::vector<qot::LabeledRecord> records = qot::read_labeled_jsonl(args.data_path);
  qot::TrainConfig cfg;
  cfg.seed = args.seed;
  if (args.epochs > 0) cfg.epochs = args.epochs;

  const bool is_ann = args.arch == "ann";
  const std::vector<int> sizes = is_ann ? qot::ann_layer_sizes() : qot::snn_layer_sizes();
  const qot::Activation act = is_ann ? qot::Activation::LeakyRelu : qot::Activation::Selu;

  std::vector<qot::EpochLog> log;
  const auto t0 = std::chrono::steady_clock::now();
  qot::MlpModel model = qot::train(records, sizes, act, cfg, &log);
  model.meta.arch = args.arch;
  model.meta.model_id = args.arch + "-seed" + std::to_string(cfg.seed);
  if (!args.quiet)
    for (const qot::EpochLog& e : log)
      std::cerr << "epoch " << e.epoch << " lr " << e.lr << " train " << e.train_loss << " val "
                << e.val_loss << "\n";

  qot::save_model(model, args.out_path);
  const std::string log_path =
      args.log_path.empty() ? args.out_path + ".loss.csv" : args.log_path;
  qot::write_loss_log(log, log_path);
  std::cout << "trained " << model.meta.model_id << " on " << records.size() << " records in "
            << seconds_since(t0) << " s; final val loss " << log.back().val_loss << "; model "
            << args.out_path << "\n";
  return 0;
}

struct PredictArgs {
  std::string model_path, scenarios_path, out_path;
  double nf_db = qot::default_nf_db;
  bool quiet = false;
};

int cmd_predict(const PredictArgs& args) {
  const qot::MlpModel model = qot::load_model(args.model_path);
  const std::vector<qot::Scenario> scenarios = qot::read_scenarios_jsonl(args.scenarios_path);

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> etas = qot::predict_etas(model, scenarios);
  const double predict_s = seconds_since(t0);

  std::ofstream out(args.out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write predictions: " + args.out_path);
  out << "scenario_id,eta,snr_db\n";
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const qot::Channel& cut = scenarios[i].plan.cut();
    const double sigma2 = qot::linear_noise(scenarios[i].link, cut, args.nf_db);
    const double snr = qot::combine_snr(cut.launch_power, sigma2, etas[i],
                                        qot::penalties_for(scenarios[i].plan));
    char id[16];
    std::snprintf(id, sizeof id, "scn-%06zu", i);
    out << id << ',' << qot::double_to_string(etas[i]) << ',' << qot::double_to_string(snr)
        << '\n';
  }
  std::cout << "predicted " << scenarios.size() << " scenarios in " << predict_s
            << " s (feature extraction + forward pass, excluding file I/O";
  if (!scenarios.empty())
    std::cout << "; " << predict_s * 1e6 / scenarios.size() << " us/case";
  std::cout << ")\n";
  return 0;
}

struct EvaluateArgs {
  std::string model_path, data_path, split = "full", out_dir;
  bool quiet = false;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const qot::MlpModel model = qot::load_model(args.model_path);
  std::vector<qot::LabeledRecord> records = qot::read_labeled_jsonl(args.data_path);

  if (args.split != "full") {
    if (model.meta.dataset_size != records.size())
      throw std::runtime_error("split '" + args.split + "' requested but the model was trained on " +
                               std::to_string(model.meta.dataset_size) +
                               " records, dataset has " + std::to_string(records.size()));
    qot::TrainConfig split_cfg;
    split_cfg.seed = model.meta.split_seed;
    const qot::SplitIndices split = qot::split_indices(records.size(), split_cfg);
    const std::vector<std::size_t>* idx = nullptr;
    if (args.split == "train") idx = &split.train;
    else if (args.split == "val") idx = &split.val;
    else if (args.split == "test") idx = &split.test;
    else throw UsageError("unknown split: " + args.split);
    std::vector<qot::LabeledRecord> subset;
    subset.reserve(idx->size());
    for (std::size_t i : *idx) subset.push_back(std::move(records[i]));
    records = std::move(subset);
  }

  qot::EvalReport report = qot::evaluate(model, records);
  qot::emit_report(report, args.out_dir);
  std::cout << "evaluated " << report.n_cases << " cases (" << args.split << " split): mean dSNR "
            << report.mean_delta_db << " dB, max " << report.max_delta_db << " dB; report in "
            << args.out_dir << "\n";
  return 0;
}

struct SweepArgs {
  std::string model_path, config_path, measurements_path, out_dir;
  bool quiet = false;
};

int cmd_sweep(const SweepArgs& args) {
  qot::SweepConfig cfg;
  try {
    cfg = qot::sweep_config_from_json(load_json_file(args.config_path, "sweep config"));
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(std::string("invalid sweep config: ") + e.what());
  }
  const qot::MlpModel model = qot::load_model(args.model_path);

  qot::MeasurementTable table;
  const bool use_oracle = args.measurements_path.empty();
  if (!use_oracle) table = qot::ingest_measurements_file(args.measurements_path);

  const qot::EvalReport report =
      qot::sweep(cfg, qot::make_predictor(model), model.meta.model_id, use_oracle,
                 use_oracle ? nullptr : &table);
  qot::emit_report(report, args.out_dir);
  std::cout << "swept " << report.n_cases << " cases against " << report.reference
            << " reference: mean dSNR " << report.mean_delta_db << " dB, max "
            << report.max_delta_db << " dB; report in " << args.out_dir << "\n";
  return 0;
}

struct OracleArgs {
  std::string link_path, plan_path;
  int numerical = 0;
};

int cmd_oracle(const OracleArgs& args) {
  const qot::Link link = qot::link_from_json(load_json_file(args.link_path, "link"));
  const qot::ChannelPlan plan = qot::plan_from_json(load_json_file(args.plan_path, "plan"));

  const std::vector<qot::Violation> violations = qot::validate_plan(plan);
  if (!violations.empty()) {
    std::string msg = "invalid plan:";
    for (const qot::Violation& v : violations)
      msg += "\n  channel " + std::to_string(v.channel_index) + " [" + v.rule + "] " + v.detail;
    throw UsageError(msg);
  }
  for (const qot::Violation& w : qot::plan_warnings(plan))
    std::cerr << "warning: channel " << w.channel_index << " [" << w.rule << "] " << w.detail
              << "\n";
  for (const qot::Violation& w : qot::link_warnings(link))
    std::cerr << "warning: span " << w.channel_index << " [" << w.rule << "] " << w.detail << "\n";

  const double eta_cf = qot::eta_closed_form(link, plan);
  std::printf("eta_closed_form %.12g 1/W^2 (%.12g dB)\n", eta_cf, 10.0 * std::log10(eta_cf));
  if (args.numerical > 0) {
    const double eta_num = qot::eta_numerical(link, plan, args.numerical);
    std::printf("eta_numerical   %.12g 1/W^2 (%.12g dB)\n", eta_num, 10.0 * std::log10(eta_num));
    std::printf("gap             %.12g dB\n", 10.0 * std::log10(eta_cf / eta_num));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QoT estimation toolkit: GN-model oracle, synthetic data, NN training"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "sample labeled records to JSONL");
  generate->add_option("--config", gen.config_path, "gen config JSON")->required();
  generate->add_option("--out", gen.out_path, "output JSONL path")->required();
  generate->add_option("--seed", gen.seed, "override base_seed")->each([&](const std::string&) {
    gen.seed_set = true;
  });
  generate->add_option("--threads", gen.threads, "worker threads")->check(CLI::PositiveNumber);
  generate->add_flag("--quiet", gen.quiet, "suppress progress output");

  TrainArgs tr;
  CLI::App* train = app.add_subcommand("train", "train a network on a labeled dataset");
  train->add_option("--data", tr.data_path, "labeled JSONL dataset")->required();
  train->add_option("--arch", tr.arch, "architecture preset")
      ->check(CLI::IsMember({"ann", "snn"}))
      ->required();
  train->add_option("--out", tr.out_path, "output model JSON")->required();
  train->add_option("--log", tr.log_path, "loss log CSV (default: <out>.loss.csv)");
  train->add_option("--seed", tr.seed, "training seed");
  train->add_option("--epochs", tr.epochs, "override epoch count")->check(CLI::PositiveNumber);
  train->add_flag("--quiet", tr.quiet, "suppress per-epoch output");

  PredictArgs pr;
  CLI::App* predict = app.add_subcommand("predict", "predict eta and SNR for scenarios");
  predict->add_option("--model", pr.model_path, "model JSON")->required();
  predict->add_option("--scenarios", pr.scenarios_path, "scenario or labeled JSONL")->required();
  predict->add_option("--out", pr.out_path, "output CSV")->required();
  predict->add_option("--nf-db", pr.nf_db, "amplifier noise figure for SNR");
  predict->add_flag("--quiet", pr.quiet, "suppress progress output");

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Delta-SNR report against oracle labels");
  evaluate->add_option("--model", ev.model_path, "model JSON")->required();
  evaluate->add_option("--data", ev.data_path, "labeled JSONL dataset")->required();
  evaluate->add_option("--split", ev.split, "full|train|val|test")
      ->check(CLI::IsMember({"full", "train", "val", "test"}));
  evaluate->add_option("--out", ev.out_dir, "report directory")->required();
  evaluate->add_flag("--quiet", ev.quiet, "suppress progress output");

  SweepArgs sw;
  CLI::App* sweep = app.add_subcommand("sweep", "channel-plan sweep report");
  sweep->add_option("--model", sw.model_path, "model JSON")->required();
  sweep->add_option("--sweep-config", sw.config_path, "sweep config JSON")->required();
  sweep->add_option("--measurements", sw.measurements_path,
                    "measurement CSV (default: oracle reference)");
  sweep->add_option("--out", sw.out_dir, "report directory")->required();
  sweep->add_flag("--quiet", sw.quiet, "suppress progress output");

  OracleArgs orc;
  CLI::App* oracle = app.add_subcommand("oracle", "closed-form / numerical eta for one plan");
  oracle->add_option("--link", orc.link_path, "link JSON")->required();
  oracle->add_option("--plan", orc.plan_path, "plan JSON")->required();
  oracle->add_option("--numerical", orc.numerical,
                     "also run the GN integral with N quadrature points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*train) return cmd_train(tr);
    if (*predict) return cmd_predict(pr);
    if (*evaluate) return cmd_evaluate(ev);
    if (*sweep) return cmd_sweep(sw);
    if (*oracle) return cmd_oracle(orc);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
