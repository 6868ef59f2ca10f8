#include "ltls/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "CLI11.hpp"

#include "ltls/dataio.hpp"
#include "ltls/error.hpp"
#include "ltls/evaluate.hpp"
#include "ltls/model_file.hpp"
#include "ltls/pipeline.hpp"
#include "ltls/trainer.hpp"

namespace ltls::cli {

namespace {

struct DataFlags {
  std::string format = "libsvm";
  std::uint32_t index_base = 0;
  bool normalize = false;

  void add_to(CLI::App& app) {
    app.add_option("--format", format, "Input format: libsvm (headerless) or xc (\"N D C\" header)")
        ->check(CLI::IsMember({"libsvm", "xc"}))
        ->capture_default_str();
    app.add_option("--index-base", index_base, "First feature index used by the file (0 or 1)")
        ->check(CLI::IsMember({0U, 1U}))
        ->capture_default_str();
    app.add_flag("--normalize", normalize, "Scale every instance to unit L2 norm");
  }

  DatasetOptions options(LabelMode mode) const {
    DatasetOptions o;
    o.format = format == "xc" ? DataFormat::xc : DataFormat::libsvm;
    o.parse.mode = mode;
    o.parse.index_base = index_base;
    o.parse.normalize = normalize;
    return o;
  }
};

struct TrainFlags {
  std::string data;
  std::string model_out;
  std::string mode = "multiclass";
  int epochs = 10;
  double lr = 0.1;
  double l1 = 0.0;
  std::uint32_t beam_m = 0;
  std::uint64_t seed = 1;
  bool no_shuffle = false;
  DataFlags data_flags;
};

struct PredictFlags {
  std::string model;
  std::string data;
  std::size_t topk = 1;
  std::string out;
  DataFlags data_flags;
};

struct EvaluateFlags {
  std::string model;
  std::string data;
  std::size_t k = 5;
  std::string json_out;
  DataFlags data_flags;
};

struct BaselineFlags {
  std::string train;
  std::string test;
  std::string mode = "multiclass";
  DataFlags data_flags;
};

TrainMode parse_mode(const std::string& mode) {
  if (mode == "multilabel") return TrainMode::multilabel_rank;
  if (mode == "softmax") return TrainMode::multiclass_softmax;
  return TrainMode::multiclass_rank;
}

std::vector<std::vector<LabelId>> gold_sets(const std::vector<Example>& examples) {
  std::vector<std::vector<LabelId>> gold;
  gold.reserve(examples.size());
  for (const auto& ex : examples) gold.push_back(ex.labels);
  return gold;
}

int cmd_train(const TrainFlags& f, std::ostream& err) {
  TrainConfig config;
  config.mode = parse_mode(f.mode);
  config.epochs = f.epochs;
  config.learning_rate = f.lr;
  config.l1_lambda = f.l1;
  if (f.beam_m > 0) config.assignment_beam = f.beam_m;
  config.rng_seed = f.seed;
  config.shuffle = !f.no_shuffle;
  config.validate();

  Dataset ds = load_dataset(f.data, f.data_flags.options(label_mode(config.mode)));
  const Model model = train_model(std::move(ds), config, &err);
  const std::size_t bytes = save_model(model, f.model_out);
  err << "ltls: wrote " << f.model_out << " (" << bytes << " bytes)\n";
  return kOk;
}

Dataset load_for_model(const Model& model, const std::string& path, const DataFlags& flags) {
  return load_dataset(path, flags.options(label_mode(model.mode)), model.dict, model.weights.num_features());
}

int cmd_predict(const PredictFlags& f, std::ostream& out) {
  const Model model = load_model(f.model);
  if (f.topk > model.table.assigned_count())
    throw InvalidArgument("--topk " + std::to_string(f.topk) + " exceeds the " +
                          std::to_string(model.table.assigned_count()) + " labels assigned in the model");
  const Dataset ds = load_for_model(model, f.data, f.data_flags);
  const auto preds = predict_all(model.trellis, model.weights, model.table, ds.examples, f.topk,
                                 {model.l1_lambda}, evaluation_threads());

  std::ofstream file;
  std::ostream* sink = &out;
  if (!f.out.empty()) {
    file.open(f.out);
    if (!file) throw IoError("cannot open " + f.out + " for writing");
    sink = &file;
  }
  for (const auto& p : preds) {
    for (std::size_t i = 0; i < p.labels.size(); ++i) {
      if (i) *sink << '\t';
      *sink << model.dict.token(p.labels[i]) << ':' << std::setprecision(9) << p.scores[i];
    }
    *sink << '\n';
  }
  if (!*sink) throw IoError("failed writing predictions");
  return kOk;
}

int cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
  const Model model = load_model(f.model);
  const Dataset ds = load_for_model(model, f.data, f.data_flags);

  MetricsReport report = evaluate_model(model, ds, {1, 3, 5, f.k}, evaluation_threads());
  report.model_size_bytes = static_cast<std::size_t>(std::filesystem::file_size(f.model));

  out << report.to_table();
  const std::string json = report.to_json();
  out << json << '\n';
  if (!f.json_out.empty()) {
    std::ofstream file(f.json_out);
    if (!file) throw IoError("cannot open " + f.json_out + " for writing");
    file << json << '\n';
  }
  return kOk;
}

int cmd_baseline(const BaselineFlags& f, std::ostream& out) {
  const LabelMode mode = label_mode(parse_mode(f.mode));
  const Dataset train = load_dataset(f.train, f.data_flags.options(mode));
  if (train.dict.size() < 2) throw InvalidArgument("training data needs at least 2 labels");
  const Dataset test = load_dataset(f.test, f.data_flags.options(mode), train.dict, train.num_features);

  const std::size_t E = expected_edge_count(train.dict.size());
  const double oracle = oracle_top_frequent(gold_sets(train.examples), gold_sets(test.examples), E);
  out << "C=" << train.dict.size() << '\n';
  out << "E=" << E << '\n';
  out << "oracle=" << std::fixed << std::setprecision(4) << oracle << '\n';
  return kOk;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LTLS: log-time log-space extreme classification", "ltls"};
  app.require_subcommand(1);

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write it to disk");
  train_cmd->add_option("--data", train.data, "Training data file")->required();
  train_cmd->add_option("--model-out", train.model_out, "Output model path")->required();
  train_cmd->add_option("--mode", train.mode, "multiclass | multilabel | softmax")
      ->check(CLI::IsMember({"multiclass", "multilabel", "softmax"}))
      ->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "Passes over the data")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--lr", train.lr, "Constant learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--l1", train.l1, "Prediction-time L1 soft-threshold")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train_cmd->add_option("--beam-m", train.beam_m, "Top-m beam for label assignment (default ceil(log2 C))")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  train_cmd->add_flag("--no-shuffle", train.no_shuffle, "Visit examples in file order every epoch");
  train.data_flags.add_to(*train_cmd);

  PredictFlags predict;
  auto* predict_cmd = app.add_subcommand("predict", "Write top-k label:score predictions, one line per example");
  predict_cmd->add_option("--model", predict.model, "Model file")->required();
  predict_cmd->add_option("--data", predict.data, "Data file")->required();
  predict_cmd->add_option("--topk", predict.topk, "Labels per example")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  predict_cmd->add_option("--out", predict.out, "Output file (default: standard output)");
  predict.data_flags.add_to(*predict_cmd);

  EvaluateFlags evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Report precision@{1,3,5}, timing and model size");
  evaluate_cmd->add_option("--model", evaluate.model, "Model file")->required();
  evaluate_cmd->add_option("--data", evaluate.data, "Test data file")->required();
  evaluate_cmd->add_option("--k", evaluate.k, "Extra precision@k to report")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  evaluate_cmd->add_option("--json-out", evaluate.json_out, "Also write the JSON record here");
  evaluate.data_flags.add_to(*evaluate_cmd);

  BaselineFlags baseline;
  auto* baseline_cmd =
      app.add_subcommand("baseline", "Oracle precision@1 of predicting the E most frequent training labels");
  baseline_cmd->add_option("--train", baseline.train, "Training data file")->required();
  baseline_cmd->add_option("--test", baseline.test, "Test data file")->required();
  baseline_cmd->add_option("--mode", baseline.mode, "multiclass | multilabel")
      ->check(CLI::IsMember({"multiclass", "multilabel", "softmax"}))
      ->capture_default_str();
  baseline.data_flags.add_to(*baseline_cmd);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "ltls: error[usage]: " << one_line(e.what()) << '\n';
    return kUsage;
  }

  const char* stage = "";
  try {
    if (*train_cmd) {
      stage = "train";
      return cmd_train(train, err);
    }
    if (*predict_cmd) {
      stage = "predict";
      return cmd_predict(predict, out);
    }
    if (*evaluate_cmd) {
      stage = "evaluate";
      return cmd_evaluate(evaluate, out);
    }
    stage = "baseline";
    return cmd_baseline(baseline, out);
  } catch (const Error& e) {
    err << "ltls: error[" << error_category(e.kind()) << "]: " << stage << ": " << one_line(e.what()) << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    err << "ltls: error[io]: " << stage << ": " << one_line(e.what()) << '\n';
  } catch (const std::bad_alloc&) {
    err << "ltls: error[capacity]: " << stage << ": out of memory\n";
  }
  return kFailure;
}

}  // namespace ltls::cli
