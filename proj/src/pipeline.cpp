#include "ltls/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <string>

#include "ltls/error.hpp"

namespace ltls {

namespace {
using Clock = std::chrono::steady_clock;
}

LabelMode label_mode(TrainMode mode) {
  return mode == TrainMode::multilabel_rank ? LabelMode::multilabel : LabelMode::multiclass;
}

Model train_model(Dataset data, const TrainConfig& config, std::ostream* log) {
  config.validate();
  const std::size_t C = data.dict.size();
  if (C < 2) throw InvalidArgument("training data has " + std::to_string(C) + " distinct labels, need at least 2");
  if (C > Trellis::kMaxLabels) throw CapacityError("too many labels: " + std::to_string(C));
  if (data.num_features == 0) throw InvalidArgument("training data has no features");

  TrainState state(static_cast<std::uint32_t>(C), data.num_features);
  if (log)
    *log << "ltls: C=" << C << " D=" << data.num_features << " E=" << state.trellis.num_edges()
         << " examples=" << data.examples.size() << '\n';

  Rng rng(config.rng_seed);
  std::vector<std::size_t> order(data.examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle)
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
    const auto start = Clock::now();
    const EpochStats s = train_epoch(state, data.examples, config, rng, order);
    const std::chrono::duration<double> took = Clock::now() - start;
    if (log)
      *log << "epoch " << epoch << '/' << config.epochs << ": examples=" << s.examples_seen
           << " violations=" << s.violations << " skipped=" << s.skipped << " mean_loss=" << std::setprecision(6)
           << s.mean_loss << " assigned=" << state.table.assigned_count() << " time=" << std::setprecision(3)
           << took.count() << "s\n";
  }

  Model model;
  model.mode = config.mode;
  model.dict = std::move(data.dict);
  model.trellis = std::move(state.trellis);
  model.weights = std::move(state.weights);
  model.table = std::move(state.table);
  model.l1_lambda = config.l1_lambda;
  return model;
}

MetricsReport evaluate_model(const Model& model, const Dataset& data, std::vector<std::size_t> ks,
                             std::size_t threads) {
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.empty() || ks.front() < 1) throw InvalidArgument("precision cut-offs must be >= 1");
  const std::size_t depth = std::min(ks.back(), model.table.assigned_count());

  MetricsReport report;
  report.num_examples = data.examples.size();
  report.num_edges = model.trellis.num_edges();

  std::vector<Prediction> preds;
  if (!data.examples.empty() && depth > 0) {
    const auto start = Clock::now();
    preds = predict_all(model.trellis, model.weights, model.table, data.examples, depth, {model.l1_lambda}, threads);
    report.prediction_time_s = std::chrono::duration<double>(Clock::now() - start).count();
  }

  std::vector<std::vector<LabelId>> gold;
  gold.reserve(data.examples.size());
  for (const auto& ex : data.examples) gold.push_back(ex.labels);
  for (std::size_t k : ks) {
    std::optional<double> p;
    if (!preds.empty() && k <= depth) p = precision_at_k(preds, gold, k);
    report.precision.emplace_back(k, p);
  }
  return report;
}

}  // namespace ltls
