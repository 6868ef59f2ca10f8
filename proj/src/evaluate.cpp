#include "ltls/evaluate.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>

#include "json.hpp"

#include "ltls/error.hpp"
#include "ltls/inference.hpp"

namespace ltls {

Prediction predict_topk(const Trellis& trellis, std::span<const double> scores, const AssignmentTable& table,
                        std::size_t k) {
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (table.assigned_count() < k)
    throw InvalidArgument("requested top-" + std::to_string(k) + " but only " +
                          std::to_string(table.assigned_count()) + " labels are assigned");

  const std::size_t C = trellis.num_labels();
  std::size_t width = std::min(k, C);
  for (;;) {
    const auto paths = viterbi_topk(trellis, scores, width);
    Prediction pred;
    for (const ScoredPath& sp : paths) {
      if (const auto label = table.label_of(sp.index)) {
        pred.labels.push_back(*label);
        pred.scores.push_back(sp.score);
        if (pred.labels.size() == k) return pred;
      }
    }
    // Unreachable once width == C because at least k labels are assigned.
    if (width == C) throw IntegrityError("assignment table lost labels during prediction");
    width = std::min(2 * width, C);
  }
}

Prediction predict_topk(const Trellis& trellis, const WeightMatrix& weights, const AssignmentTable& table,
                        const SparseVector& x, std::size_t k, const Regularization& reg, WeightView view) {
  const EdgeScores scores = edge_scores(weights, x, view, reg);
  return predict_topk(trellis, scores, table, k);
}

double precision_at_k(std::span<const Prediction> predictions, std::span<const std::vector<LabelId>> gold,
                      std::size_t k) {
  if (predictions.size() != gold.size())
    throw InvalidArgument("predictions (" + std::to_string(predictions.size()) + ") and gold sets (" +
                          std::to_string(gold.size()) + ") differ in length");
  if (k < 1) throw InvalidArgument("k must be >= 1");
  if (predictions.empty()) return 0.0;

  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& labels = predictions[i].labels;
    const std::size_t n = std::min(k, labels.size());
    std::size_t hits = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (std::find(gold[i].begin(), gold[i].end(), labels[j]) != gold[i].end()) ++hits;
    total += static_cast<double>(hits) / static_cast<double>(k);
  }
  return total / static_cast<double>(predictions.size());
}

double oracle_top_frequent(std::span<const std::vector<LabelId>> train_labels,
                           std::span<const std::vector<LabelId>> test_labels, std::size_t num_top) {
  if (num_top < 1) throw InvalidArgument("number of frequent labels must be >= 1");
  if (test_labels.empty()) return 0.0;

  LabelId max_label = 0;
  for (const auto& set : train_labels)
    for (LabelId l : set) max_label = std::max(max_label, l);
  std::vector<std::size_t> counts(train_labels.empty() ? 0 : max_label + std::size_t{1}, 0);
  for (const auto& set : train_labels)
    for (LabelId l : set) ++counts[l];

  std::vector<LabelId> order;
  for (LabelId l = 0; l < counts.size(); ++l)
    if (counts[l] > 0) order.push_back(l);
  std::stable_sort(order.begin(), order.end(), [&](LabelId a, LabelId b) { return counts[a] > counts[b]; });
  order.resize(std::min(order.size(), num_top));

  std::vector<bool> top(counts.size(), false);
  for (LabelId l : order) top[l] = true;

  std::size_t covered = 0;
  for (const auto& set : test_labels) {
    const bool hit = std::any_of(set.begin(), set.end(), [&](LabelId l) { return l < top.size() && top[l]; });
    covered += hit ? 1 : 0;
  }
  return static_cast<double>(covered) / static_cast<double>(test_labels.size());
}

std::size_t evaluation_threads() {
  if (const char* env = std::getenv("LTLS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<Prediction> predict_all(const Trellis& trellis, const WeightMatrix& weights,
                                    const AssignmentTable& table, std::span<const Example> examples, std::size_t k,
                                    const Regularization& reg, std::size_t threads) {
  std::vector<Prediction> out(examples.size());
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(examples.size(), 1));

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = predict_topk(trellis, weights, table, examples[i].features, k, reg);
  };
  if (threads == 1) {
    work(0, examples.size());
    return out;
  }

  // Workers write disjoint slices of `out`; an exception in any of them is
  // rethrown after all have joined.
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (examples.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t begin = std::min(t * chunk, examples.size());
      const std::size_t end = std::min(begin + chunk, examples.size());
      pool.emplace_back([&, t, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::string MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  for (const auto& [k, p] : precision) {
    const std::string key = "precision@" + std::to_string(k);
    if (p) j[key] = *p;
    else j[key] = nullptr;
  }
  j["prediction_time_s"] = prediction_time_s;
  j["model_size_bytes"] = model_size_bytes;
  j["num_edges"] = num_edges;
  j["num_examples"] = num_examples;
  return j.dump();
}

std::string MetricsReport::to_table() const {
  std::ostringstream os;
  os << std::left;
  for (const auto& [k, p] : precision) {
    os << std::setw(22) << ("precision@" + std::to_string(k));
    if (p) os << std::fixed << std::setprecision(4) << *p << '\n';
    else os << "n/a\n";
  }
  os << std::setw(22) << "prediction time [s]" << std::fixed << std::setprecision(3) << prediction_time_s << '\n';
  os << std::setw(22) << "model size [bytes]" << model_size_bytes << '\n';
  os << std::setw(22) << "edges" << num_edges << '\n';
  os << std::setw(22) << "examples" << num_examples << '\n';
  return os.str();
}

}  // namespace ltls
