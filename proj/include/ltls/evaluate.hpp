#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ltls/dataio.hpp"
#include "ltls/edge_model.hpp"
#include "ltls/trainer.hpp"
#include "ltls/trellis.hpp"

namespace ltls {

struct Prediction {
  std::vector<LabelId> labels;  // descending score
  std::vector<double> scores;
};

// Top-k assigned labels for x. Decodes k, 2k, 4k, ... paths (capped at C)
// until k of them carry a label; free paths are skipped.
Prediction predict_topk(const Trellis& trellis, const WeightMatrix& weights, const AssignmentTable& table,
                        const SparseVector& x, std::size_t k, const Regularization& reg = {},
                        WeightView view = WeightView::averaged);

// Same as above with precomputed edge scores.
Prediction predict_topk(const Trellis& trellis, std::span<const double> scores, const AssignmentTable& table,
                        std::size_t k);

// Mean over examples of |top-k ∩ gold| / k.
double precision_at_k(std::span<const Prediction> predictions, std::span<const std::vector<LabelId>> gold,
                      std::size_t k);

// Fraction of test examples whose gold set meets the `num_top` most frequent
// training labels (frequency ties go to the smaller id). 0 for an empty test set.
double oracle_top_frequent(std::span<const std::vector<LabelId>> train_labels,
                           std::span<const std::vector<LabelId>> test_labels, std::size_t num_top);

// Worker count for evaluation: LTLS_THREADS when set and positive, otherwise
// the hardware concurrency.
std::size_t evaluation_threads();

// Predicts every example, splitting the work over `threads` workers.
std::vector<Prediction> predict_all(const Trellis& trellis, const WeightMatrix& weights,
                                    const AssignmentTable& table, std::span<const Example> examples, std::size_t k,
                                    const Regularization& reg, std::size_t threads);

struct MetricsReport {
  std::size_t num_examples = 0;
  std::size_t num_edges = 0;
  std::size_t model_size_bytes = 0;
  double prediction_time_s = 0.0;
  // Keyed by k; nullopt when undefined (no examples, or k above the number
  // of assigned labels).
  std::vector<std::pair<std::size_t, std::optional<double>>> precision;

  std::string to_json() const;
  std::string to_table() const;
};

}  // namespace ltls
