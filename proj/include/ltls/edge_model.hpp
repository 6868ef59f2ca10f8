#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ltls/inference.hpp"
#include "ltls/trellis.hpp"

namespace ltls {

using FeatureIndex = std::uint32_t;

struct FeatureValue {
  FeatureIndex index;
  double value;
  bool operator==(const FeatureValue&) const = default;
};

// Sparse input vector with strictly ascending indices and finite values.
class SparseVector {
 public:
  SparseVector() = default;
  // Throws InvalidArgument unless indices are strictly ascending and values finite.
  explicit SparseVector(std::vector<FeatureValue> entries);
  // Sorts first; duplicate indices are still rejected.
  static SparseVector from_unsorted(std::vector<FeatureValue> entries);

  std::span<const FeatureValue> entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  // One past the largest index, 0 when empty.
  std::size_t dimension_bound() const { return entries_.empty() ? 0 : entries_.back().index + std::size_t{1}; }

  double squared_norm() const;
  // Scales to unit L2 norm; a zero vector is left unchanged.
  void normalize();
  // Drops entries with index >= bound, returning how many were dropped.
  std::size_t truncate(std::size_t bound);

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<FeatureValue> entries_;
};

struct Regularization {
  double l1_lambda = 0.0;
};

enum class WeightView { current, averaged };

// E x D linear edge models with lazily maintained Polyak averages.
//
// The averaged weights equal averaged_sum / max(update_count, 1), where
// averaged_sum accumulates the current matrix after every update. Only the
// touched coordinates are brought up to date: each coordinate remembers the
// update count at which its running sum was last settled, and the untouched
// stretch is added as current * (elapsed updates).
//
// Storage is feature-major (D x E) so all edge weights of one feature are
// contiguous.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  WeightMatrix(std::size_t num_edges, std::size_t num_features);

  // Frozen model whose current and averaged weights both equal `row_major`
  // (E x D, row e = w_e). Used for loaded models.
  static WeightMatrix from_averaged(std::size_t num_edges, std::size_t num_features,
                                    std::span<const float> row_major);

  std::size_t num_edges() const { return num_edges_; }
  std::size_t num_features() const { return num_features_; }
  std::uint64_t update_count() const { return update_count_; }

  double current(std::size_t edge, std::size_t feature) const { return current_[slot(edge, feature)]; }
  double averaged(std::size_t edge, std::size_t feature) const;

  // Row-major E x D copy of the averaged weights at 32-bit precision.
  std::vector<float> averaged_row_major_f32() const;

  // Starts a new update: bumps update_count. Every add() until the next
  // begin_update() belongs to this update.
  void begin_update();
  void add(std::size_t edge, std::size_t feature, double delta);

 private:
  std::size_t slot(std::size_t edge, std::size_t feature) const { return feature * num_edges_ + edge; }

  std::size_t num_edges_ = 0;
  std::size_t num_features_ = 0;
  std::uint64_t update_count_ = 0;
  std::vector<double> current_;
  std::vector<double> averaged_sum_;
  std::vector<std::uint64_t> settled_at_;
};

double soft_threshold(double w, double lambda);

// values[e] = st(w_e, lambda) . x
EdgeScores edge_scores(const WeightMatrix& weights, const SparseVector& x, WeightView view = WeightView::current,
                       const Regularization& reg = {});
void edge_scores(const WeightMatrix& weights, const SparseVector& x, WeightView view, const Regularization& reg,
                 std::span<double> out);

// Separation-ranking SGD step: +lr*x on edges only in `positive_edges`,
// -lr*x on edges only in `negative_edges`. Both lists must be sorted
// ascending (path_edges output is).
void apply_rank_update(WeightMatrix& weights, const SparseVector& x, std::span<const EdgeIndex> positive_edges,
                       std::span<const EdgeIndex> negative_edges, double lr);

// Cross-entropy step: w_e -= lr * (mu_e - [e in true path]) * x.
void apply_marginal_update(WeightMatrix& weights, const SparseVector& x, std::span<const double> edge_marginals,
                           std::span<const EdgeIndex> true_path_edges, double lr);

// Sorted symmetric difference split into (only in a, only in b).
std::pair<std::vector<EdgeIndex>, std::vector<EdgeIndex>> edge_symmetric_difference(std::span<const EdgeIndex> a,
                                                                                     std::span<const EdgeIndex> b);

}  // namespace ltls
