#include "ltls/edge_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ltls/error.hpp"

namespace ltls {

SparseVector::SparseVector(std::vector<FeatureValue> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!std::isfinite(entries_[i].value))
      throw InvalidArgument("feature " + std::to_string(entries_[i].index) + " has a non-finite value");
    if (i > 0 && entries_[i].index <= entries_[i - 1].index) {
      if (entries_[i].index == entries_[i - 1].index)
        throw InvalidArgument("duplicate feature index " + std::to_string(entries_[i].index));
      throw InvalidArgument("feature indices are not ascending");
    }
  }
}

SparseVector SparseVector::from_unsorted(std::vector<FeatureValue> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const FeatureValue& a, const FeatureValue& b) { return a.index < b.index; });
  return SparseVector(std::move(entries));
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& f : entries_) s += f.value * f.value;
  return s;
}

void SparseVector::normalize() {
  const double norm = std::sqrt(squared_norm());
  if (norm == 0.0) return;
  for (auto& f : entries_) f.value /= norm;
}

std::size_t SparseVector::truncate(std::size_t bound) {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), bound,
                                   [](const FeatureValue& f, std::size_t b) { return f.index < b; });
  const auto dropped = static_cast<std::size_t>(entries_.end() - it);
  entries_.erase(it, entries_.end());
  return dropped;
}

WeightMatrix::WeightMatrix(std::size_t num_edges, std::size_t num_features)
    : num_edges_(num_edges),
      num_features_(num_features),
      current_(num_edges * num_features, 0.0),
      averaged_sum_(num_edges * num_features, 0.0),
      settled_at_(num_edges * num_features, 0) {}

WeightMatrix WeightMatrix::from_averaged(std::size_t num_edges, std::size_t num_features,
                                         std::span<const float> row_major) {
  if (row_major.size() != num_edges * num_features)
    throw InvalidArgument("weight buffer has " + std::to_string(row_major.size()) + " entries, expected " +
                          std::to_string(num_edges * num_features));
  WeightMatrix w(num_edges, num_features);
  for (std::size_t e = 0; e < num_edges; ++e)
    for (std::size_t j = 0; j < num_features; ++j) w.current_[w.slot(e, j)] = row_major[e * num_features + j];
  // One virtual update: averaged = (0 + current * 1) / 1 = current.
  w.update_count_ = 1;
  return w;
}

double WeightMatrix::averaged(std::size_t edge, std::size_t feature) const {
  const std::size_t s = slot(edge, feature);
  const double pending = current_[s] * static_cast<double>(update_count_ - settled_at_[s]);
  return (averaged_sum_[s] + pending) / static_cast<double>(std::max<std::uint64_t>(update_count_, 1));
}

std::vector<float> WeightMatrix::averaged_row_major_f32() const {
  std::vector<float> out(num_edges_ * num_features_);
  for (std::size_t e = 0; e < num_edges_; ++e)
    for (std::size_t j = 0; j < num_features_; ++j)
      out[e * num_features_ + j] = static_cast<float>(averaged(e, j));
  return out;
}

void WeightMatrix::begin_update() { ++update_count_; }

void WeightMatrix::add(std::size_t edge, std::size_t feature, double delta) {
  const std::size_t s = slot(edge, feature);
  // Settle iterates [settled_at + 1, update_count - 1], all of which saw the
  // pre-update value. The iterate of this update is the post-update value
  // and stays pending.
  const std::uint64_t before = update_count_ - 1;
  averaged_sum_[s] += current_[s] * static_cast<double>(before - settled_at_[s]);
  settled_at_[s] = before;
  current_[s] += delta;
}

double soft_threshold(double w, double lambda) {
  if (w > lambda) return w - lambda;
  if (w < -lambda) return w + lambda;
  return 0.0;
}

void edge_scores(const WeightMatrix& weights, const SparseVector& x, WeightView view, const Regularization& reg,
                 std::span<double> out) {
  const std::size_t E = weights.num_edges();
  if (out.size() != E)
    throw InvalidArgument("score buffer has " + std::to_string(out.size()) + " slots, expected " + std::to_string(E));
  if (x.dimension_bound() > weights.num_features())
    throw InvalidArgument("feature index " + std::to_string(x.dimension_bound() - 1) + " >= D = " +
                          std::to_string(weights.num_features()));
  std::fill(out.begin(), out.end(), 0.0);
  const double lambda = reg.l1_lambda;
  for (const auto& [j, v] : x) {
    for (std::size_t e = 0; e < E; ++e) {
      double w = view == WeightView::averaged ? weights.averaged(e, j) : weights.current(e, j);
      if (lambda > 0.0) w = soft_threshold(w, lambda);
      out[e] += w * v;
    }
  }
}

EdgeScores edge_scores(const WeightMatrix& weights, const SparseVector& x, WeightView view,
                       const Regularization& reg) {
  EdgeScores out(weights.num_edges());
  edge_scores(weights, x, view, reg, out);
  return out;
}

std::pair<std::vector<EdgeIndex>, std::vector<EdgeIndex>> edge_symmetric_difference(std::span<const EdgeIndex> a,
                                                                                     std::span<const EdgeIndex> b) {
  std::pair<std::vector<EdgeIndex>, std::vector<EdgeIndex>> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out.first));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(out.second));
  return out;
}

void apply_rank_update(WeightMatrix& weights, const SparseVector& x, std::span<const EdgeIndex> positive_edges,
                       std::span<const EdgeIndex> negative_edges, double lr) {
  if (!(lr > 0.0)) throw InvalidArgument("learning rate must be positive");
  const auto [pos_only, neg_only] = edge_symmetric_difference(positive_edges, negative_edges);
  weights.begin_update();
  for (const auto& [j, v] : x) {
    const double step = lr * v;
    for (EdgeIndex e : pos_only) weights.add(e, j, step);
    for (EdgeIndex e : neg_only) weights.add(e, j, -step);
  }
}

void apply_marginal_update(WeightMatrix& weights, const SparseVector& x, std::span<const double> edge_marginals,
                           std::span<const EdgeIndex> true_path_edges, double lr) {
  if (!(lr > 0.0)) throw InvalidArgument("learning rate must be positive");
  const std::size_t E = weights.num_edges();
  if (edge_marginals.size() != E) throw InvalidArgument("marginal vector does not match the edge count");
  std::vector<double> grad(edge_marginals.begin(), edge_marginals.end());
  for (EdgeIndex e : true_path_edges) grad[e] -= 1.0;

  weights.begin_update();
  for (const auto& [j, v] : x) {
    for (std::size_t e = 0; e < E; ++e)
      if (grad[e] != 0.0) weights.add(e, j, -lr * grad[e] * v);
  }
}

}  // namespace ltls
