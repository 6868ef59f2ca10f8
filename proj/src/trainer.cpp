#include "ltls/trainer.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <string>

#include "ltls/error.hpp"

namespace ltls {

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) throw InvalidArgument("uniform_below needs n > 0");
  // 2^64 mod n; draws below it would bias the low residues.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % n;
  }
}

AssignmentTable::AssignmentTable(std::uint32_t num_labels)
    : label_to_path_(num_labels, kUnassigned),
      path_to_label_(num_labels, kUnassigned),
      free_paths_(num_labels),
      free_slot_(num_labels) {
  std::iota(free_paths_.begin(), free_paths_.end(), PathIndex{0});
  std::iota(free_slot_.begin(), free_slot_.end(), std::uint32_t{0});
}

AssignmentTable AssignmentTable::from_label_paths(std::span<const std::uint32_t> label_to_path) {
  AssignmentTable t(static_cast<std::uint32_t>(label_to_path.size()));
  for (LabelId l = 0; l < label_to_path.size(); ++l) {
    if (label_to_path[l] == kUnassigned) continue;
    if (label_to_path[l] >= t.size())
      throw IntegrityError("label " + std::to_string(l) + " maps to path " + std::to_string(label_to_path[l]) +
                           " outside [0, " + std::to_string(t.size()) + ")");
    if (!t.is_free(label_to_path[l]))
      throw IntegrityError("path " + std::to_string(label_to_path[l]) + " is assigned to two labels");
    t.assign(l, label_to_path[l]);
  }
  return t;
}

std::optional<PathIndex> AssignmentTable::path_of(LabelId label) const {
  const auto p = label_to_path_.at(label);
  if (p == kUnassigned) return std::nullopt;
  return p;
}

std::optional<LabelId> AssignmentTable::label_of(PathIndex path) const {
  const auto l = path_to_label_.at(path);
  if (l == kUnassigned) return std::nullopt;
  return l;
}

void AssignmentTable::assign(LabelId label, PathIndex path) {
  if (label >= size() || path >= size())
    throw InvalidArgument("label " + std::to_string(label) + " or path " + std::to_string(path) + " out of range");
  if (is_assigned(label)) throw InvalidArgument("label " + std::to_string(label) + " is already assigned");
  if (!is_free(path)) throw InvalidArgument("path " + std::to_string(path) + " is already taken");

  label_to_path_[label] = path;
  path_to_label_[path] = label;

  const std::uint32_t slot = free_slot_[path];
  const PathIndex moved = free_paths_.back();
  free_paths_[slot] = moved;
  free_slot_[moved] = slot;
  free_paths_.pop_back();
  free_slot_[path] = kUnassigned;
}

PathIndex AssignmentTable::random_free_path(Rng& rng) const {
  if (free_paths_.empty()) throw CapacityError("no free paths left");
  return free_paths_[uniform_below(rng, free_paths_.size())];
}

void AssignmentTable::audit() const {
  const std::size_t n = label_to_path_.size();
  if (path_to_label_.size() != n || free_slot_.size() != n)
    throw IntegrityError("assignment table arrays have inconsistent sizes");
  std::size_t assigned = 0;
  for (LabelId l = 0; l < n; ++l) {
    const auto p = label_to_path_[l];
    if (p == kUnassigned) continue;
    ++assigned;
    if (p >= n || path_to_label_[p] != l) throw IntegrityError("label->path and path->label disagree");
  }
  for (PathIndex p = 0; p < n; ++p) {
    const auto l = path_to_label_[p];
    const bool listed_free = free_slot_[p] != kUnassigned;
    if (l == kUnassigned) {
      if (!listed_free || free_slot_[p] >= free_paths_.size() || free_paths_[free_slot_[p]] != p)
        throw IntegrityError("free path " + std::to_string(p) + " missing from the pool");
    } else {
      if (listed_free) throw IntegrityError("taken path " + std::to_string(p) + " still in the free pool");
      if (l >= n || label_to_path_[l] != p) throw IntegrityError("path->label and label->path disagree");
    }
  }
  if (assigned + free_paths_.size() != n) throw IntegrityError("assigned + free != C");
}

std::uint32_t default_assignment_beam(std::uint32_t num_labels) {
  // ceil(log2 C)
  return static_cast<std::uint32_t>(std::bit_width(num_labels - 1U));
}

std::uint32_t TrainConfig::beam_for(std::uint32_t num_labels) const {
  const std::uint32_t m = assignment_beam.value_or(default_assignment_beam(num_labels));
  return std::clamp<std::uint32_t>(m, 1, num_labels);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be > 0");
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (assignment_beam && *assignment_beam < 1) throw InvalidArgument("assignment beam must be >= 1");
  if (!(l1_lambda >= 0.0)) throw InvalidArgument("l1 lambda must be >= 0");
}

PathIndex assign_label(AssignmentTable& table, const Trellis& trellis, std::span<const double> scores,
                       LabelId label, std::uint32_t beam, Rng& rng) {
  if (label >= table.size())
    throw CapacityError("label id " + std::to_string(label) + " does not fit in a table of " +
                        std::to_string(table.size()) + " labels");
  if (table.is_assigned(label)) throw InvalidArgument("label " + std::to_string(label) + " is already assigned");
  if (table.free_count() == 0)
    throw CapacityError("label " + std::to_string(label) + " has no free path left (C = " +
                        std::to_string(trellis.num_labels()) + ")");
  const std::size_t m = std::clamp<std::size_t>(beam, 1, trellis.num_labels());
  for (const ScoredPath& sp : viterbi_topk(trellis, scores, m)) {
    if (table.is_free(sp.index)) {
      table.assign(label, sp.index);
      return sp.index;
    }
  }
  const PathIndex p = table.random_free_path(rng);
  table.assign(label, p);
  return p;
}

double separation_ranking_loss(double lowest_positive, double highest_negative) {
  return std::max(0.0, 1.0 + highest_negative - lowest_positive);
}

Violation find_violation_multiclass(const Trellis& trellis, std::span<const double> scores, PathIndex true_path) {
  const Path truth = trellis.index_to_path(true_path);
  Violation v;
  v.positive = {truth, true_path, score_path(trellis, scores, truth)};
  for (const ScoredPath& sp : viterbi_topk(trellis, scores, 2)) {
    if (sp.index != true_path) {
      v.negative = sp;
      break;
    }
  }
  v.loss = separation_ranking_loss(v.positive.score, v.negative.score);
  return v;
}

Violation find_violation_multilabel(const Trellis& trellis, std::span<const double> scores,
                                    std::span<const PathIndex> positive_paths) {
  if (positive_paths.empty()) throw InvalidArgument("multilabel violation needs at least one positive path");
  if (positive_paths.size() >= trellis.num_labels())
    throw InvalidArgument("every path is positive; there is no negative to separate");

  std::vector<PathIndex> positives(positive_paths.begin(), positive_paths.end());
  std::sort(positives.begin(), positives.end());
  if (std::adjacent_find(positives.begin(), positives.end()) != positives.end())
    throw InvalidArgument("positive paths must be distinct");

  Violation v;
  bool have_positive = false;
  for (PathIndex p : positives) {
    const Path path = trellis.index_to_path(p);
    const double s = score_path(trellis, scores, path);
    // Ascending iteration keeps the smallest index among equal minima.
    if (!have_positive || s < v.positive.score) {
      v.positive = {path, p, s};
      have_positive = true;
    }
  }
  // At most |P| of the top |P|+1 paths are positive.
  for (const ScoredPath& sp : viterbi_topk(trellis, scores, positives.size() + 1)) {
    if (!std::binary_search(positives.begin(), positives.end(), sp.index)) {
      v.negative = sp;
      break;
    }
  }
  v.loss = separation_ranking_loss(v.positive.score, v.negative.score);
  return v;
}

TrainState::TrainState(std::uint32_t num_labels, std::size_t num_features)
    : trellis(num_labels), weights(trellis.num_edges(), num_features), table(num_labels) {}

EpochStats train_epoch(TrainState& state, std::span<const Example> examples, const TrainConfig& config, Rng& rng,
                       std::span<const std::size_t> order) {
  config.validate();
  if (!order.empty() && order.size() != examples.size())
    throw InvalidArgument("visit order does not cover the dataset");

  const Trellis& trellis = state.trellis;
  const std::uint32_t beam = config.beam_for(trellis.num_labels());
  const double lr = config.learning_rate;

  EpochStats stats;
  double loss_sum = 0.0;
  EdgeScores scores(trellis.num_edges());
  std::vector<EdgeIndex> pos_edges;
  std::vector<EdgeIndex> neg_edges;
  std::vector<PathIndex> positives;

  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& ex = examples[order.empty() ? i : order[i]];
    if (ex.labels.empty()) {
      ++stats.skipped;
      continue;
    }
    if (config.mode != TrainMode::multilabel_rank && ex.labels.size() != 1)
      throw InvalidArgument("multiclass training example carries " + std::to_string(ex.labels.size()) + " labels");
    if (ex.labels.size() >= trellis.num_labels()) {
      ++stats.skipped;
      continue;
    }

    edge_scores(state.weights, ex.features, WeightView::current, {}, scores);
    for (LabelId l : ex.labels)
      if (l >= state.table.size() || !state.table.is_assigned(l)) assign_label(state.table, trellis, scores, l, beam, rng);

    ++stats.examples_seen;
    if (config.mode == TrainMode::multiclass_softmax) {
      const PathIndex truth = *state.table.path_of(ex.labels.front());
      const LogPartition lp = forward_log_partition(trellis, scores);
      const Path true_path = trellis.index_to_path(truth);
      loss_sum += lp.log_z - score_path(trellis, scores, true_path);
      if (viterbi_top1(trellis, scores).index != truth) ++stats.violations;
      trellis.path_edges(true_path, pos_edges);
      apply_marginal_update(state.weights, ex.features, lp.edge_marginals, pos_edges, lr);
      continue;
    }

    Violation v;
    if (config.mode == TrainMode::multiclass_rank) {
      v = find_violation_multiclass(trellis, scores, *state.table.path_of(ex.labels.front()));
    } else {
      positives.clear();
      for (LabelId l : ex.labels) positives.push_back(*state.table.path_of(l));
      v = find_violation_multilabel(trellis, scores, positives);
    }
    loss_sum += v.loss;
    if (v.loss > 0.0) {
      ++stats.violations;
      trellis.path_edges(v.positive.path, pos_edges);
      trellis.path_edges(v.negative.path, neg_edges);
      apply_rank_update(state.weights, ex.features, pos_edges, neg_edges, lr);
    }
  }
  stats.mean_loss = stats.examples_seen ? loss_sum / static_cast<double>(stats.examples_seen) : 0.0;
  return stats;
}

}  // namespace ltls
