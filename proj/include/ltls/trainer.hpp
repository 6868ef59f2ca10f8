#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ltls/dataio.hpp"
#include "ltls/edge_model.hpp"
#include "ltls/inference.hpp"
#include "ltls/trellis.hpp"

namespace ltls {

using Rng = std::mt19937_64;

// Uniform integer in [0, n) by rejection sampling; n > 0. Unlike
// std::uniform_int_distribution the sequence is fixed across standard
// library implementations.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

inline constexpr std::uint32_t kUnassigned = static_cast<std::uint32_t>(-1);

// Partial bijection between label ids and path indices, plus the pool of
// free paths with O(1) random draw and O(1) removal.
class AssignmentTable {
 public:
  AssignmentTable() = default;
  explicit AssignmentTable(std::uint32_t num_labels);
  // Rebuilds a table from label -> path entries (kUnassigned for none).
  static AssignmentTable from_label_paths(std::span<const std::uint32_t> label_to_path);

  std::uint32_t size() const { return static_cast<std::uint32_t>(label_to_path_.size()); }
  bool is_assigned(LabelId label) const { return label_to_path_.at(label) != kUnassigned; }
  std::optional<PathIndex> path_of(LabelId label) const;
  std::optional<LabelId> label_of(PathIndex path) const;
  bool is_free(PathIndex path) const { return path_to_label_.at(path) == kUnassigned; }
  std::size_t free_count() const { return free_paths_.size(); }
  std::size_t assigned_count() const { return size() - free_paths_.size(); }

  void assign(LabelId label, PathIndex path);
  PathIndex random_free_path(Rng& rng) const;

  std::span<const std::uint32_t> label_to_path() const { return label_to_path_; }

  // Throws IntegrityError if the maps and the free pool disagree.
  void audit() const;

  bool operator==(const AssignmentTable& other) const { return label_to_path_ == other.label_to_path_; }

 private:
  std::vector<std::uint32_t> label_to_path_;
  std::vector<std::uint32_t> path_to_label_;
  std::vector<PathIndex> free_paths_;
  std::vector<std::uint32_t> free_slot_;  // position of each path in free_paths_, kUnassigned if taken
};

enum class TrainMode : std::uint8_t {
  multiclass_rank = 0,
  multilabel_rank = 1,
  multiclass_softmax = 2,
};

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 10;
  // Top-m beam for label assignment; unset means ceil(log2 C).
  std::optional<std::uint32_t> assignment_beam;
  TrainMode mode = TrainMode::multiclass_rank;
  double l1_lambda = 0.0;
  std::uint64_t rng_seed = 1;
  // Visit examples in a fresh seeded permutation every epoch.
  bool shuffle = true;

  std::uint32_t beam_for(std::uint32_t num_labels) const;
  void validate() const;
};

std::uint32_t default_assignment_beam(std::uint32_t num_labels);

// Binds `label` to the best free path among the top-m for `scores`, or to a
// uniformly random free path when all of them are taken.
PathIndex assign_label(AssignmentTable& table, const Trellis& trellis, std::span<const double> scores,
                       LabelId label, std::uint32_t beam, Rng& rng);

double separation_ranking_loss(double lowest_positive, double highest_negative);

struct Violation {
  double loss = 0.0;
  ScoredPath positive;
  ScoredPath negative;
};

Violation find_violation_multiclass(const Trellis& trellis, std::span<const double> scores, PathIndex true_path);

// positive_paths must hold distinct indices, 1 <= size < C.
Violation find_violation_multilabel(const Trellis& trellis, std::span<const double> scores,
                                    std::span<const PathIndex> positive_paths);

struct TrainState {
  Trellis trellis;
  WeightMatrix weights;
  AssignmentTable table;

  TrainState(std::uint32_t num_labels, std::size_t num_features);
};

struct EpochStats {
  std::size_t examples_seen = 0;
  std::size_t violations = 0;
  std::size_t skipped = 0;
  double mean_loss = 0.0;
};

// One pass over `examples` in the given order (identity when empty).
EpochStats train_epoch(TrainState& state, std::span<const Example> examples, const TrainConfig& config, Rng& rng,
                       std::span<const std::size_t> order = {});

}  // namespace ltls
