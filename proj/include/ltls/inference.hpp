#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ltls/trellis.hpp"

namespace ltls {

// Per-edge scores h(w, x), one entry per trellis edge.
using EdgeScores = std::vector<double>;

struct ScoredPath {
  Path path;
  PathIndex index = 0;
  double score = 0.0;
};

struct LogPartition {
  double log_z = 0.0;
  std::vector<double> edge_marginals;
};

// Sum of edge scores along the path, accumulated in source->sink order.
double score_path(const Trellis& trellis, std::span<const double> scores, const Path& path);
double score_path(const Trellis& trellis, std::span<const double> scores, PathIndex index);

// Highest scoring path. Ties go to the smaller canonical path index.
ScoredPath viterbi_top1(const Trellis& trellis, std::span<const double> scores);

// The k highest scoring paths in descending score order, ties by ascending
// index. Exact for every k in [1, C].
std::vector<ScoredPath> viterbi_topk(const Trellis& trellis, std::span<const double> scores, std::size_t k);

// log sum_s exp(F(s)) and its gradient with respect to every edge score.
LogPartition forward_log_partition(const Trellis& trellis, std::span<const double> scores);

// Throws InvalidArgument on a size mismatch or a non-finite entry.
void check_edge_scores(const Trellis& trellis, std::span<const double> scores);

}  // namespace ltls
