#include "ltls/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ltls/error.hpp"

namespace ltls {

namespace {

// A partial path ending at some vertex. `key` is the sum of edge index
// increments along the prefix; at the sink it is the canonical path index.
// For two prefixes ending at the same vertex the key order agrees with the
// index order of any common completion, so truncating per-vertex lists by
// (score desc, key asc) is exact under the global tie-break rule.
struct Candidate {
  double score;
  PathIndex key;
};

bool better(const Candidate& a, const Candidate& b) {
  return a.score > b.score || (a.score == b.score && a.key < b.key);
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

}  // namespace

void check_edge_scores(const Trellis& trellis, std::span<const double> scores) {
  if (scores.size() != trellis.num_edges())
    throw InvalidArgument("expected " + std::to_string(trellis.num_edges()) + " edge scores, got " +
                          std::to_string(scores.size()));
  for (std::size_t e = 0; e < scores.size(); ++e)
    if (!std::isfinite(scores[e])) throw InvalidArgument("edge score " + std::to_string(e) + " is not finite");
}

double score_path(const Trellis& trellis, std::span<const double> scores, const Path& path) {
  double total = 0.0;
  for (EdgeIndex e : trellis.path_edges(path)) total += scores[e];
  return total;
}

double score_path(const Trellis& trellis, std::span<const double> scores, PathIndex index) {
  return score_path(trellis, scores, trellis.index_to_path(index));
}

ScoredPath viterbi_top1(const Trellis& trellis, std::span<const double> scores) {
  check_edge_scores(trellis, scores);
  constexpr double kUnreached = -std::numeric_limits<double>::infinity();
  const auto edges = trellis.edges();

  std::vector<Candidate> best(trellis.num_vertices(), Candidate{kUnreached, 0});
  std::vector<bool> reached(trellis.num_vertices(), false);
  best[trellis.source()] = {0.0, 0};
  reached[trellis.source()] = true;

  for (EdgeIndex e = 0; e < edges.size(); ++e) {
    const Candidate& from = best[edges[e].from];
    const Candidate cand{from.score + scores[e], from.key + trellis.edge_index_increment(e)};
    const VertexId to = edges[e].to;
    if (!reached[to] || better(cand, best[to])) {
      best[to] = cand;
      reached[to] = true;
    }
  }

  const Candidate& top = best[trellis.sink()];
  return {trellis.index_to_path(top.key), top.key, top.score};
}

std::vector<ScoredPath> viterbi_topk(const Trellis& trellis, std::span<const double> scores, std::size_t k) {
  if (k < 1 || k > trellis.num_labels())
    throw InvalidArgument("k = " + std::to_string(k) + " out of range [1, " + std::to_string(trellis.num_labels()) +
                          "]");
  check_edge_scores(trellis, scores);

  const auto edges = trellis.edges();
  std::vector<std::vector<Candidate>> lists(trellis.num_vertices());
  lists[trellis.source()].push_back({0.0, 0});

  auto finalize = [k](std::vector<Candidate>& list) {
    if (list.size() > k) {
      std::partial_sort(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(k), list.end(), better);
      list.resize(k);
    } else {
      std::sort(list.begin(), list.end(), better);
    }
  };

  VertexId current_tail = trellis.source();
  for (EdgeIndex e = 0; e < edges.size(); ++e) {
    const VertexId from = edges[e].from;
    if (from != current_tail) {
      // Edges are grouped by tail in topological order: every edge into
      // `from` has already been relaxed.
      finalize(lists[from]);
      current_tail = from;
    }
    const double h = scores[e];
    const PathIndex inc = trellis.edge_index_increment(e);
    auto& dst = lists[edges[e].to];
    for (const Candidate& c : lists[from]) dst.push_back({c.score + h, c.key + inc});
  }

  auto& sink = lists[trellis.sink()];
  finalize(sink);

  std::vector<ScoredPath> out;
  out.reserve(sink.size());
  for (const Candidate& c : sink) out.push_back({trellis.index_to_path(c.key), c.key, c.score});
  return out;
}

LogPartition forward_log_partition(const Trellis& trellis, std::span<const double> scores) {
  check_edge_scores(trellis, scores);
  constexpr double kLogZero = -std::numeric_limits<double>::infinity();
  const auto edges = trellis.edges();

  std::vector<double> alpha(trellis.num_vertices(), kLogZero);
  std::vector<double> beta(trellis.num_vertices(), kLogZero);
  alpha[trellis.source()] = 0.0;
  beta[trellis.sink()] = 0.0;

  for (EdgeIndex e = 0; e < edges.size(); ++e)
    alpha[edges[e].to] = log_add(alpha[edges[e].to], alpha[edges[e].from] + scores[e]);
  for (EdgeIndex e = static_cast<EdgeIndex>(edges.size()); e-- > 0;)
    beta[edges[e].from] = log_add(beta[edges[e].from], beta[edges[e].to] + scores[e]);

  LogPartition out;
  out.log_z = alpha[trellis.sink()];
  out.edge_marginals.resize(edges.size());
  for (EdgeIndex e = 0; e < edges.size(); ++e) {
    const double m = std::exp(alpha[edges[e].from] + scores[e] + beta[edges[e].to] - out.log_z);
    out.edge_marginals[e] = std::min(m, 1.0);
  }
  return out;
}

}  // namespace ltls
