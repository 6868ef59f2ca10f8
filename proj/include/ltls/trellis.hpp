#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ltls {

using VertexId = std::uint32_t;
using EdgeIndex = std::uint32_t;
using PathIndex = std::uint32_t;

inline constexpr EdgeIndex kNoEdge = static_cast<EdgeIndex>(-1);

struct Edge {
  VertexId from;
  VertexId to;
  bool operator==(const Edge&) const = default;
};

// One source->sink path in canonical form.
//
// exit_step == 0 selects the auxiliary exit (all b steps are free). Otherwise
// the path leaves through the early-exit edge attached to the top state of
// step `exit_step`; steps 1..exit_step-1 are free and the state at exit_step
// is fixed to top. Bit i-1 of state_bits is the state taken at step i
// (0 = top, 1 = bottom).
struct Path {
  std::uint32_t exit_step = 0;
  std::uint32_t state_bits = 0;

  static constexpr Path aux(std::uint32_t bits) { return {0, bits}; }
  static constexpr Path early(std::uint32_t step, std::uint32_t bits) { return {step, bits}; }

  constexpr bool is_aux_exit() const { return exit_step == 0; }

  auto operator<=>(const Path&) const = default;
};

// The LTLS trellis: a layered DAG with exactly C source->sink paths.
//
// Vertex layout: source = 0; the two states of step t (1-based) are 2t-1
// (top) and 2t (bottom); auxiliary = 2b+1; sink = 2b+2. Edges are ordered by
// tail vertex, so every edge into a vertex precedes every edge out of it and
// a single forward sweep over edges() is a valid DP order. Within a state the
// early-exit edge (if any) comes first, then top, then bottom successor.
class Trellis {
 public:
  static constexpr std::uint64_t kMaxLabels = std::uint64_t{1} << 31;

  explicit Trellis(std::uint64_t num_labels);

  std::uint32_t num_labels() const { return num_labels_; }
  std::uint32_t num_steps() const { return num_steps_; }
  std::uint32_t num_edges() const { return static_cast<std::uint32_t>(edges_.size()); }
  std::uint32_t num_vertices() const { return 2 * num_steps_ + 3; }

  std::span<const Edge> edges() const { return edges_; }
  std::span<const std::uint32_t> sink_steps() const { return sink_steps_; }
  // One entry per exit point: early exits by ascending step, then the
  // auxiliary exit.
  std::span<const PathIndex> block_offsets() const { return block_offsets_; }

  VertexId source() const { return 0; }
  VertexId aux() const { return 2 * num_steps_ + 1; }
  VertexId sink() const { return 2 * num_steps_ + 2; }
  VertexId state_vertex(std::uint32_t step, std::uint32_t state) const { return 2 * step - 1 + state; }

  EdgeIndex source_edge(std::uint32_t state) const { return source_edges_[state]; }
  // Edge from `from_state` at `step` to `to_state` at step+1, step in [1, b).
  EdgeIndex transition_edge(std::uint32_t step, std::uint32_t from_state, std::uint32_t to_state) const {
    return transition_edges_[4 * (step - 1) + 2 * from_state + to_state];
  }
  EdgeIndex aux_edge(std::uint32_t state) const { return aux_edges_[state]; }
  EdgeIndex aux_sink_edge() const { return aux_sink_edge_; }
  std::optional<EdgeIndex> exit_edge(std::uint32_t step) const;

  // Path index of a path equals the sum of this value over its edges.
  PathIndex edge_index_increment(EdgeIndex e) const { return index_increment_[e]; }

  bool is_sink_step(std::uint32_t step) const;
  bool is_valid(const Path& path) const;

  Path index_to_path(PathIndex index) const;
  PathIndex path_to_index(const Path& path) const;

  std::vector<EdgeIndex> path_edges(const Path& path) const;
  void path_edges(const Path& path, std::vector<EdgeIndex>& out) const;
  std::size_t path_length(const Path& path) const;

 private:
  std::uint32_t block_of(const Path& path) const;

  std::uint32_t num_labels_;
  std::uint32_t num_steps_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> sink_steps_;
  std::vector<PathIndex> block_offsets_;
  std::vector<PathIndex> index_increment_;

  EdgeIndex source_edges_[2]{};
  std::vector<EdgeIndex> transition_edges_;
  EdgeIndex aux_edges_[2]{};
  EdgeIndex aux_sink_edge_ = 0;
  // exit_edges_[t] for t in [0, b]; kNoEdge when t is not a sink step.
  std::vector<EdgeIndex> exit_edges_;
};

Trellis build_trellis(std::uint64_t num_labels);

// Closed form for the edge count: 4b + 1 + popcount(C - 2^b).
std::uint32_t expected_edge_count(std::uint64_t num_labels);

// Dense C x E 0/1 matrix whose row i indicates the edges of path i. Test and
// oracle use only.
struct PathMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> data;

  std::uint8_t operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const std::uint8_t> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

inline constexpr std::size_t kDefaultPathMatrixCap = std::size_t{1} << 16;

PathMatrix materialize_path_matrix(const Trellis& trellis, std::size_t max_labels = kDefaultPathMatrixCap);

}  // namespace ltls
