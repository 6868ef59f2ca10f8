#include "ltls/trellis.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "ltls/error.hpp"

namespace ltls {

namespace {

std::uint32_t floor_log2(std::uint64_t v) { return static_cast<std::uint32_t>(std::bit_width(v) - 1); }

}  // namespace

std::uint32_t expected_edge_count(std::uint64_t num_labels) {
  if (num_labels < 2) throw InvalidArgument("number of labels must be at least 2, got " + std::to_string(num_labels));
  const std::uint32_t b = floor_log2(num_labels);
  const std::uint64_t rest = num_labels - (std::uint64_t{1} << b);
  return 4 * b + 1 + static_cast<std::uint32_t>(std::popcount(rest));
}

Trellis::Trellis(std::uint64_t num_labels) {
  if (num_labels < 2) throw InvalidArgument("number of labels must be at least 2, got " + std::to_string(num_labels));
  if (num_labels > kMaxLabels)
    throw InvalidArgument("number of labels " + std::to_string(num_labels) + " exceeds the supported maximum 2^31");

  num_labels_ = static_cast<std::uint32_t>(num_labels);
  num_steps_ = floor_log2(num_labels);
  const std::uint32_t b = num_steps_;
  const std::uint64_t rest = num_labels - (std::uint64_t{1} << b);

  exit_edges_.assign(b + 1, kNoEdge);
  for (std::uint32_t j = 0; j < b; ++j)
    if ((rest >> j) & 1U) sink_steps_.push_back(j + 1);

  PathIndex offset = 0;
  std::vector<PathIndex> exit_offset(b + 1, 0);
  for (std::uint32_t t : sink_steps_) {
    exit_offset[t] = offset;
    block_offsets_.push_back(offset);
    offset += PathIndex{1} << (t - 1);
  }
  const PathIndex aux_offset = offset;
  block_offsets_.push_back(aux_offset);

  transition_edges_.assign(b > 0 ? 4 * (b - 1) : 0, kNoEdge);
  edges_.reserve(expected_edge_count(num_labels));

  auto add = [&](VertexId from, VertexId to, PathIndex increment) {
    edges_.push_back({from, to});
    index_increment_.push_back(increment);
    return static_cast<EdgeIndex>(edges_.size() - 1);
  };

  for (std::uint32_t s = 0; s < 2; ++s) source_edges_[s] = add(source(), state_vertex(1, s), s);

  for (std::uint32_t t = 1; t <= b; ++t) {
    for (std::uint32_t s = 0; s < 2; ++s) {
      const VertexId v = state_vertex(t, s);
      if (s == 0 && is_sink_step(t)) exit_edges_[t] = add(v, sink(), exit_offset[t]);
      if (t < b) {
        for (std::uint32_t next = 0; next < 2; ++next)
          transition_edges_[4 * (t - 1) + 2 * s + next] = add(v, state_vertex(t + 1, next), next << t);
      } else {
        aux_edges_[s] = add(v, aux(), 0);
      }
    }
  }
  aux_sink_edge_ = add(aux(), sink(), aux_offset);
}

Trellis build_trellis(std::uint64_t num_labels) { return Trellis(num_labels); }

std::optional<EdgeIndex> Trellis::exit_edge(std::uint32_t step) const {
  if (step == 0 || step > num_steps_ || exit_edges_[step] == kNoEdge) return std::nullopt;
  return exit_edges_[step];
}

bool Trellis::is_sink_step(std::uint32_t step) const {
  return std::binary_search(sink_steps_.begin(), sink_steps_.end(), step);
}

bool Trellis::is_valid(const Path& path) const {
  if (path.is_aux_exit()) return num_steps_ >= 32 || path.state_bits < (std::uint64_t{1} << num_steps_);
  if (!is_sink_step(path.exit_step)) return false;
  return path.state_bits < (std::uint64_t{1} << (path.exit_step - 1));
}

std::uint32_t Trellis::block_of(const Path& path) const {
  if (path.is_aux_exit()) return static_cast<std::uint32_t>(sink_steps_.size());
  const auto it = std::lower_bound(sink_steps_.begin(), sink_steps_.end(), path.exit_step);
  return static_cast<std::uint32_t>(it - sink_steps_.begin());
}

Path Trellis::index_to_path(PathIndex index) const {
  if (index >= num_labels_)
    throw InvalidArgument("path index " + std::to_string(index) + " out of range [0, " + std::to_string(num_labels_) +
                          ")");
  // block_offsets_ is ascending; the block is the last offset <= index.
  const auto it = std::upper_bound(block_offsets_.begin(), block_offsets_.end(), index);
  const auto block = static_cast<std::size_t>(it - block_offsets_.begin()) - 1;
  const PathIndex bits = index - block_offsets_[block];
  if (block == sink_steps_.size()) return Path::aux(bits);
  return Path::early(sink_steps_[block], bits);
}

PathIndex Trellis::path_to_index(const Path& path) const {
  if (!is_valid(path))
    throw InvalidArgument("invalid path (exit step " + std::to_string(path.exit_step) + ", state bits " +
                          std::to_string(path.state_bits) + ")");
  return block_offsets_[block_of(path)] + path.state_bits;
}

std::size_t Trellis::path_length(const Path& path) const {
  return path.is_aux_exit() ? num_steps_ + 2 : path.exit_step + 1;
}

void Trellis::path_edges(const Path& path, std::vector<EdgeIndex>& out) const {
  if (!is_valid(path))
    throw InvalidArgument("invalid path (exit step " + std::to_string(path.exit_step) + ", state bits " +
                          std::to_string(path.state_bits) + ")");
  out.clear();
  const std::uint32_t last_step = path.is_aux_exit() ? num_steps_ : path.exit_step;
  auto state_at = [&](std::uint32_t step) -> std::uint32_t {
    // The state at an early exit step is pinned to top.
    if (!path.is_aux_exit() && step == path.exit_step) return 0;
    return (path.state_bits >> (step - 1)) & 1U;
  };

  std::uint32_t state = state_at(1);
  out.push_back(source_edges_[state]);
  for (std::uint32_t t = 1; t < last_step; ++t) {
    const std::uint32_t next = state_at(t + 1);
    out.push_back(transition_edge(t, state, next));
    state = next;
  }
  if (path.is_aux_exit()) {
    out.push_back(aux_edges_[state]);
    out.push_back(aux_sink_edge_);
  } else {
    out.push_back(exit_edges_[path.exit_step]);
  }
}

std::vector<EdgeIndex> Trellis::path_edges(const Path& path) const {
  std::vector<EdgeIndex> out;
  out.reserve(path_length(path));
  path_edges(path, out);
  return out;
}

PathMatrix materialize_path_matrix(const Trellis& trellis, std::size_t max_labels) {
  if (trellis.num_labels() > max_labels)
    throw CapacityError("refusing to materialize a " + std::to_string(trellis.num_labels()) + " x " +
                        std::to_string(trellis.num_edges()) + " path matrix (cap is " + std::to_string(max_labels) +
                        " rows)");
  PathMatrix m;
  m.rows = trellis.num_labels();
  m.cols = trellis.num_edges();
  m.data.assign(m.rows * m.cols, 0);
  std::vector<EdgeIndex> edges;
  for (PathIndex i = 0; i < trellis.num_labels(); ++i) {
    trellis.path_edges(trellis.index_to_path(i), edges);
    for (EdgeIndex e : edges) m.data[i * m.cols + e] = 1;
  }
  return m;
}

}  // namespace ltls
