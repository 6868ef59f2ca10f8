#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ltls/dataio.hpp"
#include "ltls/edge_model.hpp"
#include "ltls/trainer.hpp"
#include "ltls/trellis.hpp"

namespace ltls {

// A trained model as stored on disk.
//
// Layout, all integers and reals little-endian:
//   "LTLS"                      4 bytes magic
//   version                     u32
//   C, D, E, b                  u64 each
//   mode                        u8 (TrainMode)
//   label dictionary            C x (u32 byte length, bytes)
//   assignment table            C x u64 path index, kUnassignedEntry if free
//   l1_lambda                   f64
//   weights                     E x D f32, row-major (averaged weights)
struct Model {
  TrainMode mode = TrainMode::multiclass_rank;
  LabelDictionary dict;
  Trellis trellis{2};
  WeightMatrix weights;
  AssignmentTable table;
  double l1_lambda = 0.0;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;
inline constexpr std::uint64_t kUnassignedEntry = ~std::uint64_t{0};

std::vector<std::uint8_t> serialize_model(const Model& model);
Model deserialize_model(std::span<const std::uint8_t> bytes);

// Returns the number of bytes written.
std::size_t save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// Header bytes preceding the weight block for a model with the given tokens.
std::size_t model_header_size(const LabelDictionary& dict);

}  // namespace ltls
