#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "ltls/dataio.hpp"
#include "ltls/evaluate.hpp"
#include "ltls/model_file.hpp"
#include "ltls/trainer.hpp"

namespace ltls {

LabelMode label_mode(TrainMode mode);

// Trains for config.epochs passes over `data`, consuming its dictionary.
// Per-epoch statistics go to `log` when given.
Model train_model(Dataset data, const TrainConfig& config, std::ostream* log = nullptr);

// Precision@k for every k in `ks` plus prediction time. `data` must have been
// loaded against the model's dictionary.
MetricsReport evaluate_model(const Model& model, const Dataset& data, std::vector<std::size_t> ks,
                             std::size_t threads);

}  // namespace ltls
