#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ltls/dataio.hpp"
#include "ltls/edge_model.hpp"
#include "ltls/error.hpp"
#include "ltls/evaluate.hpp"
#include "ltls/inference.hpp"
#include "ltls/model_file.hpp"
#include "ltls/pipeline.hpp"
#include "ltls/trainer.hpp"
#include "ltls/trellis.hpp"

namespace py = pybind11;

namespace {

ltls::TrainMode mode_from_string(const std::string& mode) {
  if (mode == "multiclass") return ltls::TrainMode::multiclass_rank;
  if (mode == "multilabel") return ltls::TrainMode::multilabel_rank;
  if (mode == "softmax") return ltls::TrainMode::multiclass_softmax;
  throw ltls::InvalidArgument("unknown mode '" + mode + "' (expected multiclass, multilabel or softmax)");
}

std::string mode_to_string(ltls::TrainMode mode) {
  switch (mode) {
    case ltls::TrainMode::multiclass_rank: return "multiclass";
    case ltls::TrainMode::multilabel_rank: return "multilabel";
    case ltls::TrainMode::multiclass_softmax: return "softmax";
  }
  return "multiclass";
}

ltls::DatasetOptions data_options(ltls::TrainMode mode, const std::string& format, std::uint32_t index_base,
                                  bool normalize) {
  if (format != "libsvm" && format != "xc") throw ltls::InvalidArgument("unknown format '" + format + "'");
  ltls::DatasetOptions o;
  o.format = format == "xc" ? ltls::DataFormat::xc : ltls::DataFormat::libsvm;
  o.parse.mode = ltls::label_mode(mode);
  o.parse.index_base = index_base;
  o.parse.normalize = normalize;
  return o;
}

std::vector<std::pair<std::uint32_t, double>> scored(const std::vector<ltls::ScoredPath>& paths) {
  std::vector<std::pair<std::uint32_t, double>> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.emplace_back(p.index, p.score);
  return out;
}

ltls::SparseVector to_sparse(const std::vector<std::pair<std::uint32_t, double>>& features) {
  std::vector<ltls::FeatureValue> entries;
  entries.reserve(features.size());
  for (const auto& [i, v] : features) entries.push_back({i, v});
  return ltls::SparseVector::from_unsorted(std::move(entries));
}

}  // namespace

PYBIND11_MODULE(_ltls, m) {
  m.doc() = "Log-time log-space extreme classification: trellis decoding and training";

  static py::exception<ltls::Error> error(m, "LtlsError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ltls::InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const ltls::Error& e) {
      py::set_error(error, (std::string(ltls::error_category(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<ltls::Path>(m, "Path")
      .def(py::init([](std::uint32_t exit_step, std::uint32_t state_bits) { return ltls::Path{exit_step, state_bits}; }),
           py::arg("exit_step"), py::arg("state_bits"))
      .def_readonly("exit_step", &ltls::Path::exit_step)
      .def_readonly("state_bits", &ltls::Path::state_bits)
      .def_property_readonly("is_aux_exit", &ltls::Path::is_aux_exit)
      .def("__eq__", [](const ltls::Path& a, const ltls::Path& b) { return a == b; })
      .def("__repr__", [](const ltls::Path& p) {
        return p.is_aux_exit() ? "Path(aux, bits=" + std::to_string(p.state_bits) + ")"
                               : "Path(exit=" + std::to_string(p.exit_step) + ", bits=" + std::to_string(p.state_bits) + ")";
      });

  py::class_<ltls::Trellis>(m, "Trellis")
      .def(py::init<std::uint64_t>(), py::arg("num_labels"))
      .def_property_readonly("num_labels", &ltls::Trellis::num_labels)
      .def_property_readonly("num_steps", &ltls::Trellis::num_steps)
      .def_property_readonly("num_edges", &ltls::Trellis::num_edges)
      .def_property_readonly("num_vertices", &ltls::Trellis::num_vertices)
      .def_property_readonly("sink_steps",
                             [](const ltls::Trellis& t) {
                               return std::vector<std::uint32_t>(t.sink_steps().begin(), t.sink_steps().end());
                             })
      .def_property_readonly("block_offsets",
                             [](const ltls::Trellis& t) {
                               return std::vector<std::uint32_t>(t.block_offsets().begin(), t.block_offsets().end());
                             })
      .def_property_readonly("edges",
                             [](const ltls::Trellis& t) {
                               std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
                               for (const auto& e : t.edges()) out.emplace_back(e.from, e.to);
                               return out;
                             })
      .def("index_to_path", &ltls::Trellis::index_to_path, py::arg("index"))
      .def("path_to_index", &ltls::Trellis::path_to_index, py::arg("path"))
      .def("path_edges", [](const ltls::Trellis& t, std::uint32_t index) { return t.path_edges(t.index_to_path(index)); },
           py::arg("index"))
      .def("path_matrix", [](const ltls::Trellis& t) {
        const auto pm = ltls::materialize_path_matrix(t);
        std::vector<std::vector<int>> rows(pm.rows, std::vector<int>(pm.cols));
        for (std::size_t r = 0; r < pm.rows; ++r)
          for (std::size_t c = 0; c < pm.cols; ++c) rows[r][c] = pm(r, c);
        return rows;
      });

  m.def("expected_edge_count", &ltls::expected_edge_count, py::arg("num_labels"));

  m.def("score_path",
        [](const ltls::Trellis& t, const std::vector<double>& scores, std::uint32_t index) {
          ltls::check_edge_scores(t, scores);
          return ltls::score_path(t, scores, index);
        },
        py::arg("trellis"), py::arg("scores"), py::arg("index"));
  m.def("viterbi_top1",
        [](const ltls::Trellis& t, const std::vector<double>& scores) {
          const auto top = ltls::viterbi_top1(t, scores);
          return std::make_pair(top.index, top.score);
        },
        py::arg("trellis"), py::arg("scores"), "Best (path index, score).");
  m.def("viterbi_topk",
        [](const ltls::Trellis& t, const std::vector<double>& scores, std::size_t k) {
          return scored(ltls::viterbi_topk(t, scores, k));
        },
        py::arg("trellis"), py::arg("scores"), py::arg("k"), "k best (path index, score) pairs, descending.");
  m.def("forward_log_partition",
        [](const ltls::Trellis& t, const std::vector<double>& scores) {
          auto lp = ltls::forward_log_partition(t, scores);
          return std::make_pair(lp.log_z, std::move(lp.edge_marginals));
        },
        py::arg("trellis"), py::arg("scores"), "(log Z, edge marginals).");

  m.def("soft_threshold", &ltls::soft_threshold, py::arg("w"), py::arg("l1_lambda"));
  m.def("separation_ranking_loss", &ltls::separation_ranking_loss, py::arg("lowest_positive"),
        py::arg("highest_negative"));

  py::class_<ltls::Model>(m, "Model")
      .def_static("load", &ltls::load_model, py::arg("path"))
      .def("save", &ltls::save_model, py::arg("path"), "Writes the model; returns the byte count.")
      .def_property_readonly("num_labels", [](const ltls::Model& mdl) { return mdl.trellis.num_labels(); })
      .def_property_readonly("num_edges", [](const ltls::Model& mdl) { return mdl.trellis.num_edges(); })
      .def_property_readonly("num_features", [](const ltls::Model& mdl) { return mdl.weights.num_features(); })
      .def_property_readonly("num_assigned", [](const ltls::Model& mdl) { return mdl.table.assigned_count(); })
      .def_property_readonly("mode", [](const ltls::Model& mdl) { return mode_to_string(mdl.mode); })
      .def_property_readonly("l1_lambda", [](const ltls::Model& mdl) { return mdl.l1_lambda; })
      .def_property_readonly("labels", [](const ltls::Model& mdl) { return mdl.dict.tokens(); })
      .def("predict",
           [](const ltls::Model& mdl, const std::vector<std::pair<std::uint32_t, double>>& features, std::size_t k) {
             ltls::SparseVector x = to_sparse(features);
             x.truncate(mdl.weights.num_features());
             const auto p = ltls::predict_topk(mdl.trellis, mdl.weights, mdl.table, x, k, {mdl.l1_lambda});
             std::vector<std::pair<std::string, double>> out;
             for (std::size_t i = 0; i < p.labels.size(); ++i) out.emplace_back(mdl.dict.token(p.labels[i]), p.scores[i]);
             return out;
           },
           py::arg("features"), py::arg("k") = 1,
           "Top-k (label, score) pairs for a sparse [(index, value), ...] input.")
      .def("evaluate",
           [](const ltls::Model& mdl, const std::string& path, const std::string& format, std::uint32_t index_base,
              bool normalize, std::size_t threads) {
             const auto data = ltls::load_dataset(path, data_options(mdl.mode, format, index_base, normalize), mdl.dict,
                                                  mdl.weights.num_features());
             const auto report = ltls::evaluate_model(mdl, data, {1, 3, 5}, threads ? threads : ltls::evaluation_threads());
             py::dict out;
             for (const auto& [k, p] : report.precision) {
               const std::string key = "precision@" + std::to_string(k);
               if (p) out[py::str(key)] = *p;
               else out[py::str(key)] = py::none();
             }
             out["prediction_time_s"] = report.prediction_time_s;
             out["num_examples"] = report.num_examples;
             out["num_edges"] = report.num_edges;
             return out;
           },
           py::arg("path"), py::arg("format") = "libsvm", py::arg("index_base") = 0, py::arg("normalize") = false,
           py::arg("threads") = 0);

  m.def("train",
        [](const std::string& path, const std::string& mode, int epochs, double lr, double l1,
           std::optional<std::uint32_t> beam_m, std::uint64_t seed, bool shuffle, const std::string& format,
           std::uint32_t index_base, bool normalize) {
          ltls::TrainConfig config;
          config.mode = mode_from_string(mode);
          config.epochs = epochs;
          config.learning_rate = lr;
          config.l1_lambda = l1;
          config.assignment_beam = beam_m;
          config.rng_seed = seed;
          config.shuffle = shuffle;
          config.validate();
          auto data = ltls::load_dataset(path, data_options(config.mode, format, index_base, normalize));
          py::gil_scoped_release release;
          return ltls::train_model(std::move(data), config);
        },
        py::arg("path"), py::arg("mode") = "multiclass", py::arg("epochs") = 10, py::arg("lr") = 0.1,
        py::arg("l1") = 0.0, py::arg("beam_m") = py::none(), py::arg("seed") = 1, py::arg("shuffle") = true,
        py::arg("format") = "libsvm", py::arg("index_base") = 0, py::arg("normalize") = false,
        "Train a model on a data file.");

  m.def("oracle_top_frequent",
        [](const std::vector<std::vector<std::uint32_t>>& train, const std::vector<std::vector<std::uint32_t>>& test,
           std::size_t num_top) { return ltls::oracle_top_frequent(train, test, num_top); },
        py::arg("train_labels"), py::arg("test_labels"), py::arg("num_top"));
}
