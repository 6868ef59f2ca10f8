#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ltls/edge_model.hpp"

namespace ltls {

using LabelId = std::uint32_t;

enum class LabelMode { multiclass, multilabel };

// libsvm: headerless "label idx:val ..." lines.
// xc: extreme-classification repository files, first line "N D C" and numeric
// label ids in [0, C).
enum class DataFormat { libsvm, xc };

struct ParseOptions {
  LabelMode mode = LabelMode::multiclass;
  // Subtracted from every feature index; 1 for files that count from 1.
  std::uint32_t index_base = 0;
  bool normalize = false;
};

struct DatasetOptions {
  DataFormat format = DataFormat::libsvm;
  ParseOptions parse;
};

struct Example {
  SparseVector features;
  std::vector<LabelId> labels;  // sorted, distinct
  bool operator==(const Example&) const = default;
};

// Bijection between external label tokens and dense internal ids.
class LabelDictionary {
 public:
  // What lookup() does with a token it has not seen.
  enum class Unknown {
    intern,  // assign the next id (training without a header)
    reject,  // FormatError (header-declared label space)
    drop,    // ignore the label (evaluation against a trained model)
  };

  LabelDictionary() = default;
  explicit LabelDictionary(Unknown policy) : policy_(policy) {}

  // Tokens "0".."C-1" mapped to their numeric value; unknown tokens rejected.
  static LabelDictionary numeric(std::size_t num_labels);
  static LabelDictionary from_tokens(std::vector<std::string> tokens, Unknown policy);

  std::optional<LabelId> lookup(std::string_view token);
  std::optional<LabelId> find(std::string_view token) const;
  const std::string& token(LabelId id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  Unknown policy() const { return policy_; }
  void set_policy(Unknown policy) { policy_ = policy; }
  std::size_t dropped() const { return dropped_; }

 private:
  Unknown policy_ = Unknown::intern;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, LabelId> ids_;
  std::size_t dropped_ = 0;
};

// Parses one data line. `line_no` is only used in error messages.
Example parse_libsvm_line(std::string_view line, LabelDictionary& dict, const ParseOptions& options,
                          std::size_t line_no = 0);

// Inverse of parse_libsvm_line for index_base 0 (shortest round-trip numbers).
std::string format_libsvm_line(const Example& example, const LabelDictionary& dict, LabelMode mode);

struct DatasetHeader {
  std::size_t num_examples = 0;
  std::size_t num_features = 0;
  std::size_t num_labels = 0;
};

// Streams examples from one file; rewind() restarts from the first example.
class ExampleReader {
 public:
  ExampleReader(std::string path, DatasetOptions options, LabelDictionary& dict);

  bool next(Example& out);
  void rewind();

  const std::optional<DatasetHeader>& header() const { return header_; }
  std::size_t line_number() const { return line_no_; }

 private:
  void open();

  std::string path_;
  DatasetOptions options_;
  LabelDictionary* dict_;
  std::ifstream in_;
  std::optional<DatasetHeader> header_;
  std::size_t line_no_ = 0;
  std::string line_;
};

struct Dataset {
  LabelDictionary dict;
  std::size_t num_features = 0;
  std::vector<Example> examples;
  std::size_t dropped_features = 0;
};

// Training load: builds the dictionary (or takes it from the header) and
// infers D as header D or 1 + largest index.
Dataset load_dataset(const std::string& path, const DatasetOptions& options);

// Evaluation load against an existing label space: unknown labels and
// features >= num_features are dropped and counted.
Dataset load_dataset(const std::string& path, const DatasetOptions& options, const LabelDictionary& dict,
                     std::size_t num_features);

}  // namespace ltls
