#include "ltls/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <system_error>

#include "ltls/error.hpp"

namespace ltls {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

std::string_view trim_right(std::string_view s) {
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string_view trim(std::string_view s) {
  s = trim_right(s);
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  return s;
}

bool skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

std::string where(std::size_t line_no) { return line_no ? "line " + std::to_string(line_no) + ": " : std::string(); }

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

DatasetHeader parse_header(std::string_view line, std::size_t line_no) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  DatasetHeader h;
  if (fields.size() != 3 || !parse_number(fields[0], h.num_examples) || !parse_number(fields[1], h.num_features) ||
      !parse_number(fields[2], h.num_labels))
    throw FormatError(where(line_no) + "expected header \"<examples> <features> <labels>\"");
  return h;
}

}  // namespace

LabelDictionary LabelDictionary::numeric(std::size_t num_labels) {
  std::vector<std::string> tokens;
  tokens.reserve(num_labels);
  for (std::size_t i = 0; i < num_labels; ++i) tokens.push_back(std::to_string(i));
  return from_tokens(std::move(tokens), Unknown::reject);
}

LabelDictionary LabelDictionary::from_tokens(std::vector<std::string> tokens, Unknown policy) {
  LabelDictionary d(policy);
  d.ids_.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!d.ids_.emplace(tokens[i], static_cast<LabelId>(i)).second)
      throw FormatError("duplicate label token \"" + tokens[i] + "\"");
  }
  d.tokens_ = std::move(tokens);
  return d;
}

std::optional<LabelId> LabelDictionary::find(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<LabelId> LabelDictionary::lookup(std::string_view token) {
  if (auto id = find(token)) return id;
  switch (policy_) {
    case Unknown::intern: {
      const auto id = static_cast<LabelId>(tokens_.size());
      tokens_.emplace_back(token);
      ids_.emplace(tokens_.back(), id);
      return id;
    }
    case Unknown::reject:
      throw FormatError("label \"" + std::string(token) + "\" is outside the declared label space of " +
                        std::to_string(tokens_.size()) + " labels");
    case Unknown::drop:
      ++dropped_;
      return std::nullopt;
  }
  return std::nullopt;
}

Example parse_libsvm_line(std::string_view line, LabelDictionary& dict, const ParseOptions& options,
                          std::size_t line_no) {
  line = trim_right(line);
  Example ex;
  std::vector<FeatureValue> features;

  std::size_t i = 0;
  bool first = true;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    const std::string_view tok = line.substr(start, i - start);
    if (tok.empty()) break;

    const auto colon = tok.find(':');
    if (first) {
      first = false;
      // In multilabel mode a line that starts with whitespace has no labels.
      const bool is_label_field =
          colon == std::string_view::npos && (options.mode == LabelMode::multiclass || start == 0);
      if (is_label_field) {
        if (options.mode == LabelMode::multiclass && tok.find(',') != std::string_view::npos)
          throw ParseError(where(line_no) + "multiclass line carries several labels \"" + std::string(tok) + "\"");
        std::size_t p = 0;
        while (p <= tok.size()) {
          const std::size_t comma = std::min(tok.find(',', p), tok.size());
          const auto label_tok = tok.substr(p, comma - p);
          if (label_tok.empty()) throw ParseError(where(line_no) + "empty label in \"" + std::string(tok) + "\"");
          try {
            if (auto id = dict.lookup(label_tok)) ex.labels.push_back(*id);
          } catch (const FormatError& e) {
            throw FormatError(where(line_no) + e.what());
          }
          p = comma + 1;
        }
        continue;
      }
      if (options.mode == LabelMode::multiclass) throw ParseError(where(line_no) + "missing label");
    }

    if (colon == std::string_view::npos)
      throw ParseError(where(line_no) + "malformed feature \"" + std::string(tok) + "\", expected index:value");
    std::uint64_t raw_index = 0;
    double value = 0.0;
    if (!parse_number(tok.substr(0, colon), raw_index))
      throw ParseError(where(line_no) + "bad feature index in \"" + std::string(tok) + "\"");
    if (!parse_number(tok.substr(colon + 1), value) || !std::isfinite(value))
      throw ParseError(where(line_no) + "bad feature value in \"" + std::string(tok) + "\"");
    if (raw_index < options.index_base)
      throw ParseError(where(line_no) + "feature index " + std::to_string(raw_index) + " below index base " +
                       std::to_string(options.index_base));
    const std::uint64_t index = raw_index - options.index_base;
    if (index > std::numeric_limits<FeatureIndex>::max() - 1)
      throw ParseError(where(line_no) + "feature index " + std::to_string(raw_index) + " too large");
    features.push_back({static_cast<FeatureIndex>(index), value});
  }
  if (first && options.mode == LabelMode::multiclass) throw ParseError(where(line_no) + "empty line");

  std::sort(features.begin(), features.end(),
            [](const FeatureValue& a, const FeatureValue& b) { return a.index < b.index; });
  for (std::size_t k = 1; k < features.size(); ++k)
    if (features[k].index == features[k - 1].index)
      throw ParseError(where(line_no) + "duplicate feature index " +
                       std::to_string(features[k].index + options.index_base));
  ex.features = SparseVector(std::move(features));
  if (options.normalize) ex.features.normalize();

  std::sort(ex.labels.begin(), ex.labels.end());
  ex.labels.erase(std::unique(ex.labels.begin(), ex.labels.end()), ex.labels.end());
  return ex;
}

std::string format_libsvm_line(const Example& example, const LabelDictionary& dict, LabelMode mode) {
  std::string out;
  if (mode == LabelMode::multiclass && example.labels.size() != 1)
    throw InvalidArgument("multiclass example must carry exactly one label");
  for (std::size_t i = 0; i < example.labels.size(); ++i) {
    if (i) out += ',';
    out += dict.token(example.labels[i]);
  }
  char buf[64];
  for (const auto& [index, value] : example.features) {
    out += ' ';
    out += std::to_string(index);
    out += ':';
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, res.ptr);
  }
  return out;
}

ExampleReader::ExampleReader(std::string path, DatasetOptions options, LabelDictionary& dict)
    : path_(std::move(path)), options_(options), dict_(&dict) {
  open();
}

void ExampleReader::open() {
  in_ = std::ifstream(path_);
  if (!in_) throw IoError("cannot open " + path_);
  line_no_ = 0;
  if (options_.format == DataFormat::xc) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      if (skippable(line_)) continue;
      header_ = parse_header(line_, line_no_);
      return;
    }
    throw FormatError(path_ + ": missing header line");
  }
}

void ExampleReader::rewind() { open(); }

bool ExampleReader::next(Example& out) {
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (skippable(line_)) continue;
    try {
      out = parse_libsvm_line(line_, *dict_, options_.parse, line_no_);
    } catch (const Error& e) {
      throw_error(e.kind(), path_ + ": " + e.what());
    }
    return true;
  }
  if (in_.bad()) throw IoError("read error in " + path_);
  return false;
}

Dataset load_dataset(const std::string& path, const DatasetOptions& options) {
  Dataset ds;
  ds.dict = LabelDictionary(LabelDictionary::Unknown::intern);

  // The header has to be read before the dictionary policy is known.
  std::optional<DatasetHeader> header;
  if (options.format == DataFormat::xc) {
    LabelDictionary probe;
    header = ExampleReader(path, options, probe).header();
    ds.dict = LabelDictionary::numeric(header->num_labels);
  }

  ExampleReader reader(path, options, ds.dict);
  std::size_t bound = 0;
  Example ex;
  while (reader.next(ex)) {
    if (header && ex.features.dimension_bound() > header->num_features)
      throw FormatError(path + ": line " + std::to_string(reader.line_number()) + ": feature index " +
                        std::to_string(ex.features.dimension_bound() - 1) + " >= declared D = " +
                        std::to_string(header->num_features));
    bound = std::max(bound, ex.features.dimension_bound());
    ds.examples.push_back(std::move(ex));
  }
  ds.num_features = header ? header->num_features : bound;
  return ds;
}

Dataset load_dataset(const std::string& path, const DatasetOptions& options, const LabelDictionary& dict,
                     std::size_t num_features) {
  Dataset ds;
  ds.dict = dict;
  ds.dict.set_policy(LabelDictionary::Unknown::drop);
  ds.num_features = num_features;
  ExampleReader reader(path, options, ds.dict);
  Example ex;
  while (reader.next(ex)) {
    ds.dropped_features += ex.features.truncate(num_features);
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

}  // namespace ltls
