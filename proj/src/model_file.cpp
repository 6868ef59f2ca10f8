#include "ltls/model_file.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ltls/error.hpp"

namespace ltls {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'L', 'T', 'L', 'S'};

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T uint(const char* what) {
    need(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(T);
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(uint<std::uint32_t>(what)); }
  double f64(const char* what) { return std::bit_cast<double>(uint<std::uint64_t>(what)); }
  std::span<const std::uint8_t> bytes(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) throw IntegrityError(std::string("model file truncated while reading ") + what);
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t model_header_size(const LabelDictionary& dict) {
  std::size_t n = kMagic.size() + 4 + 4 * 8 + 1;
  for (const auto& t : dict.tokens()) n += 4 + t.size();
  n += 8 * dict.size() + 8;
  return n;
}

std::vector<std::uint8_t> serialize_model(const Model& model) {
  const Trellis& trellis = model.trellis;
  const std::uint64_t C = trellis.num_labels();
  const std::uint64_t E = trellis.num_edges();
  const std::uint64_t D = model.weights.num_features();
  if (model.dict.size() != C || model.table.size() != C)
    throw InvalidArgument("label dictionary or assignment table does not match C = " + std::to_string(C));
  if (model.weights.num_edges() != E) throw InvalidArgument("weight matrix does not match the trellis edge count");

  std::vector<std::uint8_t> out;
  out.reserve(model_header_size(model.dict) + 4 * E * D);
  Writer w(out);
  w.bytes(kMagic.data(), kMagic.size());
  w.uint<std::uint32_t>(kModelFormatVersion);
  w.uint<std::uint64_t>(C);
  w.uint<std::uint64_t>(D);
  w.uint<std::uint64_t>(E);
  w.uint<std::uint64_t>(trellis.num_steps());
  w.uint<std::uint8_t>(static_cast<std::uint8_t>(model.mode));
  for (const auto& token : model.dict.tokens()) {
    w.uint<std::uint32_t>(static_cast<std::uint32_t>(token.size()));
    w.bytes(token.data(), token.size());
  }
  for (std::uint32_t p : model.table.label_to_path()) w.uint<std::uint64_t>(p == kUnassigned ? kUnassignedEntry : p);
  w.f64(model.l1_lambda);
  for (float v : model.weights.averaged_row_major_f32()) w.f32(v);
  return out;
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.bytes(kMagic.size(), "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) throw IntegrityError("bad magic bytes, not an LTLS model");
  const auto version = r.uint<std::uint32_t>("version");
  if (version != kModelFormatVersion)
    throw IntegrityError("unsupported model format version " + std::to_string(version) + " (expected " +
                         std::to_string(kModelFormatVersion) + ")");
  const auto C = r.uint<std::uint64_t>("C");
  const auto D = r.uint<std::uint64_t>("D");
  const auto E = r.uint<std::uint64_t>("E");
  const auto b = r.uint<std::uint64_t>("b");
  const auto mode = r.uint<std::uint8_t>("mode");

  if (C < 2 || C > Trellis::kMaxLabels) throw IntegrityError("label count " + std::to_string(C) + " is invalid");
  Model m;
  m.trellis = Trellis(C);
  if (E != m.trellis.num_edges() || b != m.trellis.num_steps())
    throw IntegrityError("stored trellis shape (E=" + std::to_string(E) + ", b=" + std::to_string(b) +
                         ") does not match C=" + std::to_string(C) + " (E=" + std::to_string(m.trellis.num_edges()) +
                         ", b=" + std::to_string(m.trellis.num_steps()) + ")");
  if (mode > static_cast<std::uint8_t>(TrainMode::multiclass_softmax))
    throw IntegrityError("unknown training mode " + std::to_string(mode));
  m.mode = static_cast<TrainMode>(mode);

  // every label needs at least a length prefix and a table entry
  if (C > r.remaining() / 12) throw IntegrityError("model file truncated while reading labels");
  std::vector<std::string> tokens;
  tokens.reserve(C);
  for (std::uint64_t i = 0; i < C; ++i) {
    const auto len = r.uint<std::uint32_t>("label token length");
    const auto s = r.bytes(len, "label token");
    tokens.emplace_back(reinterpret_cast<const char*>(s.data()), s.size());
  }
  try {
    m.dict = LabelDictionary::from_tokens(std::move(tokens), LabelDictionary::Unknown::drop);
  } catch (const FormatError& e) {
    throw IntegrityError(e.what());
  }

  std::vector<std::uint32_t> label_to_path(C);
  for (auto& p : label_to_path) {
    const auto v = r.uint<std::uint64_t>("assignment table");
    if (v == kUnassignedEntry) p = kUnassigned;
    else if (v >= C) throw IntegrityError("assignment entry " + std::to_string(v) + " out of range");
    else p = static_cast<std::uint32_t>(v);
  }
  m.table = AssignmentTable::from_label_paths(label_to_path);
  m.l1_lambda = r.f64("l1 lambda");
  if (!(m.l1_lambda >= 0.0)) throw IntegrityError("stored l1 lambda is negative or NaN");

  if (D != 0 && E > r.remaining() / 4 / D) throw IntegrityError("model file truncated while reading weights");
  std::vector<float> weights(E * D);
  for (auto& v : weights) v = r.f32("weights");
  if (r.remaining() != 0) throw IntegrityError(std::to_string(r.remaining()) + " trailing bytes after weights");
  m.weights = WeightMatrix::from_averaged(E, D, weights);
  return m;
}

std::size_t save_model(const Model& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
  return bytes.size();
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path);
  return deserialize_model(bytes);
}

}  // namespace ltls
