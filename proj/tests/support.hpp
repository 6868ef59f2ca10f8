#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ltls/trellis.hpp"

namespace support {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    for (;;) {
      path_ = fs::temp_directory_path() / ("ltls-test-" + std::to_string(rd()));
      if (fs::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::vector<double> random_scores(const ltls::Trellis& t, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> h(t.num_edges());
  for (auto& v : h) v = n(rng);
  return h;
}

// Gaussian-ish clusters in a sparse space: class c lights up a handful of
// its own features plus shared noise features. Linearly separable with
// high probability.
struct ClusterSpec {
  std::uint32_t classes = 8;
  std::uint32_t per_class = 20;
  std::uint32_t features_per_class = 5;
  std::uint32_t noise_features = 20;
  std::uint32_t labels_per_example = 1;  // >1 makes a multilabel file
  std::uint64_t seed = 7;
};

inline std::string cluster_libsvm(const ClusterSpec& s) {
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::uniform_int_distribution<std::uint32_t> pick_noise(0, s.noise_features - 1);
  std::uniform_int_distribution<std::uint32_t> pick_class(0, s.classes - 1);
  const std::uint32_t noise_base = s.classes * s.features_per_class;
  std::ostringstream out;
  out.precision(6);
  for (std::uint32_t i = 0; i < s.per_class; ++i) {
    for (std::uint32_t c = 0; c < s.classes; ++c) {
      std::vector<std::uint32_t> labels{c};
      while (labels.size() < s.labels_per_example) {
        const std::uint32_t extra = pick_class(rng);
        if (std::find(labels.begin(), labels.end(), extra) == labels.end()) labels.push_back(extra);
      }
      std::sort(labels.begin(), labels.end());
      for (std::size_t j = 0; j < labels.size(); ++j) out << (j ? "," : "") << labels[j];
      std::vector<std::pair<std::uint32_t, double>> f;
      for (std::uint32_t l : labels)
        for (std::uint32_t k = 0; k < s.features_per_class; ++k) f.emplace_back(l * s.features_per_class + k, u(rng));
      for (int k = 0; k < 3; ++k) f.emplace_back(noise_base + pick_noise(rng), 0.3 * u(rng));
      std::sort(f.begin(), f.end());
      f.erase(std::unique(f.begin(), f.end(), [](auto& a, auto& b) { return a.first == b.first; }), f.end());
      for (auto& [idx, v] : f) out << ' ' << idx << ':' << v;
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace support
