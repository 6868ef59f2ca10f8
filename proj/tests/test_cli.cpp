#include "doctest.h"

#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ltls/cli.hpp"
#include "ltls/model_file.hpp"
#include "support.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ltls");
  std::ostringstream out, err;
  const int code = ltls::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == ltls::cli::kUsage);
  CHECK(run({"fly"}).code == ltls::cli::kUsage);
  const auto r = run({"train", "--model-out", "x"});
  CHECK(r.code == ltls::cli::kUsage);
  CHECK(r.err.rfind("ltls: error[usage]: ", 0) == 0);
  CHECK(lines(r.err).size() == 1);
  CHECK(run({"train", "--data", "a", "--model-out", "b", "--epochs", "0"}).code == ltls::cli::kUsage);
  CHECK(run({"train", "--data", "a", "--model-out", "b", "--mode", "magic"}).code == ltls::cli::kUsage);
  CHECK(run({"train", "--data", "a", "--model-out", "b", "--index-base", "2"}).code == ltls::cli::kUsage);
  CHECK(run({"--help"}).code == ltls::cli::kOk);
}

TEST_CASE("train, predict, evaluate and baseline on a toy set") {
  support::TempDir dir;
  const auto train = dir.file("train.txt");
  const auto model = dir.file("model.ltls");
  support::ClusterSpec spec;
  spec.classes = 6;
  spec.per_class = 15;
  support::write_file(train, support::cluster_libsvm(spec));

  const auto t = run({"train", "--data", train, "--model-out", model, "--epochs", "5"});
  REQUIRE(t.code == ltls::cli::kOk);
  CHECK(t.err.find("epoch 5/5") != std::string::npos);
  const auto loaded = ltls::load_model(model);
  CHECK(loaded.trellis.num_labels() == 6);

  const auto p = run({"predict", "--model", model, "--data", train, "--topk", "2"});
  REQUIRE(p.code == ltls::cli::kOk);
  const auto pred_lines = lines(p.out);
  const auto gold_lines = lines(support::read_file(train));
  REQUIRE(pred_lines.size() == gold_lines.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred_lines.size(); ++i) {
    const auto tab = pred_lines[i].find('\t');
    REQUIRE(tab != std::string::npos);
    const std::string first = pred_lines[i].substr(0, pred_lines[i].find(':'));
    hits += first == gold_lines[i].substr(0, gold_lines[i].find(' '));
    const double s1 = std::stod(pred_lines[i].substr(pred_lines[i].find(':') + 1, tab));
    const double s2 = std::stod(pred_lines[i].substr(pred_lines[i].rfind(':') + 1));
    CHECK(s1 >= s2);
  }
  CHECK(hits == pred_lines.size());

  const auto out_file = dir.file("pred.txt");
  CHECK(run({"predict", "--model", model, "--data", train, "--out", out_file}).code == ltls::cli::kOk);
  CHECK(lines(support::read_file(out_file)).size() == gold_lines.size());

  const auto json_file = dir.file("metrics.json");
  const auto e = run({"evaluate", "--model", model, "--data", train, "--json-out", json_file});
  REQUIRE(e.code == ltls::cli::kOk);
  const auto j = nlohmann::json::parse(lines(e.out).back());
  CHECK(j["precision@1"] == 1.0);
  CHECK(j["precision@5"].is_number());
  CHECK(j["num_edges"] == 10);
  CHECK(j["model_size_bytes"] == support::read_file(model).size());
  CHECK(nlohmann::json::parse(support::read_file(json_file)) == j);

  const auto b = run({"baseline", "--train", train, "--test", train});
  REQUIRE(b.code == ltls::cli::kOk);
  CHECK(b.out.find("E=10\n") != std::string::npos);
  CHECK(b.out.find("oracle=1.0000") != std::string::npos);
}

TEST_CASE("runtime errors exit 1 with a one-line category") {
  support::TempDir dir;
  const auto train = dir.file("train.txt");
  const auto model = dir.file("model.ltls");
  support::write_file(train, "a 0:1\nb 1:1\nc 2:1\n");
  REQUIRE(run({"train", "--data", train, "--model-out", model, "--epochs", "2"}).code == 0);

  SUBCASE("missing data file") {
    const auto r = run({"train", "--data", dir.file("none"), "--model-out", model});
    CHECK(r.code == ltls::cli::kFailure);
    CHECK(r.err.rfind("ltls: error[io]: train: ", 0) == 0);
    CHECK(lines(r.err).size() == 1);
  }
  SUBCASE("parse error names the line") {
    const auto bad = dir.file("bad.txt");
    support::write_file(bad, "a 0:1\nb 1:q\n");
    const auto r = run({"train", "--data", bad, "--model-out", model});
    CHECK(r.code == ltls::cli::kFailure);
    CHECK(r.err.rfind("ltls: error[parse]: train: ", 0) == 0);
    CHECK(r.err.find("line 2") != std::string::npos);
  }
  SUBCASE("corrupted magic") {
    auto bytes = support::read_file(model);
    bytes[0] = 'X';
    const auto broken = dir.file("broken.ltls");
    support::write_file(broken, bytes);
    const auto r = run({"predict", "--model", broken, "--data", train});
    CHECK(r.code == ltls::cli::kFailure);
    CHECK(r.err.rfind("ltls: error[integrity]: predict: ", 0) == 0);
  }
  SUBCASE("truncated model") {
    const auto bytes = support::read_file(model);
    const auto cut = dir.file("cut.ltls");
    support::write_file(cut, bytes.substr(0, bytes.size() - 3));
    const auto r = run({"evaluate", "--model", cut, "--data", train});
    CHECK(r.code == ltls::cli::kFailure);
    CHECK(r.err.rfind("ltls: error[integrity]: evaluate: ", 0) == 0);
  }
  SUBCASE("topk above the assigned labels names the limit") {
    const auto r = run({"predict", "--model", model, "--data", train, "--topk", "4"});
    CHECK(r.code == ltls::cli::kFailure);
    CHECK(r.err.find("--topk 4 exceeds the 3 labels") != std::string::npos);
  }
  SUBCASE("single label") {
    const auto one = dir.file("one.txt");
    support::write_file(one, "a 0:1\na 1:1\n");
    const auto r = run({"train", "--data", one, "--model-out", model});
    CHECK(r.code == ltls::cli::kFailure);
    CHECK(r.err.rfind("ltls: error[invalid-argument]: train: ", 0) == 0);
  }
}

TEST_CASE("evaluate on an empty test file reports null precision") {
  support::TempDir dir;
  const auto train = dir.file("train.txt");
  const auto model = dir.file("model.ltls");
  const auto empty = dir.file("empty.txt");
  support::write_file(train, "a 0:1\nb 1:1\nc 2:1\n");
  support::write_file(empty, "");
  REQUIRE(run({"train", "--data", train, "--model-out", model}).code == 0);
  const auto e = run({"evaluate", "--model", model, "--data", empty});
  REQUIRE(e.code == ltls::cli::kOk);
  const auto j = nlohmann::json::parse(lines(e.out).back());
  CHECK(j["precision@1"].is_null());
  CHECK(j["precision@3"].is_null());
  CHECK(j["prediction_time_s"] == 0.0);
  CHECK(j["num_examples"] == 0);
}

TEST_CASE("multilabel xc files and repeated runs") {
  support::TempDir dir;
  const auto train = dir.file("ml.txt");
  support::ClusterSpec spec;
  spec.classes = 10;
  spec.labels_per_example = 2;
  const std::string body = support::cluster_libsvm(spec);
  const std::size_t n = lines(body).size();
  support::write_file(train, std::to_string(n) + " 80 10\n" + body);

  const auto a = dir.file("a.ltls"), b = dir.file("b.ltls");
  const std::vector<std::string> common{"--data", train, "--mode", "multilabel", "--format", "xc", "--epochs", "3",
                                        "--seed", "5"};
  auto args_a = std::vector<std::string>{"train", "--model-out", a};
  auto args_b = std::vector<std::string>{"train", "--model-out", b};
  args_a.insert(args_a.end(), common.begin(), common.end());
  args_b.insert(args_b.end(), common.begin(), common.end());
  REQUIRE(run(args_a).code == 0);
  REQUIRE(run(args_b).code == 0);
  CHECK(support::read_file(a) == support::read_file(b));
  CHECK(ltls::load_model(a).weights.num_features() == 80);

  const auto e = run({"evaluate", "--model", a, "--data", train, "--mode", "multilabel", "--format", "xc"});
  // evaluate has no --mode flag; the mode comes from the model
  CHECK(e.code == ltls::cli::kUsage);
  const auto ok = run({"evaluate", "--model", a, "--data", train, "--format", "xc"});
  REQUIRE(ok.code == 0);
  const auto j = nlohmann::json::parse(lines(ok.out).back());
  CHECK(j["precision@1"].get<double>() > 0.8);
}
