#include "doctest.h"

#include <algorithm>
#include <random>
#include <vector>

#include "json.hpp"

#include "ltls/error.hpp"
#include "ltls/evaluate.hpp"
#include "ltls/trainer.hpp"
#include "support.hpp"

using namespace ltls;

namespace {

AssignmentTable identity_table(std::uint32_t C) {
  AssignmentTable t(C);
  for (std::uint32_t l = 0; l < C; ++l) t.assign(l, C - 1 - l);
  return t;
}

WeightMatrix random_weights(std::size_t E, std::size_t D, std::mt19937_64& rng) {
  WeightMatrix w(E, D);
  std::normal_distribution<double> n(0.0, 1.0);
  w.begin_update();
  for (std::size_t e = 0; e < E; ++e)
    for (std::size_t j = 0; j < D; ++j) w.add(e, j, n(rng));
  return w;
}

Prediction labels(std::vector<LabelId> l) { return {std::move(l), {}}; }

}  // namespace

TEST_CASE("predict_topk with a full bijection is the mapped list decode") {
  std::mt19937_64 rng(2);
  for (std::uint32_t C : {2u, 5u, 22u, 105u}) {
    const Trellis t(C);
    const auto table = identity_table(C);
    const auto w = random_weights(t.num_edges(), 8, rng);
    for (int trial = 0; trial < 20; ++trial) {
      const SparseVector x({{1, 0.5}, {4, -1.0}, {7, 2.0}});
      const std::size_t k = 1 + rng() % C;
      const auto pred = predict_topk(t, w, table, x, k, {}, WeightView::current);
      const auto paths = viterbi_topk(t, edge_scores(w, x), k);
      REQUIRE(pred.labels.size() == k);
      for (std::size_t i = 0; i < k; ++i) {
        CHECK(pred.labels[i] == *table.label_of(paths[i].index));
        CHECK(pred.scores[i] == paths[i].score);
      }
    }
  }
}

TEST_CASE("predict_topk skips free paths") {
  const Trellis t(22);
  std::mt19937_64 rng(5);
  const auto h = support::random_scores(t, rng);
  const auto ranked = viterbi_topk(t, h, 22);

  AssignmentTable table(22);
  LabelId next = 0;
  for (std::size_t r = 1; r < 22; ++r) table.assign(next++, ranked[r].index);  // top path stays free
  for (std::size_t k : {1u, 3u, 8u, 21u}) {
    const auto pred = predict_topk(t, h, table, k);
    REQUIRE(pred.labels.size() == k);
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(pred.labels[i] == *table.label_of(ranked[i + 1].index));
      CHECK(pred.scores[i] == ranked[i + 1].score);
    }
  }
  CHECK_THROWS_AS(predict_topk(t, h, table, 22), InvalidArgument);
  CHECK_THROWS_AS(predict_topk(t, h, table, 0), InvalidArgument);

  // only the worst path carries a label: the widening has to reach all C
  AssignmentTable sparse(22);
  sparse.assign(3, ranked.back().index);
  const auto last = predict_topk(t, h, sparse, 1);
  CHECK(last.labels == std::vector<LabelId>{3});
}

TEST_CASE("precision_at_k") {
  const std::vector<std::vector<LabelId>> gold{{1}, {2}, {3}};
  CHECK(precision_at_k(std::vector{labels({1}), labels({2}), labels({3})}, gold, 1) == 1.0);
  CHECK(precision_at_k(std::vector{labels({0}), labels({0}), labels({0})}, gold, 1) == 0.0);
  CHECK(precision_at_k(std::vector{labels({1}), labels({0})}, std::vector<std::vector<LabelId>>{{1}, {2}}, 1) == 0.5);

  const std::vector<std::vector<LabelId>> multi{{1, 4}, {2}};
  const std::vector<Prediction> p{labels({4, 0, 1}), labels({0, 2, 5})};
  CHECK(precision_at_k(p, multi, 3) == doctest::Approx((2.0 / 3 + 1.0 / 3) / 2));
  CHECK(precision_at_k(p, multi, 1) == doctest::Approx(0.5));

  // order invariance
  const std::vector<Prediction> rev{p[1], p[0]};
  const std::vector<std::vector<LabelId>> rev_gold{multi[1], multi[0]};
  CHECK(precision_at_k(rev, rev_gold, 3) == precision_at_k(p, multi, 3));

  CHECK_THROWS_AS(precision_at_k(p, gold, 1), InvalidArgument);
  CHECK_THROWS_AS(precision_at_k(p, multi, 0), InvalidArgument);
}

TEST_CASE("oracle_top_frequent") {
  const std::vector<std::vector<LabelId>> train{{0}, {0}, {0}, {1}, {1}, {2}, {3}, {3}};
  const std::vector<std::vector<LabelId>> test{{0}, {1}, {2}, {3}, {0}};

  CHECK(oracle_top_frequent(train, test, 1) == doctest::Approx(2.0 / 5));
  // counts 0:3, 1:2, 3:2, 2:1; the tie between 1 and 3 goes to 1
  CHECK(oracle_top_frequent(train, test, 2) == doctest::Approx(3.0 / 5));
  CHECK(oracle_top_frequent(train, test, 4) == 1.0);
  CHECK(oracle_top_frequent(train, test, 100) == 1.0);
  CHECK(oracle_top_frequent(train, {}, 3) == 0.0);
  CHECK_THROWS_AS(oracle_top_frequent(train, test, 0), InvalidArgument);

  std::mt19937_64 rng(7);
  std::vector<std::vector<LabelId>> tr(300), te(100);
  for (auto& s : tr) s = {static_cast<LabelId>(rng() % 40), static_cast<LabelId>(rng() % 13)};
  for (auto& s : te) s = {static_cast<LabelId>(rng() % 45)};
  double prev = 0.0;
  for (std::size_t e = 1; e <= 50; ++e) {
    const double o = oracle_top_frequent(tr, te, e);
    CHECK(o >= prev);
    prev = o;
  }
}

TEST_CASE("predict_all matches serial prediction for any thread count") {
  std::mt19937_64 rng(12);
  const Trellis t(37);
  const auto table = identity_table(37);
  const auto w = random_weights(t.num_edges(), 11, rng);
  std::vector<Example> data;
  for (int i = 0; i < 53; ++i)
    data.push_back({SparseVector({{static_cast<FeatureIndex>(i % 10), 1.0}, {10, 0.5 * (i % 3)}}), {0}});
  const auto serial = predict_all(t, w, table, data, 4, {}, 1);
  for (std::size_t threads : {2u, 3u, 8u, 100u}) {
    const auto par = predict_all(t, w, table, data, 4, {}, threads);
    REQUIRE(par.size() == serial.size());
    for (std::size_t i = 0; i < par.size(); ++i) {
      CHECK(par[i].labels == serial[i].labels);
      CHECK(par[i].scores == serial[i].scores);
    }
  }
  CHECK(predict_all(t, w, table, {}, 4, {}, 4).empty());
  CHECK_THROWS_AS(predict_all(t, w, table, data, 38, {}, 4), InvalidArgument);
}

TEST_CASE("evaluation_threads honours LTLS_THREADS") {
  setenv("LTLS_THREADS", "3", 1);
  CHECK(evaluation_threads() == 3);
  setenv("LTLS_THREADS", "zero", 1);
  CHECK(evaluation_threads() >= 1);
  unsetenv("LTLS_THREADS");
  CHECK(evaluation_threads() >= 1);
}

TEST_CASE("MetricsReport") {
  MetricsReport r;
  r.num_examples = 0;
  r.num_edges = 28;
  r.model_size_bytes = 1234;
  r.precision = {{1, std::nullopt}, {3, 0.5}};
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["precision@1"].is_null());
  CHECK(j["precision@3"] == 0.5);
  CHECK(j["num_edges"] == 28);
  CHECK(j["model_size_bytes"] == 1234);
  CHECK(j["prediction_time_s"] == 0.0);
  const std::string table = r.to_table();
  CHECK(table.find("n/a") != std::string::npos);
  CHECK(table.find("0.5000") != std::string::npos);
}
