#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "corpus.hpp"
#include "doctest.h"
#include "embedding.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "model.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "tensor.hpp"

using namespace cspan;

namespace {

TensorD rand_t(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  TensorD t = TensorD::zeros(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

Document pair_doc() {
  Document doc;
  doc.doc_id = "d";
  doc.tokens = {"a", "b", "c", "d", "e", "f", "g", "h"};
  doc.sentences = {Span{0, 7}};
  doc.speakers = {0, 0, 0, 1, 1, 1, 1, 1};
  doc.genre = 3;
  return doc;
}

// Antecedent scorer wired from explicit tensors (depth 1 for compactness).
double ante_score_with(const TensorD& x, const TensorD& w0, const TensorD& b0,
                       const TensorD& out) {
  Graph<double> g;
  GraphParams<double> P;
  P.ids["ante.ffnn.w0"] = g.leaf(w0);
  P.ids["ante.ffnn.b0"] = g.leaf(b0);
  P.ids["ante.out"] = g.leaf(out);
  return g.val(ffnn_from(g, P, "ante", g.constant(x), 1)).at(0);
}

Document tiny_training_doc() {
  Document doc;
  doc.doc_id = "tiny";
  doc.tokens = {"mk", "ent1", "w1", "w2", "mk", "ent1", "w3", "w4"};
  doc.sentences = {Span{0, 3}, Span{4, 7}};
  doc.speakers = {0, 0, 0, 0, 0, 0, 0, 0};
  doc.genre = 0;
  doc.gold_clusters = {{Span{0, 1}, Span{4, 5}}};
  return doc;
}

}  // namespace

TEST_SUITE_BEGIN("scorer");

TEST_CASE("distance buckets partition [1, inf)") {
  CHECK(distance_bucket(1) == 0);
  CHECK(distance_bucket(2) == 1);
  CHECK(distance_bucket(3) == 2);
  CHECK(distance_bucket(4) == 3);
  CHECK(distance_bucket(5) == 4);
  CHECK(distance_bucket(7) == 4);
  CHECK(distance_bucket(8) == 5);
  CHECK(distance_bucket(15) == 5);
  CHECK(distance_bucket(16) == 6);
  CHECK(distance_bucket(31) == 6);
  CHECK(distance_bucket(32) == 7);
  CHECK(distance_bucket(63) == 7);
  CHECK(distance_bucket(64) == 8);
  CHECK(distance_bucket(100) == 8);
  CHECK(distance_bucket(100000) == 8);
  CHECK_THROWS_AS(distance_bucket(0), DataError);
  CHECK_THROWS_AS(distance_bucket(-3), DataError);
}

TEST_CASE("pair features bucket the mention-index distance") {
  Document doc = pair_doc();
  CandidateSpan i{6, 6, 0}, j{1, 1, 1};
  PairFeatureIds f = pair_features(5, 2, i, j, doc, false);
  CHECK(f.bucket == 2);  // distance 3 lands in the third bucket
  CHECK(f.genre == 3);

  PairFeatureIds far = pair_features(100, 0, i, j, doc, false);
  CHECK(far.bucket == 8);  // distance 100 is in the 64+ bucket
}

TEST_CASE("pair features flag shared speakers via the span start tokens") {
  Document doc = pair_doc();
  CHECK(pair_features(1, 0, CandidateSpan{4, 5, 0}, CandidateSpan{3, 3, 1}, doc, false)
            .same_speaker == 1);
  CHECK(pair_features(1, 0, CandidateSpan{4, 5, 0}, CandidateSpan{0, 2, 1}, doc, false)
            .same_speaker == 0);
}

TEST_CASE("token-distance mode measures the gap between spans") {
  Document doc = pair_doc();
  CandidateSpan i{5, 6, 0}, j{0, 1, 1};
  CHECK(pair_features(3, 1, i, j, doc, true).bucket == distance_bucket(4));  // 5 - 1
  CandidateSpan adjacent{2, 3, 2};
  CHECK(pair_features(3, 1, adjacent, j, doc, true).bucket == distance_bucket(1));
}

TEST_CASE("pair features require the antecedent to precede the mention") {
  Document doc = pair_doc();
  CandidateSpan i{3, 3, 0}, j{5, 5, 1};
  CHECK_THROWS_AS(pair_features(2, 2, i, j, doc, false), DataError);
  CHECK_THROWS_AS(pair_features(2, 4, i, j, doc, false), DataError);
}

TEST_CASE("zero parameters give a zero antecedent score") {
  Rng rng(83);
  const int D = 8, H = 3;
  TensorD x = rand_t({D}, rng);
  CHECK(ante_score_with(x, TensorD::zeros({D, H}), TensorD::zeros({H}), TensorD::zeros({H})) ==
        0.0);
}

TEST_CASE("a zero mention representation zeroes the product block") {
  Graph<double> g;
  Rng rng(89);
  const int S = 4;
  NodeId mi = g.constant(TensorD::zeros({S}));
  NodeId mj = g.constant(rand_t({S}, rng));
  NodeId phi = g.constant(rand_t({3}, rng));
  NodeId pair = g.concat({mi, mj, g.mul(mi, mj), phi});
  const TensorD& v = g.val(pair);
  REQUIRE(v.size() == 3 * S + 3);
  for (int d = 0; d < S; ++d) CHECK(v.at(2 * S + d) == 0.0);
}

TEST_CASE("antecedent score matches an independent matrix-chain evaluation") {
  Rng rng(97);
  for (int round = 0; round < 25; ++round) {
    int D = rng.uniform_int(2, 7);
    int H = rng.uniform_int(2, 5);
    TensorD x = rand_t({D}, rng);
    TensorD w0 = rand_t({D, H}, rng), b0 = rand_t({H}, rng), out = rand_t({H}, rng);
    double want = 0.0;
    for (int j = 0; j < H; ++j) {
      double z = b0.at(j);
      for (int i = 0; i < D; ++i) z += x.at(i) * w0.at(i, j);
      want += std::max(0.0, z) * out.at(j);
    }
    CHECK(ante_score_with(x, w0, b0, out) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("the assembled score row is the three-term sum with a zero dummy") {
  Graph<double> g;
  NodeId sa = g.constant(TensorD::vec({0.5}));
  NodeId smi = g.constant(TensorD::vec({1.0}));
  NodeId smj = g.constant(TensorD::vec({2.0}));
  NodeId eps = g.constant(TensorD::vec({0.0}));
  NodeId row = g.concat({eps, g.add(g.add(sa, smj), smi)});
  CHECK(g.val(row).at(0) == 0.0);
  CHECK(g.val(row).at(1) == 3.5);

  NodeId zero_row = g.concat({eps, g.add(g.add(g.constant(TensorD::vec({0.0})),
                                               g.constant(TensorD::vec({0.0}))),
                                         g.constant(TensorD::vec({0.0})))});
  CHECK(g.val(zero_row).at(1) == 0.0);
}

TEST_CASE("antecedent distribution softmaxes the score row") {
  Graph<double> g;
  NodeId only_eps = g.softmax(g.constant(TensorD::vec({0.0})));
  CHECK(g.val(only_eps).at(0) == 1.0);

  NodeId even = g.softmax(g.constant(TensorD::vec({0.0, 0.0})));
  CHECK(g.val(even).at(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g.val(even).at(1) == doctest::Approx(0.5).epsilon(1e-12));

  NodeId skew = g.softmax(g.constant(TensorD::vec({0.0, 1.0})));
  CHECK(g.val(skew).at(1) == doctest::Approx(0.73106).epsilon(1e-4));

  CHECK_THROWS_AS(g.softmax(g.constant(TensorD::zeros({0}))), DataError);
}

TEST_CASE("shifting a score row by a constant leaves the distribution alone") {
  Rng rng(101);
  for (int round = 0; round < 100; ++round) {
    int n = rng.uniform_int(1, 8);
    TensorD row = rand_t({n}, rng, -4.0, 4.0);
    double c = rng.uniform(-10.0, 10.0);
    TensorD shifted = row;
    for (auto& v : shifted.data) v += c;

    Graph<double> g;
    TensorD p = g.val(g.softmax(g.constant(row)));
    TensorD q = g.val(g.softmax(g.constant(shifted)));
    for (int i = 0; i < n; ++i) CHECK(p.at(i) == doctest::Approx(q.at(i)).epsilon(1e-9));

    std::vector<double> pv(p.data.begin(), p.data.end());
    std::vector<double> qv(q.data.begin(), q.data.end());
    CHECK(pick_antecedent(pv) == pick_antecedent(qv));
  }
}

TEST_CASE("argmax ties prefer the dummy, then the nearest antecedent") {
  CHECK(pick_antecedent({1.0}) == -1);
  CHECK(pick_antecedent({0.5, 0.5}) == -1);
  CHECK(pick_antecedent({0.2, 0.8}) == 0);
  CHECK(pick_antecedent({0.2, 0.4, 0.4}) == 1);  // tie between candidates: nearest wins
  CHECK(pick_antecedent({0.6, 0.2, 0.2}) == -1);
  CHECK(pick_antecedent({0.1, 0.5, 0.4}) == 0);
}

TEST_CASE("decoding: all-dummy choices produce no clusters") {
  std::vector<CandidateSpan> mentions = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  CHECK(decode_clusters(mentions, {-1, -1, -1}).empty());
}

TEST_CASE("decoding follows links transitively") {
  std::vector<CandidateSpan> mentions = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
  // b -> a, c -> b, d -> dummy
  auto clusters = decode_clusters(mentions, {-1, 0, 1, -1});
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0] == std::vector<Span>{Span{0, 0}, Span{1, 1}, Span{2, 2}});

  // b -> a, d -> c
  clusters = decode_clusters(mentions, {-1, 0, -1, 2});
  REQUIRE(clusters.size() == 2);
  CHECK(clusters[0] == std::vector<Span>{Span{0, 0}, Span{1, 1}});
  CHECK(clusters[1] == std::vector<Span>{Span{2, 2}, Span{3, 3}});
}

TEST_CASE("decoding rejects forward links") {
  std::vector<CandidateSpan> mentions = {{0, 0, 0}, {1, 1, 1}};
  CHECK_THROWS_AS(decode_clusters(mentions, {1, -1}), DataError);
  CHECK_THROWS_AS(decode_clusters(mentions, {0, -1}), DataError);
}

TEST_CASE("decoded output is always a valid partition") {
  Rng rng(103);
  for (int round = 0; round < 200; ++round) {
    int n = rng.uniform_int(1, 12);
    std::vector<CandidateSpan> mentions;
    for (int i = 0; i < n; ++i) mentions.push_back(CandidateSpan{2 * i, 2 * i + 1, i});
    std::vector<int> links;
    for (int i = 0; i < n; ++i) links.push_back(rng.uniform_int(-1, i - 1));
    auto clusters = decode_clusters(mentions, links);

    std::vector<Span> seen;
    for (const auto& cluster : clusters) {
      CHECK(cluster.size() >= 2);
      CHECK(std::is_sorted(cluster.begin(), cluster.end()));
      for (const Span& s : cluster) seen.push_back(s);
    }
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
  }
}

TEST_CASE("stored pair scores decompose the assembled score row exactly") {
  Document doc = tiny_training_doc();
  RunConfig config;
  set_config_value(config, "embedding_dim", "6");
  set_config_value(config, "hidden_dim", "3");
  set_config_value(config, "attention_dim", "4");
  set_config_value(config, "ffnn_hidden", "5");
  set_config_value(config, "feat_dim", "2");
  set_config_value(config, "max_width", "3");
  set_config_value(config, "span_ratio", "0.5");
  ModelDims dims = dims_from(config);
  ParamStore store = init_params(dims, 7);
  auto provider = EmbeddingProvider::hashed(dims.emb, 7);

  Graph<float> g;
  GraphParams<float> P = register_params(g, store);
  DocForward<float> fwd = forward_document(g, P, doc, provider, dims, options_from(config));
  REQUIRE(!fwd.p_rows.empty());

  const Tensor& sm = g.val(fwd.sm_kept);
  bool saw_candidates = false;
  for (std::size_t i = 0; i < fwd.score_rows.size(); ++i) {
    const Tensor& row = g.val(fwd.score_rows[i]);
    CHECK(row.at(0) == 0.0f);  // dummy antecedent score pinned at zero
    if (fwd.cand[i].empty()) continue;
    saw_candidates = true;
    const Tensor& sa = g.val(fwd.sa_rows[i]);
    for (std::size_t p = 0; p < fwd.cand[i].size(); ++p) {
      float recomposed = (sa.at(static_cast<int>(p)) +
                          sm.at(fwd.cand[i][p])) +
                         sm.at(static_cast<int>(i));
      CHECK(row.at(static_cast<int>(p) + 1) == recomposed);
    }
  }
  CHECK(saw_candidates);
}

TEST_CASE("document scoring is deterministic") {
  Document doc = tiny_training_doc();
  RunConfig config;
  set_config_value(config, "embedding_dim", "5");
  set_config_value(config, "hidden_dim", "2");
  set_config_value(config, "attention_dim", "3");
  set_config_value(config, "ffnn_hidden", "4");
  set_config_value(config, "max_width", "3");
  ModelDims dims = dims_from(config);
  ParamStore store = init_params(dims, 13);
  auto provider = EmbeddingProvider::hashed(dims.emb, 13);

  auto run_once = [&]() {
    Graph<float> g;
    GraphParams<float> P = register_params(g, store);
    DocForward<float> fwd = forward_document(g, P, doc, provider, dims, options_from(config));
    std::vector<float> flat;
    for (NodeId row : fwd.p_rows) {
      const Tensor& p = g.val(row);
      flat.insert(flat.end(), p.data.begin(), p.data.end());
    }
    return flat;
  };

  std::vector<float> a = run_once();
  std::vector<float> b = run_once();
  REQUIRE(a.size() == b.size());
  REQUIRE(!a.empty());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

TEST_SUITE_END();
