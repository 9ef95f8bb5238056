#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "metrics.hpp"
#include "rng.hpp"

using namespace cspan;

namespace {

Span sp(int id) { return Span{id, id}; }

// Builds a cluster set from mention ids; mention i becomes span (i, i).
ClusterSet cs(const std::vector<std::vector<int>>& ids) {
  ClusterSet out;
  for (const auto& cluster : ids) {
    std::vector<Span> c;
    for (int id : cluster) c.push_back(sp(id));
    out.push_back(c);
  }
  return out;
}

// Independent MUC oracle: per gold cluster, links kept = size minus the
// number of blocks the cluster falls into under the other side, with
// absent mentions forming their own blocks.
double muc_half(const ClusterSet& target, const ClusterSet& other, double& num, double& den) {
  std::map<Span, int> label;
  for (std::size_t c = 0; c < other.size(); ++c)
    for (const Span& s : other[c]) label[s] = static_cast<int>(c);
  num = 0.0;
  den = 0.0;
  for (const auto& cluster : target) {
    std::set<int> blocks;
    int lone = 0;
    for (const Span& s : cluster) {
      auto it = label.find(s);
      if (it == label.end())
        ++lone;
      else
        blocks.insert(it->second);
    }
    num += static_cast<double>(cluster.size()) - static_cast<double>(blocks.size()) - lone;
    den += static_cast<double>(cluster.size()) - 1.0;
  }
  return den > 0.0 ? num / den : 0.0;
}

PRF muc_oracle(const ClusterSet& gold, const ClusterSet& pred) {
  PRF r;
  double rn, rd, pn, pd;
  muc_half(gold, pred, rn, rd);
  muc_half(pred, gold, pn, pd);
  r.recall = rd > 0.0 ? rn / rd : (pd == 0.0 ? 1.0 : 0.0);
  r.precision = pd > 0.0 ? pn / pd : (rd == 0.0 ? 1.0 : 0.0);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                      : 0.0;
  return r;
}

// Independent B^3 oracle: literal per-mention intersection ratios, with a
// missing mention treated as a singleton on the other side.
double b3_half(const ClusterSet& target, const ClusterSet& other) {
  std::map<Span, std::set<Span>> cluster_of;
  for (const auto& cluster : other) {
    std::set<Span> members(cluster.begin(), cluster.end());
    for (const Span& s : cluster) cluster_of[s] = members;
  }
  double sum = 0.0;
  double count = 0.0;
  for (const auto& cluster : target) {
    std::set<Span> mine(cluster.begin(), cluster.end());
    for (const Span& s : cluster) {
      std::set<Span> theirs{s};
      auto it = cluster_of.find(s);
      if (it != cluster_of.end()) theirs = it->second;
      int inter = 0;
      for (const Span& t : theirs)
        if (mine.count(t)) ++inter;
      sum += static_cast<double>(inter) / static_cast<double>(mine.size());
      count += 1.0;
    }
  }
  return count > 0.0 ? sum / count : 0.0;
}

PRF b3_oracle(const ClusterSet& gold, const ClusterSet& pred) {
  PRF r;
  bool ge = true, pe = true;
  for (const auto& c : gold) ge = ge && c.empty();
  for (const auto& c : pred) pe = pe && c.empty();
  ge = ge || gold.empty();
  pe = pe || pred.empty();
  r.recall = !ge ? b3_half(gold, pred) : (pe ? 1.0 : 0.0);
  r.precision = !pe ? b3_half(pred, gold) : (ge ? 1.0 : 0.0);
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                      : 0.0;
  return r;
}

double phi4(const std::vector<Span>& a, const std::vector<Span>& b) {
  std::set<Span> sa(a.begin(), a.end());
  int inter = 0;
  for (const Span& s : b)
    if (sa.count(s)) ++inter;
  return 2.0 * inter / static_cast<double>(a.size() + b.size());
}

// Exhaustive search over injective alignments of the smaller side.
double best_alignment(const ClusterSet& gold, const ClusterSet& pred) {
  const bool gold_small = gold.size() <= pred.size();
  const ClusterSet& small = gold_small ? gold : pred;
  const ClusterSet& big = gold_small ? pred : gold;
  std::vector<bool> used(big.size(), false);
  double best = 0.0;
  auto rec = [&](auto&& self, std::size_t i, double acc) -> void {
    if (i == small.size()) {
      best = std::max(best, acc);
      return;
    }
    self(self, i + 1, acc);  // leave small[i] unmatched
    for (std::size_t j = 0; j < big.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      self(self, i + 1, acc + phi4(small[i], big[j]));
      used[j] = false;
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

PRF ceaf_oracle(const ClusterSet& gold, const ClusterSet& pred) {
  PRF r;
  if (gold.empty() || pred.empty()) {
    r.recall = gold.empty() && pred.empty() ? 1.0 : 0.0;
    r.precision = r.recall;
    r.f1 = r.recall;
    return r;
  }
  double total = best_alignment(gold, pred);
  r.recall = total / static_cast<double>(gold.size());
  r.precision = total / static_cast<double>(pred.size());
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                      : 0.0;
  return r;
}

// Partitions a random subset of `universe` mentions into at most
// `max_clusters` non-empty clusters.
ClusterSet random_clustering(Rng& rng, int universe, int max_clusters) {
  std::vector<int> ids;
  for (int i = 0; i < universe; ++i)
    if (rng.uniform(0.0, 1.0) < 0.8) ids.push_back(i);
  rng.shuffle(ids);
  int n_clusters = static_cast<int>(rng.uniform_int(1, max_clusters));
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(n_clusters));
  for (int id : ids)
    buckets[static_cast<std::size_t>(rng.uniform_int(0, n_clusters - 1))].push_back(id);
  std::vector<std::vector<int>> kept;
  for (auto& b : buckets)
    if (!b.empty()) kept.push_back(b);
  return cs(kept);
}

void check_prf(const PRF& got, const PRF& want, double tol) {
  CHECK(got.precision == doctest::Approx(want.precision).epsilon(tol));
  CHECK(got.recall == doctest::Approx(want.recall).epsilon(tol));
  CHECK(got.f1 == doctest::Approx(want.f1).epsilon(tol));
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("identical clusterings score a perfect 1 on every metric") {
  ClusterSet g = cs({{0, 1, 2}, {3, 4}, {5}});
  for (PRF r : {muc(g, g), b_cubed(g, g), ceaf_phi4(g, g)}) {
    CHECK(r.precision == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.recall == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("muc worked example splits links evenly") {
  ClusterSet gold = cs({{0, 1, 2}});
  ClusterSet pred = cs({{0, 1}, {2, 3}});
  PRF r = muc(gold, pred);
  CHECK(r.precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.f1 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("muc scores zero against an empty prediction") {
  ClusterSet gold = cs({{0, 1, 2}, {3, 4}});
  PRF r = muc(gold, {});
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
}

TEST_CASE("b_cubed worked example") {
  ClusterSet gold = cs({{0, 1, 2}, {3}});
  ClusterSet pred = cs({{0, 1}, {2, 3}});
  PRF r = b_cubed(gold, pred);
  CHECK(r.precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(r.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.f1 == doctest::Approx(0.70588).epsilon(1e-4));
}

TEST_CASE("b_cubed all-singleton prediction of one gold pair") {
  ClusterSet gold = cs({{0, 1}});
  ClusterSet pred = cs({{0}, {1}});
  PRF r = b_cubed(gold, pred);
  CHECK(r.precision == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("ceaf_phi4 worked example picks the best alignment") {
  ClusterSet gold = cs({{0, 1, 2}, {3}});
  ClusterSet pred = cs({{0, 1}, {2, 3}});
  // Best alignment pairs {0,1,2} with {0,1} (4/5) and {3} with {2,3} (2/3).
  double expect = (0.8 + 2.0 / 3.0) / 2.0;
  PRF r = ceaf_phi4(gold, pred);
  CHECK(r.precision == doctest::Approx(expect).epsilon(1e-12));
  CHECK(r.recall == doctest::Approx(expect).epsilon(1e-12));
  CHECK(r.f1 == doctest::Approx(0.73333).epsilon(1e-4));
}

TEST_CASE("ceaf_phi4 empty prediction scores zero, both empty scores one") {
  ClusterSet gold = cs({{0, 1}});
  PRF r = ceaf_phi4(gold, {});
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
  for (PRF both : {muc({}, {}), b_cubed({}, {}), ceaf_phi4({}, {})}) {
    CHECK(both.precision == 1.0);
    CHECK(both.recall == 1.0);
    CHECK(both.f1 == 1.0);
  }
}

TEST_CASE("conll average reproduces published row figures") {
  struct Row {
    double m, b, c, avg;
  };
  const Row rows[] = {
      {80.9, 71.3, 68.0, 73.4}, {80.8, 70.6, 67.5, 73.0}, {77.1, 66.0, 62.7, 68.6},
      {80.0, 70.0, 66.4, 72.1}, {75.8, 65.0, 60.8, 67.2},
  };
  for (const Row& r : rows) {
    INFO("row " << r.m << "/" << r.b << "/" << r.c);
    CHECK(std::fabs(conll_avg(r.m, r.b, r.c) - r.avg) < 0.05);
  }
  CHECK(conll_avg(0.3, 0.6, 0.9) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("a mention in two clusters on one side is rejected") {
  ClusterSet bad = cs({{0, 1}, {1, 2}});
  ClusterSet ok = cs({{0, 1}});
  CHECK_THROWS_WITH_AS(muc(bad, ok), "overlapping clusters in gold at span (1,1)", DataError);
  CHECK_THROWS_WITH_AS(muc(ok, bad), "overlapping clusters in prediction at span (1,1)",
                       DataError);
  CHECK_THROWS_AS(b_cubed(bad, ok), DataError);
  CHECK_THROWS_AS(ceaf_phi4(ok, bad), DataError);
}

TEST_CASE("hungarian assignment matches exhaustive search on random matrices") {
  Rng rng(404);
  for (int round = 0; round < 200; ++round) {
    int rows = static_cast<int>(rng.uniform_int(1, 7));
    int cols = static_cast<int>(rng.uniform_int(1, 7));
    std::vector<std::vector<double>> w(static_cast<std::size_t>(rows),
                                       std::vector<double>(static_cast<std::size_t>(cols)));
    for (auto& row : w)
      for (double& x : row) x = rng.uniform(0.0, 1.0);

    double best = 0.0;
    std::vector<bool> used(static_cast<std::size_t>(cols), false);
    auto rec = [&](auto&& self, int i, double acc) -> void {
      if (i == rows) {
        best = std::max(best, acc);
        return;
      }
      self(self, i + 1, acc);
      for (int j = 0; j < cols; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        used[static_cast<std::size_t>(j)] = true;
        self(self, i + 1, acc + w[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        used[static_cast<std::size_t>(j)] = false;
      }
    };
    rec(rec, 0, 0.0);
    INFO("round " << round << " " << rows << "x" << cols);
    CHECK(max_assignment(w) == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("hungarian assignment edge cases") {
  CHECK(max_assignment({}) == 0.0);
  CHECK(max_assignment({{0.25}}) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(max_assignment({{0.0, 0.0}, {0.0, 0.0}}) == doctest::Approx(0.0).epsilon(1e-12));
  // A greedy pick of 0.9 forfeits the better total 0.8 + 0.8.
  CHECK(max_assignment({{0.9, 0.8}, {0.8, 0.0}}) == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("all three metrics agree with exhaustive oracles on random clusterings") {
  Rng rng(2025);
  for (int round = 0; round < 200; ++round) {
    int universe = static_cast<int>(rng.uniform_int(0, 12));
    ClusterSet gold = random_clustering(rng, universe, 5);
    ClusterSet pred = random_clustering(rng, universe, 5);
    INFO("round " << round);
    check_prf(muc(gold, pred), muc_oracle(gold, pred), 1e-9);
    check_prf(b_cubed(gold, pred), b3_oracle(gold, pred), 1e-9);
    check_prf(ceaf_phi4(gold, pred), ceaf_oracle(gold, pred), 1e-9);
  }
}

TEST_CASE("metrics ignore cluster order and mention order within clusters") {
  Rng rng(77);
  for (int round = 0; round < 100; ++round) {
    ClusterSet gold = random_clustering(rng, 10, 4);
    ClusterSet pred = random_clustering(rng, 10, 4);
    ClusterSet gold2 = gold;
    ClusterSet pred2 = pred;
    rng.shuffle(gold2);
    rng.shuffle(pred2);
    for (auto& c : gold2) rng.shuffle(c);
    for (auto& c : pred2) rng.shuffle(c);
    INFO("round " << round);
    check_prf(muc(gold, pred), muc(gold2, pred2), 1e-12);
    check_prf(b_cubed(gold, pred), b_cubed(gold2, pred2), 1e-12);
    check_prf(ceaf_phi4(gold, pred), ceaf_phi4(gold2, pred2), 1e-12);
  }
}

TEST_CASE("swapping gold and prediction swaps precision with recall") {
  Rng rng(91);
  for (int round = 0; round < 100; ++round) {
    ClusterSet a = random_clustering(rng, 10, 4);
    ClusterSet b = random_clustering(rng, 10, 4);
    INFO("round " << round);
    for (auto metric : {muc, b_cubed, ceaf_phi4}) {
      PRF fwd = metric(a, b);
      PRF rev = metric(b, a);
      CHECK(fwd.precision == doctest::Approx(rev.recall).epsilon(1e-12));
      CHECK(fwd.recall == doctest::Approx(rev.precision).epsilon(1e-12));
      CHECK(fwd.f1 == doctest::Approx(rev.f1).epsilon(1e-12));
    }
  }
}

TEST_CASE("corpus scoring sums document counts before dividing") {
  std::vector<ClusterSet> gold = {cs({{0, 1, 2}}), cs({{0, 1}})};
  std::vector<ClusterSet> pred = {cs({{0, 1}}), cs({{0, 1}})};
  ScoreReport r = score_corpus(gold, pred);

  MetricTotals tm, tb, tc;
  for (std::size_t d = 0; d < gold.size(); ++d) {
    muc_accumulate(gold[d], pred[d], tm);
    b_cubed_accumulate(gold[d], pred[d], tb);
    ceaf_phi4_accumulate(gold[d], pred[d], tc);
  }
  check_prf(r.muc, finalize(tm), 1e-15);
  check_prf(r.b_cubed, finalize(tb), 1e-15);
  check_prf(r.ceaf_phi4, finalize(tc), 1e-15);
  CHECK(r.conll == doctest::Approx(conll_avg(r.muc.f1, r.b_cubed.f1, r.ceaf_phi4.f1))
                       .epsilon(1e-15));

  // The pooled score is not the mean of per-document scores.
  ScoreReport d0 = score_corpus({gold[0]}, {pred[0]});
  ScoreReport d1 = score_corpus({gold[1]}, {pred[1]});
  CHECK(r.muc.recall != doctest::Approx((d0.muc.recall + d1.muc.recall) / 2.0).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(score_corpus(gold, {pred[0]}),
                       "gold/prediction document count mismatch", DataError);
}

TEST_CASE("report text is fixed-order with four decimals") {
  ScoreReport r;
  r.muc = {0.5, 0.25, 1.0 / 3.0};
  r.b_cubed = {1.0, 1.0, 1.0};
  r.ceaf_phi4 = {0.0, 0.0, 0.0};
  r.conll = conll_avg(r.muc.f1, r.b_cubed.f1, r.ceaf_phi4.f1);
  std::string expect =
      "MUC       P=0.5000 R=0.2500 F1=0.3333\n"
      "B3        P=1.0000 R=1.0000 F1=1.0000\n"
      "CEAF_phi4 P=0.0000 R=0.0000 F1=0.0000\n"
      "CoNLL_avg F1=0.4444\n";
  CHECK(format_report(r) == expect);
}

TEST_SUITE_END();
