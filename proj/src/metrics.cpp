#include "metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "errors.hpp"

namespace cspan {

namespace {

// Span -> cluster index; throws if a mention appears in two clusters.
std::map<Span, int> mention_map(const ClusterSet& side, const char* side_name) {
  std::map<Span, int> m;
  for (std::size_t c = 0; c < side.size(); ++c)
    for (const Span& s : side[c])
      if (!m.emplace(s, static_cast<int>(c)).second)
        throw DataError(std::string("overlapping clusters in ") + side_name + " at span (" +
                        std::to_string(s.start) + "," + std::to_string(s.end) + ")");
  return m;
}

// One direction of MUC: links recovered in `target` clusters after
// partitioning them by `other`.
void muc_direction(const ClusterSet& target, const std::map<Span, int>& other, double& num,
                   double& den) {
  for (const auto& cluster : target) {
    std::set<int> parts;
    int absent = 0;
    for (const Span& s : cluster) {
      auto it = other.find(s);
      if (it == other.end())
        ++absent;  // its own singleton part
      else
        parts.insert(it->second);
    }
    num += static_cast<double>(cluster.size()) -
           static_cast<double>(parts.size() + static_cast<std::size_t>(absent));
    den += static_cast<double>(cluster.size()) - 1.0;
  }
}

// One direction of B^3: mean overlap ratio over `target`'s own mentions.
void b3_direction(const ClusterSet& target, const std::map<Span, int>& other, double& num,
                  double& den) {
  for (const auto& cluster : target) {
    std::map<int, int> overlap;
    for (const Span& s : cluster) {
      auto it = other.find(s);
      if (it != other.end()) ++overlap[it->second];
    }
    for (const Span& s : cluster) {
      auto it = other.find(s);
      double inter = (it == other.end()) ? 1.0 : static_cast<double>(overlap[it->second]);
      num += inter / static_cast<double>(cluster.size());
      den += 1.0;
    }
  }
}

}  // namespace

PRF finalize(const MetricTotals& t) {
  PRF r;
  bool gold_empty = t.recall_den == 0.0;
  bool pred_empty = t.precision_den == 0.0;
  r.precision = !pred_empty ? t.precision_num / t.precision_den : (gold_empty ? 1.0 : 0.0);
  r.recall = !gold_empty ? t.recall_num / t.recall_den : (pred_empty ? 1.0 : 0.0);
  r.f1 = (r.precision + r.recall > 0.0)
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

void muc_accumulate(const ClusterSet& gold, const ClusterSet& pred, MetricTotals& t) {
  auto gold_map = mention_map(gold, "gold");
  auto pred_map = mention_map(pred, "prediction");
  muc_direction(gold, pred_map, t.recall_num, t.recall_den);
  muc_direction(pred, gold_map, t.precision_num, t.precision_den);
}

void b_cubed_accumulate(const ClusterSet& gold, const ClusterSet& pred, MetricTotals& t) {
  auto gold_map = mention_map(gold, "gold");
  auto pred_map = mention_map(pred, "prediction");
  b3_direction(gold, pred_map, t.recall_num, t.recall_den);
  b3_direction(pred, gold_map, t.precision_num, t.precision_den);
}

void ceaf_phi4_accumulate(const ClusterSet& gold, const ClusterSet& pred, MetricTotals& t) {
  mention_map(gold, "gold");
  mention_map(pred, "prediction");
  t.recall_den += static_cast<double>(gold.size());
  t.precision_den += static_cast<double>(pred.size());
  if (gold.empty() || pred.empty()) return;
  std::vector<std::vector<double>> w(gold.size(), std::vector<double>(pred.size(), 0.0));
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::set<Span> gi(gold[i].begin(), gold[i].end());
    for (std::size_t j = 0; j < pred.size(); ++j) {
      int inter = 0;
      for (const Span& s : pred[j])
        if (gi.count(s)) ++inter;
      w[i][j] = 2.0 * inter / static_cast<double>(gold[i].size() + pred[j].size());
    }
  }
  double best = max_assignment(w);
  t.recall_num += best;
  t.precision_num += best;
}

PRF muc(const ClusterSet& gold, const ClusterSet& pred) {
  MetricTotals t;
  muc_accumulate(gold, pred, t);
  return finalize(t);
}

PRF b_cubed(const ClusterSet& gold, const ClusterSet& pred) {
  MetricTotals t;
  b_cubed_accumulate(gold, pred, t);
  return finalize(t);
}

PRF ceaf_phi4(const ClusterSet& gold, const ClusterSet& pred) {
  MetricTotals t;
  ceaf_phi4_accumulate(gold, pred, t);
  return finalize(t);
}

double conll_avg(double f1_muc, double f1_b3, double f1_ceaf) {
  return (f1_muc + f1_b3 + f1_ceaf) / 3.0;
}

double max_assignment(const std::vector<std::vector<double>>& weights) {
  if (weights.empty() || weights[0].empty()) return 0.0;
  // Minimize negated weights with the potentials form of the Hungarian
  // method; rows must not outnumber columns, so transpose when needed.
  std::size_t rows = weights.size(), cols = weights[0].size();
  auto at = [&](std::size_t i, std::size_t j) {
    return rows <= cols ? weights[i][j] : weights[j][i];
  };
  std::size_t n = std::min(rows, cols), m = std::max(rows, cols);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = -at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) total += at(p[j] - 1, j - 1);
  return total;
}

ScoreReport score_corpus(const std::vector<ClusterSet>& gold,
                         const std::vector<ClusterSet>& pred) {
  if (gold.size() != pred.size())
    throw DataError("gold/prediction document count mismatch");
  MetricTotals tm, tb, tc;
  for (std::size_t d = 0; d < gold.size(); ++d) {
    muc_accumulate(gold[d], pred[d], tm);
    b_cubed_accumulate(gold[d], pred[d], tb);
    ceaf_phi4_accumulate(gold[d], pred[d], tc);
  }
  ScoreReport r;
  r.muc = finalize(tm);
  r.b_cubed = finalize(tb);
  r.ceaf_phi4 = finalize(tc);
  r.conll = conll_avg(r.muc.f1, r.b_cubed.f1, r.ceaf_phi4.f1);
  return r;
}

std::string format_report(const ScoreReport& r) {
  char buf[256];
  std::string out;
  auto line = [&](const char* name, const PRF& p) {
    std::snprintf(buf, sizeof(buf), "%-9s P=%.4f R=%.4f F1=%.4f\n", name, p.precision, p.recall,
                  p.f1);
    out += buf;
  };
  line("MUC", r.muc);
  line("B3", r.b_cubed);
  line("CEAF_phi4", r.ceaf_phi4);
  std::snprintf(buf, sizeof(buf), "CoNLL_avg F1=%.4f\n", r.conll);
  out += buf;
  return out;
}

}  // namespace cspan
