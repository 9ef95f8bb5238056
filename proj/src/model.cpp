#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace cspan {

namespace {

bool crossing(const CandidateSpan& a, const CandidateSpan& b) {
  return (a.start < b.start && b.start <= a.end && a.end < b.end) ||
         (b.start < a.start && a.start <= b.end && b.end < a.end);
}

}  // namespace

std::vector<int> prune_mentions(const std::vector<CandidateSpan>& spans,
                                const std::vector<double>& scores, double ratio, int doc_tokens) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw DataError("prune ratio must lie in (0, 1]");
  if (spans.size() != scores.size()) throw DataError("span/score count mismatch");
  const std::size_t budget =
      static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(doc_tokens)));

  std::vector<int> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double sa = scores[static_cast<std::size_t>(a)];
    double sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    const CandidateSpan& ca = spans[static_cast<std::size_t>(a)];
    const CandidateSpan& cb = spans[static_cast<std::size_t>(b)];
    if (ca.start != cb.start) return ca.start < cb.start;
    return ca.end < cb.end;
  });

  std::vector<int> kept;
  for (int idx : order) {
    if (kept.size() >= budget) break;
    const CandidateSpan& s = spans[static_cast<std::size_t>(idx)];
    bool ok = true;
    for (int other : kept)
      if (crossing(s, spans[static_cast<std::size_t>(other)])) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(idx);
  }
  std::sort(kept.begin(), kept.end(), [&](int a, int b) {
    const CandidateSpan& ca = spans[static_cast<std::size_t>(a)];
    const CandidateSpan& cb = spans[static_cast<std::size_t>(b)];
    if (ca.start != cb.start) return ca.start < cb.start;
    return ca.end < cb.end;
  });
  return kept;
}

int distance_bucket(int distance) {
  if (distance < 1) throw DataError("distance bucket needs a positive distance");
  if (distance <= 4) return distance - 1;
  if (distance <= 7) return 4;
  if (distance <= 15) return 5;
  if (distance <= 31) return 6;
  if (distance <= 63) return 7;
  return 8;
}

PairFeatureIds pair_features(int i_index, int j_index, const CandidateSpan& i_span,
                             const CandidateSpan& j_span, const Document& doc,
                             bool token_distance) {
  if (j_index >= i_index) throw DataError("antecedent must precede the mention");
  PairFeatureIds f;
  int d = token_distance ? std::max(1, i_span.start - j_span.end) : i_index - j_index;
  f.bucket = distance_bucket(d);
  int si = doc.speakers[static_cast<std::size_t>(i_span.start)];
  int sj = doc.speakers[static_cast<std::size_t>(j_span.start)];
  f.same_speaker = (si == sj) ? 1 : 0;
  f.genre = doc.genre;
  return f;
}

std::vector<std::pair<int, double>> top_attended_spans(const std::vector<double>& alpha, int k) {
  if (k < 1) throw DataError("top_attended_spans needs k >= 1");
  std::vector<int> order(alpha.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double wa = alpha[static_cast<std::size_t>(a)];
    double wb = alpha[static_cast<std::size_t>(b)];
    if (wa != wb) return wa > wb;
    return a < b;
  });
  std::vector<std::pair<int, double>> out;
  for (int i = 0; i < k && i < static_cast<int>(order.size()); ++i)
    out.emplace_back(order[static_cast<std::size_t>(i)],
                     alpha[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
  return out;
}

std::vector<std::vector<Span>> decode_clusters(const std::vector<CandidateSpan>& mentions,
                                               const std::vector<int>& best_antecedent) {
  if (mentions.size() != best_antecedent.size())
    throw DataError("mention/antecedent count mismatch");
  const int n = static_cast<int>(mentions.size());
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (int i = 0; i < n; ++i) {
    int j = best_antecedent[static_cast<std::size_t>(i)];
    if (j < 0) continue;
    if (j >= i) throw DataError("antecedent link must point backwards");
    parent[static_cast<std::size_t>(find(i))] = find(j);
  }
  std::vector<std::vector<Span>> by_root(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    by_root[static_cast<std::size_t>(find(i))].push_back(
        Span{mentions[static_cast<std::size_t>(i)].start, mentions[static_cast<std::size_t>(i)].end});
  std::vector<std::vector<Span>> clusters;
  for (auto& c : by_root) {
    if (c.size() < 2) continue;
    std::sort(c.begin(), c.end());
    clusters.push_back(std::move(c));
  }
  std::sort(clusters.begin(), clusters.end());
  return clusters;
}

int pick_antecedent(const std::vector<double>& row_values) {
  if (row_values.empty()) throw DataError("empty antecedent row");
  // Position 0 is epsilon; candidates run farthest to nearest. Scan epsilon
  // first, then candidates nearest-first, replacing only on a strict gain, so
  // ties resolve toward epsilon and then toward the nearest antecedent.
  int best = -1;
  double best_v = row_values[0];
  for (int p = static_cast<int>(row_values.size()) - 1; p >= 1; --p) {
    if (row_values[static_cast<std::size_t>(p)] > best_v) {
      best_v = row_values[static_cast<std::size_t>(p)];
      best = p - 1;
    }
  }
  return best;
}

ForwardOptions options_from(const RunConfig& config) {
  ForwardOptions opt;
  opt.max_width = config.max_width;
  opt.span_ratio = config.span_ratio;
  opt.max_antecedents = config.max_antecedents;
  opt.max_attended_spans = config.max_attended_spans;
  opt.refine = config.refine;
  opt.token_distance = config.distance_unit == "token";
  return opt;
}

}  // namespace cspan
