#pragma once

#include <string>
#include <vector>

#include "corpus.hpp"

namespace cspan {

using ClusterSet = std::vector<std::vector<Span>>;

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Running numerators and denominators, so document results aggregate to a
// corpus score by summation before the final division.
struct MetricTotals {
  double recall_num = 0.0;
  double recall_den = 0.0;
  double precision_num = 0.0;
  double precision_den = 0.0;
};

// Division conventions: a vanishing denominator scores 0 on that ratio,
// except that two empty sides score a perfect 1; f1 = 0 when P + R = 0.
PRF finalize(const MetricTotals& t);

// Link-based MUC: recall counts, per gold cluster, the links kept after
// partitioning it by the predicted clustering; precision swaps the roles.
void muc_accumulate(const ClusterSet& gold, const ClusterSet& pred, MetricTotals& t);

// B^3: per-mention overlap ratios, averaged over each side's own mentions;
// mentions absent from the other side count as singletons there.
void b_cubed_accumulate(const ClusterSet& gold, const ClusterSet& pred, MetricTotals& t);

// CEAF with phi4(K, R) = 2|K n R| / (|K| + |R|) under the optimal one-to-one
// cluster alignment; recall divides by |gold|, precision by |pred|.
void ceaf_phi4_accumulate(const ClusterSet& gold, const ClusterSet& pred, MetricTotals& t);

// Single-pair conveniences.
PRF muc(const ClusterSet& gold, const ClusterSet& pred);
PRF b_cubed(const ClusterSet& gold, const ClusterSet& pred);
PRF ceaf_phi4(const ClusterSet& gold, const ClusterSet& pred);

double conll_avg(double f1_muc, double f1_b3, double f1_ceaf);

// Maximum-weight one-to-one assignment over a (possibly rectangular)
// non-negative weight matrix; O(n^3) Hungarian method.
double max_assignment(const std::vector<std::vector<double>>& weights);

struct ScoreReport {
  PRF muc;
  PRF b_cubed;
  PRF ceaf_phi4;
  double conll = 0.0;
};

// Aggregates over parallel per-document cluster sets.
ScoreReport score_corpus(const std::vector<ClusterSet>& gold, const std::vector<ClusterSet>& pred);

// Fixed-order text report, four decimals per figure.
std::string format_report(const ScoreReport& r);

}  // namespace cspan
