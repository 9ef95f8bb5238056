#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "model.hpp"

namespace cspan {

// Per kept mention: positions inside its probability row ([0] = epsilon,
// [p >= 1] = cand[p-1]) pointing at candidates from the mention's gold
// cluster; {0} when the mention has no surviving preceding gold mate.
std::vector<std::vector<int>> gold_antecedent_sets(const Document& doc,
                                                   const std::vector<CandidateSpan>& spans,
                                                   const std::vector<int>& kept,
                                                   const std::vector<std::vector<int>>& cand);

struct LossOptions {
  bool neg_term = true;
  double neg_term_weight = 1.0;
  double prob_floor = 1e-7;
};

LossOptions loss_options_from(const RunConfig& config);

// L = sum_i [ -log(P_gold,i) + neg_term * weight * log(max(1 - P_gold,i, floor)) ]
// with P_gold,i the summed probability of the mention's gold positions.
// Mentions whose row has no non-gold candidate contribute no second term.
// With neg_term off this is exactly the marginal negative log-likelihood.
template <typename T>
NodeId doc_loss(Graph<T>& g, const std::vector<NodeId>& p_rows,
                const std::vector<std::vector<int>>& gold_positions, const LossOptions& opt) {
  if (p_rows.size() != gold_positions.size())
    throw DataError("loss: row/gold count mismatch");
  NodeId total = g.constant(TensorT<T>::scalar(T(0)));
  for (std::size_t i = 0; i < p_rows.size(); ++i) {
    // Read the row before any node is added below: g.val returns a reference
    // into the node vector, which node creation may reallocate.
    const auto& row = g.val(p_rows[i]);
    const std::size_t row_len = row.size();
    double total_p = 0.0;
    for (T v : row.data) total_p += static_cast<double>(v);
    if (std::fabs(total_p - 1.0) > 1e-3)
      throw DataError("loss: probability row " + std::to_string(i) + " is not normalized");
    if (gold_positions[i].empty()) throw DataError("loss: empty gold set");
    NodeId pg = g.sum(g.gather(p_rows[i], gold_positions[i]));
    total = g.add(total, g.neg(g.log(g.clamp_min(pg, opt.prob_floor))));
    bool has_non_gold = gold_positions[i].size() < row_len;
    if (opt.neg_term && has_non_gold) {
      NodeId one = g.constant(TensorT<T>::scalar(T(1)));
      NodeId q = g.clamp_min(g.sub(one, pg), opt.prob_floor);
      total = g.add(total, g.scale(g.log(q), opt.neg_term_weight));
    }
  }
  return total;
}

// Plain SGD or Adam over a ParamStore, with global-norm gradient clipping.
class Optimizer {
 public:
  static Optimizer sgd(double lr);
  static Optimizer adam(double lr);

  // Applies one update. Missing gradients count as zero. clip_norm <= 0
  // disables clipping.
  void step(ParamStore& params, const std::unordered_map<std::string, Tensor>& grads,
            double clip_norm);

 private:
  std::string kind_;
  double lr_ = 0.0;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  std::unordered_map<std::string, Tensor> m_;
  std::unordered_map<std::string, Tensor> v_;
};

// Pulls per-parameter gradients out of a graph after backward().
template <typename T>
std::unordered_map<std::string, Tensor> collect_gradients(const Graph<T>& g,
                                                          const GraphParams<T>& P) {
  std::unordered_map<std::string, Tensor> grads;
  for (const auto& [name, id] : P.ids)
    grads[name] = g.grad_or_zero(id).template cast<float>();
  return grads;
}

}  // namespace cspan
