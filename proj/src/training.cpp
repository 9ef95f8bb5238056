#include "training.hpp"

#include <cmath>
#include <map>

namespace cspan {

std::vector<std::vector<int>> gold_antecedent_sets(const Document& doc,
                                                   const std::vector<CandidateSpan>& spans,
                                                   const std::vector<int>& kept,
                                                   const std::vector<std::vector<int>>& cand) {
  std::map<Span, int> cluster_of;
  for (std::size_t c = 0; c < doc.gold_clusters.size(); ++c)
    for (const Span& s : doc.gold_clusters[c]) cluster_of[s] = static_cast<int>(c);

  std::vector<int> mention_cluster;
  for (int idx : kept) {
    const CandidateSpan& s = spans[static_cast<std::size_t>(idx)];
    auto it = cluster_of.find(Span{s.start, s.end});
    mention_cluster.push_back(it == cluster_of.end() ? -1 : it->second);
  }

  std::vector<std::vector<int>> gold(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (mention_cluster[i] >= 0) {
      for (std::size_t p = 0; p < cand[i].size(); ++p)
        if (mention_cluster[static_cast<std::size_t>(cand[i][p])] == mention_cluster[i])
          gold[i].push_back(static_cast<int>(p) + 1);
    }
    if (gold[i].empty()) gold[i] = {0};
  }
  return gold;
}

LossOptions loss_options_from(const RunConfig& config) {
  LossOptions opt;
  opt.neg_term = config.neg_term;
  opt.neg_term_weight = config.neg_term_weight;
  opt.prob_floor = config.prob_floor;
  return opt;
}

Optimizer Optimizer::sgd(double lr) {
  Optimizer o;
  o.kind_ = "sgd";
  o.lr_ = lr;
  return o;
}

Optimizer Optimizer::adam(double lr) {
  Optimizer o;
  o.kind_ = "adam";
  o.lr_ = lr;
  return o;
}

void Optimizer::step(ParamStore& params, const std::unordered_map<std::string, Tensor>& grads,
                     double clip_norm) {
  double sq = 0.0;
  for (const std::string& name : params.names()) {
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    for (float gv : it->second.data) sq += static_cast<double>(gv) * static_cast<double>(gv);
  }
  double norm = std::sqrt(sq);
  double scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;

  if (kind_ == "adam") ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

  for (const std::string& name : params.names()) {
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    Tensor& p = params.at(name);
    const Tensor& gt = it->second;
    if (!p.same_shape(gt))
      throw DataError("gradient shape mismatch for parameter: " + name);
    if (kind_ == "sgd") {
      for (std::size_t i = 0; i < p.data.size(); ++i)
        p.data[i] = static_cast<float>(static_cast<double>(p.data[i]) -
                                       lr_ * scale * static_cast<double>(gt.data[i]));
      continue;
    }
    Tensor& m = m_.try_emplace(name, Tensor::zeros(p.shape)).first->second;
    Tensor& v = v_.try_emplace(name, Tensor::zeros(p.shape)).first->second;
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      double gv = scale * static_cast<double>(gt.data[i]);
      double mi = beta1_ * static_cast<double>(m.data[i]) + (1.0 - beta1_) * gv;
      double vi = beta2_ * static_cast<double>(v.data[i]) + (1.0 - beta2_) * gv * gv;
      m.data[i] = static_cast<float>(mi);
      v.data[i] = static_cast<float>(vi);
      double update = lr_ * (mi / bc1) / (std::sqrt(vi / bc2) + eps_);
      p.data[i] = static_cast<float>(static_cast<double>(p.data[i]) - update);
    }
  }
}

}  // namespace cspan
