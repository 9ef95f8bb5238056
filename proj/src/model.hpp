#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "config.hpp"
#include "corpus.hpp"
#include "embedding.hpp"
#include "graph.hpp"
#include "nn.hpp"
#include "params.hpp"

namespace cspan {

// ---------------------------------------------------------------------------
// Value-level pieces (no autodiff involvement).

// Top ceil(ratio * doc_tokens) spans by score; ties prefer the earlier
// (start, end); spans crossing an already-accepted bracket are skipped in
// score order; the survivors come back in document order.
std::vector<int> prune_mentions(const std::vector<CandidateSpan>& spans,
                                const std::vector<double>& scores, double ratio, int doc_tokens);

// Bucket index for a positive distance: [1],[2],[3],[4],[5-7],[8-15],
// [16-31],[32-63],[64+] -> 0..8.
int distance_bucket(int distance);

struct PairFeatureIds {
  int bucket = 0;
  int same_speaker = 0;
  int genre = 0;
};

// Categorical features for antecedent j of mention i (j strictly precedes i
// in mention order). Distance is the mention-index difference by default, or
// the token gap when token_distance is set.
PairFeatureIds pair_features(int i_index, int j_index, const CandidateSpan& i_span,
                             const CandidateSpan& j_span, const Document& doc,
                             bool token_distance);

// k highest-weight entries, descending; ties prefer the earlier index.
std::vector<std::pair<int, double>> top_attended_spans(const std::vector<double>& alpha, int k);

// Union-find closure over chosen antecedent links (-1 = none); singleton
// clusters are dropped; output clusters and their spans are sorted.
std::vector<std::vector<Span>> decode_clusters(const std::vector<CandidateSpan>& mentions,
                                               const std::vector<int>& best_antecedent);

// Argmax over one scored row [epsilon, candidates...]; ties prefer epsilon,
// then the nearest (latest-listed) antecedent. Returns -1 for epsilon or the
// position in `cand`.
int pick_antecedent(const std::vector<double>& row_values);

// ---------------------------------------------------------------------------
// Graph-level pieces, templated over the storage scalar so the double
// instantiation can back finite-difference checks.

template <typename T>
struct GraphParams {
  std::unordered_map<std::string, NodeId> ids;

  NodeId at(const std::string& name) const {
    auto it = ids.find(name);
    if (it == ids.end()) throw DataError("model parameter not registered: " + name);
    return it->second;
  }
};

template <typename T>
GraphParams<T> register_params(Graph<T>& g, const ParamStore& store) {
  GraphParams<T> P;
  for (const std::string& name : store.names())
    P.ids[name] = g.leaf(store.at(name).template cast<T>());
  return P;
}

// FFNN with ReLU hidden layers under `prefix`.ffnn.w{l}/b{l}, then the final
// linear row `prefix`.out. Accepts a single vector or a batch matrix.
template <typename T>
NodeId ffnn_from(Graph<T>& g, const GraphParams<T>& P, const std::string& prefix, NodeId x,
                 int depth) {
  std::vector<NodeId> ws, bs;
  for (int l = 0; l < depth; ++l) {
    ws.push_back(P.at(prefix + ".ffnn.w" + std::to_string(l)));
    bs.push_back(P.at(prefix + ".ffnn.b" + std::to_string(l)));
  }
  return ffnn_score(g, x, ws, bs, P.at(prefix + ".out"));
}

// Character CNN over one token: byte embeddings, windows of 3/4/5 with
// max-pooling, outputs a (3 * filters) vector.
template <typename T>
NodeId char_token_vector(Graph<T>& g, const GraphParams<T>& P, const std::string& token,
                         int char_dim, int filters) {
  (void)char_dim;
  (void)filters;
  std::vector<int> ids;
  for (unsigned char c : token) ids.push_back(static_cast<int>(c));
  while (ids.size() < 5) ids.push_back(0);  // zero-id padding up to the widest window
  NodeId emb = g.gather_rows(P.at("char.emb"), ids);
  std::vector<NodeId> pooled;
  for (int w : {3, 4, 5}) {
    std::vector<NodeId> windows;
    for (int pos = 0; pos + w <= static_cast<int>(ids.size()); ++pos) {
      std::vector<NodeId> parts;
      for (int k = 0; k < w; ++k) parts.push_back(g.row(emb, pos + k));
      windows.push_back(g.concat(std::span<const NodeId>(parts)));
    }
    NodeId stacked = g.stack_rows(windows);
    NodeId conv = g.relu(g.add_bias(g.matmul(stacked, P.at("char.conv" + std::to_string(w) + ".w")),
                                    P.at("char.conv" + std::to_string(w) + ".b")));
    pooled.push_back(g.col_max(conv));
  }
  return g.concat(std::span<const NodeId>(pooled));
}

// Token input matrix (n x token_dim): fixed embeddings, with the character
// CNN output appended per token when enabled.
template <typename T>
NodeId token_matrix(Graph<T>& g, const GraphParams<T>& P, const Document& doc,
                    const EmbeddingProvider& emb, const ModelDims& dims) {
  Tensor fixed = embed_tokens(doc, emb);
  if (!dims.char_cnn) return g.constant(fixed.cast<T>());
  std::vector<NodeId> rows;
  for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
    Tensor row = Tensor::zeros({dims.emb});
    for (int d = 0; d < dims.emb; ++d) row.at(d) = fixed.at(static_cast<int>(t), d);
    NodeId fixed_part = g.constant(row.cast<T>());
    NodeId char_part = char_token_vector(g, P, doc.tokens[t], dims.char_dim, dims.char_filters);
    rows.push_back(g.concat({fixed_part, char_part}));
  }
  return g.stack_rows(rows);
}

// Bidirectional recurrent encoding, reset at every sentence boundary.
// Output row t is [forward state through t, backward state through t].
template <typename T>
NodeId encode_context(Graph<T>& g, const GraphParams<T>& P, NodeId tokens,
                      const std::vector<Span>& sentences, int hidden) {
  const int n = g.val(tokens).rows();
  if (n < 1) throw DataError("encode_context needs a non-empty sequence");
  LstmNodes<T> fwd{P.at("lstm.fwd.w_input"), P.at("lstm.fwd.w_hidden"), P.at("lstm.fwd.bias")};
  LstmNodes<T> bwd{P.at("lstm.bwd.w_input"), P.at("lstm.bwd.w_hidden"), P.at("lstm.bwd.bias")};
  using Ten = TensorT<T>;
  std::vector<NodeId> fwd_h(static_cast<std::size_t>(n));
  std::vector<NodeId> bwd_h(static_cast<std::size_t>(n));
  for (const Span& sent : sentences) {
    NodeId h = g.constant(Ten::zeros({hidden}));
    NodeId c = g.constant(Ten::zeros({hidden}));
    for (int t = sent.start; t <= sent.end; ++t) {
      auto [h2, c2] = lstm_cell(g, fwd, g.row(tokens, t), h, c, hidden);
      h = h2;
      c = c2;
      fwd_h[static_cast<std::size_t>(t)] = h;
    }
    h = g.constant(Ten::zeros({hidden}));
    c = g.constant(Ten::zeros({hidden}));
    for (int t = sent.end; t >= sent.start; --t) {
      auto [h2, c2] = lstm_cell(g, bwd, g.row(tokens, t), h, c, hidden);
      h = h2;
      c = c2;
      bwd_h[static_cast<std::size_t>(t)] = h;
    }
  }
  std::vector<NodeId> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t)
    rows.push_back(g.concat({fwd_h[static_cast<std::size_t>(t)],
                             bwd_h[static_cast<std::size_t>(t)]}));
  return g.stack_rows(rows);
}

// Per-token head-attention logits: one learned projection of the contextual
// states, evaluated for the whole document at once.
template <typename T>
NodeId head_logits(Graph<T>& g, const GraphParams<T>& P, NodeId contextual) {
  return g.matmul(contextual, P.at("head.w"));
}

// Attention-weighted token summary of one span: softmax over the span's
// slice of the head logits, applied to the fixed token vectors.
template <typename T>
std::pair<NodeId, NodeId> head_attention(Graph<T>& g, const CandidateSpan& span, NodeId tokens,
                                         NodeId logits) {
  if (span.end < span.start) throw DataError("head_attention over an empty span");
  NodeId w = g.softmax(g.slice(logits, span.start, span.end + 1));
  std::vector<int> idx;
  for (int t = span.start; t <= span.end; ++t) idx.push_back(t);
  NodeId x_hat = g.matmul(w, g.gather_rows(tokens, idx));
  return {w, x_hat};
}

// s = [h_start, h_end, head, feat]; feat is the zero stub of width feat_dim.
template <typename T>
NodeId span_representation(Graph<T>& g, const CandidateSpan& span, NodeId contextual,
                           NodeId head, int feat_dim) {
  NodeId h_start = g.row(contextual, span.start);
  NodeId h_end = g.row(contextual, span.end);
  std::vector<NodeId> parts = {h_start, h_end, head};
  if (feat_dim > 0) parts.push_back(g.constant(TensorT<T>::zeros({feat_dim})));
  return g.concat(std::span<const NodeId>(parts));
}

// Pointer attention of one mention over a set of span representations:
// u_t = v . tanh(span_proj_t + m_i W2), alpha = softmax(u), m' = sum alpha_t s_t.
// span_proj is the precomputed (rows x attn) product span_matrix * W1.
template <typename T>
std::pair<NodeId, NodeId> pointer_refine_projected(Graph<T>& g, NodeId m_i, NodeId span_matrix,
                                                   NodeId span_proj, NodeId w2, NodeId v) {
  if (g.val(span_matrix).rows() < 1) throw DataError("pointer refinement needs at least one span");
  NodeId shift = g.matmul(m_i, w2);
  NodeId u = g.matmul(g.tanh(g.add_bias(span_proj, shift)), v);
  NodeId alpha = g.softmax(u);
  NodeId m_prime = g.matmul(alpha, span_matrix);
  return {alpha, m_prime};
}

template <typename T>
std::pair<NodeId, NodeId> pointer_refine(Graph<T>& g, NodeId m_i, NodeId span_matrix, NodeId w1,
                                         NodeId w2, NodeId v) {
  return pointer_refine_projected(g, m_i, span_matrix, g.matmul(span_matrix, w1), w2, v);
}

template <typename T>
TensorT<T> ones_like(const TensorT<T>& t) {
  TensorT<T> out = TensorT<T>::zeros(t.shape);
  for (auto& v : out.data) v = T(1);
  return out;
}

// f = sigmoid([m, m'] W_f); m* = f o m + (1 - f) o m'.
template <typename T>
std::pair<NodeId, NodeId> gate_fuse(Graph<T>& g, NodeId m_i, NodeId m_prime, NodeId w_f) {
  TensorT<T> a = g.val(m_i);
  if (!a.same_shape(g.val(m_prime)))
    throw DataError("gate_fuse width mismatch: " + a.shape_str() + " vs " +
                    g.val(m_prime).shape_str());
  NodeId f = g.sigmoid(g.matmul(g.concat({m_i, m_prime}), w_f));
  NodeId ones = g.constant(ones_like<T>(a));
  NodeId m_star = g.add(g.mul(f, m_i), g.mul(g.sub(ones, f), m_prime));
  return {f, m_star};
}

// Learned embedding rows for the categorical pair features, concatenated.
template <typename T>
NodeId pair_feature_vec(Graph<T>& g, const GraphParams<T>& P, const PairFeatureIds& f) {
  return g.concat({g.row(P.at("pair.dist_emb"), f.bucket),
                   g.row(P.at("pair.speaker_emb"), f.same_speaker),
                   g.row(P.at("pair.genre_emb"), f.genre)});
}

// ---------------------------------------------------------------------------
// Whole-document forward pass.

struct ForwardOptions {
  int max_width = 10;
  double span_ratio = 0.4;
  int max_antecedents = 50;
  int max_attended_spans = 0;  // 0: attend over all candidate spans
  bool refine = true;
  bool token_distance = false;
};

ForwardOptions options_from(const RunConfig& config);

template <typename T>
struct DocForward {
  std::vector<CandidateSpan> spans;
  NodeId span_reps;       // (n_spans x span_dim)
  NodeId mention_scores;  // (n_spans)
  std::vector<int> kept;  // indices into spans, document order

  std::vector<int> attend_targets;  // span indices attended by every mention
  std::vector<NodeId> alpha;        // per kept mention, over attend_targets
  std::vector<NodeId> m_star_rows;  // per kept mention, fused representation

  std::vector<std::vector<int>> cand;  // per mention: preceding kept-mention indices, ascending
  NodeId sm_kept;                      // mention scores of the kept spans
  std::vector<NodeId> sa_rows;         // per mention: pairwise scores over cand
                                       // (placeholder zero row when cand is empty)
  std::vector<NodeId> score_rows;      // per mention: S(i, .) over [epsilon, cand...]
  std::vector<NodeId> p_rows;          // softmax of score_rows
};

template <typename T>
DocForward<T> forward_document(Graph<T>& g, const GraphParams<T>& P, const Document& doc,
                               const EmbeddingProvider& emb, const ModelDims& dims,
                               const ForwardOptions& opt) {
  DocForward<T> out;
  NodeId tokens = token_matrix(g, P, doc, emb, dims);
  NodeId contextual = encode_context(g, P, tokens, doc.sentences, dims.hidden);
  NodeId logits = head_logits(g, P, contextual);

  out.spans = enumerate_spans(doc, opt.max_width);
  std::vector<NodeId> rep_rows;
  rep_rows.reserve(out.spans.size());
  for (const CandidateSpan& span : out.spans) {
    NodeId x_hat = head_attention(g, span, tokens, logits).second;
    rep_rows.push_back(span_representation(g, span, contextual, x_hat, dims.feat));
  }
  out.span_reps = g.stack_rows(rep_rows);
  out.mention_scores = ffnn_from(g, P, "mention", out.span_reps, dims.ffnn_depth);

  const auto& score_vals = g.val(out.mention_scores);
  std::vector<double> scores(score_vals.data.begin(), score_vals.data.end());
  out.kept = prune_mentions(out.spans, scores, opt.span_ratio,
                            static_cast<int>(doc.tokens.size()));
  const int k = static_cast<int>(out.kept.size());
  if (k == 0) return out;

  if (opt.refine) {
    const int n_spans = static_cast<int>(out.spans.size());
    out.attend_targets.resize(static_cast<std::size_t>(n_spans));
    for (int t = 0; t < n_spans; ++t) out.attend_targets[static_cast<std::size_t>(t)] = t;
    if (opt.max_attended_spans > 0 && n_spans > opt.max_attended_spans) {
      // Cap by mention score, then restore document order.
      std::vector<int> order = out.attend_targets;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)])
          return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
        return a < b;
      });
      order.resize(static_cast<std::size_t>(opt.max_attended_spans));
      std::sort(order.begin(), order.end());
      out.attend_targets = std::move(order);
    }
    NodeId targets = (static_cast<int>(out.attend_targets.size()) == n_spans)
                         ? out.span_reps
                         : g.gather_rows(out.span_reps, out.attend_targets);
    NodeId span_proj = g.matmul(targets, P.at("refine.w1"));
    for (int i = 0; i < k; ++i) {
      NodeId m_i = g.row(out.span_reps, out.kept[static_cast<std::size_t>(i)]);
      auto [alpha, m_prime] = pointer_refine_projected(g, m_i, targets, span_proj,
                                                       P.at("refine.w2"), P.at("refine.v"));
      auto [f, m_star] = gate_fuse(g, m_i, m_prime, P.at("fuse.w"));
      out.alpha.push_back(alpha);
      out.m_star_rows.push_back(m_star);
    }
  } else {
    for (int i = 0; i < k; ++i)
      out.m_star_rows.push_back(g.row(out.span_reps, out.kept[static_cast<std::size_t>(i)]));
  }

  NodeId sm_kept = g.gather(out.mention_scores, out.kept);
  out.sm_kept = sm_kept;
  NodeId eps = g.constant(TensorT<T>::vec({T(0)}));
  for (int i = 0; i < k; ++i) {
    std::vector<int> cand;
    for (int j = std::max(0, i - opt.max_antecedents); j < i; ++j) cand.push_back(j);
    out.cand.push_back(cand);
    if (cand.empty()) {
      out.sa_rows.push_back(eps);
      out.score_rows.push_back(eps);
      out.p_rows.push_back(g.softmax(eps));
      continue;
    }
    std::vector<NodeId> pair_rows;
    for (int j : cand) {
      const CandidateSpan& si = out.spans[static_cast<std::size_t>(out.kept[static_cast<std::size_t>(i)])];
      const CandidateSpan& sj = out.spans[static_cast<std::size_t>(out.kept[static_cast<std::size_t>(j)])];
      PairFeatureIds f = pair_features(i, j, si, sj, doc, opt.token_distance);
      NodeId mi = out.m_star_rows[static_cast<std::size_t>(i)];
      NodeId mj = out.m_star_rows[static_cast<std::size_t>(j)];
      pair_rows.push_back(
          g.concat({mi, mj, g.mul(mi, mj), pair_feature_vec(g, P, f)}));
    }
    NodeId sa = ffnn_from(g, P, "ante", g.stack_rows(pair_rows), dims.ffnn_depth);
    out.sa_rows.push_back(sa);
    NodeId smj = g.gather(sm_kept, cand);
    NodeId smi = g.gather(sm_kept, std::vector<int>(cand.size(), i));
    NodeId row = g.add(g.add(sa, smj), smi);
    NodeId full = g.concat({eps, row});
    out.score_rows.push_back(full);
    out.p_rows.push_back(g.softmax(full));
  }
  return out;
}

// Best antecedent per mention from the evaluated P rows: -1 for epsilon,
// otherwise an index into `kept` mention order.
template <typename T>
std::vector<int> best_antecedents(const Graph<T>& g, const DocForward<T>& fwd) {
  std::vector<int> choice;
  for (std::size_t i = 0; i < fwd.p_rows.size(); ++i) {
    const auto& p = g.val(fwd.p_rows[i]);
    std::vector<double> row(p.data.begin(), p.data.end());
    int pick = pick_antecedent(row);
    choice.push_back(pick < 0 ? -1 : fwd.cand[i][static_cast<std::size_t>(pick)]);
  }
  return choice;
}

// Decoded clusters (size >= 2) for one document forward pass.
template <typename T>
std::vector<std::vector<Span>> predict_clusters(const Graph<T>& g, const DocForward<T>& fwd) {
  std::vector<CandidateSpan> mentions;
  for (int idx : fwd.kept) mentions.push_back(fwd.spans[static_cast<std::size_t>(idx)]);
  return decode_clusters(mentions, best_antecedents(g, fwd));
}

}  // namespace cspan
