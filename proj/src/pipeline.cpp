#include "pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "embedding.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "params.hpp"
#include "rng.hpp"
#include "training.hpp"

namespace cspan {

namespace {

EmbeddingProvider make_provider(const RunConfig& config) {
  if (config.embedding_mode == "file") {
    EmbeddingProvider p = EmbeddingProvider::from_file(config.embedding_file);
    if (p.dim() != config.embedding_dim)
      throw UsageError("embedding file width " + std::to_string(p.dim()) +
                       " does not match embedding_dim " + std::to_string(config.embedding_dim));
    return p;
  }
  return EmbeddingProvider::hashed(config.embedding_dim,
                                   static_cast<std::uint64_t>(config.seed));
}

std::vector<Document> load_required(const std::string& path, const char* key) {
  if (path.empty())
    throw UsageError(std::string("config key '") + key + "' is required for this command");
  return load_documents(path);
}

std::string span_text(const Document& doc, int start, int end) {
  std::string out;
  for (int t = start; t <= end; ++t) {
    if (t > start) out += ' ';
    out += doc.tokens[static_cast<std::size_t>(t)];
  }
  return out;
}

// Cluster sets predicted for every document under the current parameters.
std::vector<ClusterSet> predict_all(const std::vector<Document>& docs,
                                    const EmbeddingProvider& emb, const ParamStore& params,
                                    const ModelDims& dims, const ForwardOptions& opt) {
  std::vector<ClusterSet> out;
  for (const Document& doc : docs) {
    Graph<float> g;
    GraphParams<float> P = register_params(g, params);
    DocForward<float> fwd = forward_document(g, P, doc, emb, dims, opt);
    out.push_back(predict_clusters(g, fwd));
  }
  return out;
}

double dev_conll(const std::vector<Document>& docs, const std::vector<ClusterSet>& pred) {
  std::vector<ClusterSet> gold;
  for (const Document& doc : docs) gold.push_back(doc.gold_clusters);
  return score_corpus(gold, pred).conll;
}

}  // namespace

TrainResult run_train(const RunConfig& config, const LogFn& log) {
  validate_config(config);
  log("resolved config:\n" + resolved_config(config));
  std::vector<Document> train_docs = load_required(config.train_data, "train_data");
  std::vector<Document> dev_docs =
      config.dev_data.empty() ? train_docs : load_documents(config.dev_data);
  if (train_docs.empty()) throw DataError("training corpus is empty: " + config.train_data);

  EmbeddingProvider emb = make_provider(config);
  ModelDims dims = dims_from(config);
  ForwardOptions opt = options_from(config);
  LossOptions loss_opt = loss_options_from(config);
  ParamStore params = init_params(dims, static_cast<std::uint64_t>(config.seed));
  Optimizer optim = config.optimizer == "sgd" ? Optimizer::sgd(config.learning_rate)
                                              : Optimizer::adam(config.learning_rate);

  int unreachable = 0;
  for (const Document& doc : train_docs)
    unreachable += count_unreachable_gold_spans(doc, config.max_width);
  if (unreachable > 0)
    log("warning: " + std::to_string(unreachable) +
        " gold spans exceed max_width and cannot be predicted");

  Rng shuffle_rng(static_cast<std::uint64_t>(config.seed) ^ 0x5b5ad4c3f0e1d2b9ull);
  TrainResult result;
  char line[160];
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<int> order(train_docs.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (int di : order) {
      const Document& doc = train_docs[static_cast<std::size_t>(di)];
      Graph<float> g;
      GraphParams<float> P = register_params(g, params);
      DocForward<float> fwd = forward_document(g, P, doc, emb, dims, opt);
      if (fwd.p_rows.empty()) continue;
      auto gold = gold_antecedent_sets(doc, fwd.spans, fwd.kept, fwd.cand);
      NodeId loss = doc_loss(g, fwd.p_rows, gold, loss_opt);
      double loss_val = static_cast<double>(g.val(loss).data[0]);
      if (!std::isfinite(loss_val))
        throw NumericError("non-finite loss on document " + doc.doc_id);
      loss_sum += loss_val;
      g.backward(loss);
      auto grads = collect_gradients(g, P);
      optim.step(params, grads, config.grad_clip);
    }

    double mean_loss = loss_sum / static_cast<double>(train_docs.size());
    double f1 = dev_conll(dev_docs, predict_all(dev_docs, emb, params, dims, opt));
    std::snprintf(line, sizeof(line), "epoch %d loss %.6f dev_f1 %.4f", epoch, mean_loss, f1);
    log(line);
    result.final_loss = mean_loss;
    result.final_dev_f1 = f1;
    result.epochs_run = epoch;
    if (config.early_stop_f1 > 0.0 && f1 >= config.early_stop_f1) break;
  }

  if (!config.checkpoint.empty()) {
    save_checkpoint(params, config.checkpoint);
    log("checkpoint written: " + config.checkpoint);
  }
  return result;
}

void run_predict(const RunConfig& config, const LogFn& log) {
  validate_config(config);
  if (config.checkpoint.empty())
    throw UsageError("config key 'checkpoint' is required for this command");
  if (config.output.empty())
    throw UsageError("config key 'output' is required for this command");
  std::vector<Document> docs = load_required(config.input, "input");

  EmbeddingProvider emb = make_provider(config);
  ModelDims dims = dims_from(config);
  ParamStore params = init_params(dims, static_cast<std::uint64_t>(config.seed));
  load_checkpoint(config.checkpoint, params);

  ForwardOptions opt = options_from(config);
  std::vector<ClusterSet> clusters = predict_all(docs, emb, params, dims, opt);
  std::vector<Prediction> preds;
  for (std::size_t d = 0; d < docs.size(); ++d)
    preds.push_back(Prediction{docs[d].doc_id, clusters[d]});
  save_predictions(preds, config.output);
  log("predictions written: " + config.output + " (" + std::to_string(preds.size()) +
      " documents)");
}

ScoreReport run_score(const RunConfig& config, const LogFn& log) {
  validate_config(config);
  std::vector<Document> gold_docs = load_required(config.gold, "gold");
  if (config.pred.empty())
    throw UsageError("config key 'pred' is required for this command");
  std::vector<Prediction> preds = load_predictions(config.pred);

  std::map<std::string, const Prediction*> by_id;
  for (const Prediction& p : preds) {
    if (!by_id.emplace(p.doc_id, &p).second)
      throw DataError("duplicate prediction for document: " + p.doc_id);
  }
  std::vector<std::string> missing;
  std::vector<ClusterSet> gold, pred;
  std::set<std::string> gold_ids;
  for (const Document& doc : gold_docs) {
    gold_ids.insert(doc.doc_id);
    auto it = by_id.find(doc.doc_id);
    if (it == by_id.end()) {
      missing.push_back(doc.doc_id);
      continue;
    }
    gold.push_back(doc.gold_clusters);
    pred.push_back(it->second->clusters);
  }
  for (const Prediction& p : preds)
    if (!gold_ids.count(p.doc_id)) missing.push_back(p.doc_id + " (prediction only)");
  if (!missing.empty()) {
    std::string msg = "document ids do not match between gold and predictions:";
    for (const auto& m : missing) msg += "\n  - " + m;
    throw DataError(msg);
  }

  ScoreReport report = score_corpus(gold, pred);
  log(format_report(report));
  return report;
}

void run_inspect(const RunConfig& config, const LogFn& log) {
  validate_config(config);
  if (!config.refine)
    throw UsageError("inspect requires refine = true (attention weights are undefined otherwise)");
  if (config.checkpoint.empty())
    throw UsageError("config key 'checkpoint' is required for this command");
  std::vector<Document> docs = load_required(config.input, "input");

  EmbeddingProvider emb = make_provider(config);
  ModelDims dims = dims_from(config);
  ParamStore params = init_params(dims, static_cast<std::uint64_t>(config.seed));
  load_checkpoint(config.checkpoint, params);
  ForwardOptions opt = options_from(config);

  bool found = config.inspect_doc.empty();
  char buf[64];
  for (const Document& doc : docs) {
    if (!config.inspect_doc.empty() && doc.doc_id != config.inspect_doc) continue;
    found = true;
    Graph<float> g;
    GraphParams<float> P = register_params(g, params);
    DocForward<float> fwd = forward_document(g, P, doc, emb, dims, opt);
    ClusterSet clusters = predict_clusters(g, fwd);

    std::map<Span, int> cluster_of;
    for (std::size_t c = 0; c < clusters.size(); ++c)
      for (const Span& s : clusters[c]) cluster_of[s] = static_cast<int>(c);

    std::ostringstream os;
    os << "doc " << doc.doc_id << "\n";
    for (std::size_t i = 0; i < fwd.kept.size(); ++i) {
      const CandidateSpan& m = fwd.spans[static_cast<std::size_t>(fwd.kept[i])];
      auto it = cluster_of.find(Span{m.start, m.end});
      int cid = it == cluster_of.end() ? -1 : it->second;
      os << "mention (" << m.start << "," << m.end << ") \"" << span_text(doc, m.start, m.end)
         << "\" cluster " << cid << "\n";
      const auto& av = g.val(fwd.alpha[i]);
      std::vector<double> alpha(av.data.begin(), av.data.end());
      for (const auto& [pos, w] : top_attended_spans(alpha, config.inspect_k)) {
        const CandidateSpan& s =
            fwd.spans[static_cast<std::size_t>(fwd.attend_targets[static_cast<std::size_t>(pos)])];
        std::snprintf(buf, sizeof(buf), "%.4f", w);
        os << "  (" << s.start << "," << s.end << ") \"" << span_text(doc, s.start, s.end)
           << "\" " << buf << "\n";
      }
    }
    log(os.str());
  }
  if (!found) throw DataError("document not found in input: " + config.inspect_doc);
}

void run_gen(const RunConfig& config, const LogFn& log) {
  validate_config(config);
  if (config.output.empty())
    throw UsageError("config key 'output' is required for this command");
  SyntheticConfig gc;
  gc.n_docs = config.gen_docs;
  gc.tokens_per_doc = config.gen_tokens;
  gc.n_clusters = config.gen_clusters;
  gc.mentions_per_cluster = config.gen_mentions;
  gc.vocab_size = config.gen_vocab;
  gc.sentence_len = config.gen_sentence_len;
  gc.mode = config.gen_mode == "ambiguous" ? SyntheticMode::kAmbiguous : SyntheticMode::kPlain;
  std::vector<Document> docs = generate_synthetic(gc, static_cast<std::uint64_t>(config.seed));
  save_documents(docs, config.output);
  log("synthetic corpus written: " + config.output + " (" + std::to_string(docs.size()) +
      " documents)");
}

}  // namespace cspan
