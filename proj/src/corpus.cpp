#include "corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "rng.hpp"

#include "json.hpp"

namespace cspan {

using nlohmann::json;

namespace {

Span parse_span(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw DataError("span must be a [start, end] integer pair");
  return Span{j[0].get<int>(), j[1].get<int>()};
}

std::vector<std::vector<Span>> parse_clusters(const json& j) {
  std::vector<std::vector<Span>> clusters;
  for (const auto& jc : j) {
    std::vector<Span> cluster;
    for (const auto& js : jc) cluster.push_back(parse_span(js));
    clusters.push_back(std::move(cluster));
  }
  return clusters;
}

json clusters_to_json(const std::vector<std::vector<Span>>& clusters) {
  json out = json::array();
  for (const auto& cluster : clusters) {
    json jc = json::array();
    for (const Span& s : cluster) jc.push_back(json::array({s.start, s.end}));
    out.push_back(std::move(jc));
  }
  return out;
}

std::string span_str(const Span& s) {
  std::ostringstream os;
  os << '(' << s.start << ',' << s.end << ')';
  return os.str();
}

}  // namespace

std::vector<Document> load_documents(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open document file: " + path);
  std::vector<Document> docs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    Document doc;
    try {
      doc.doc_id = j.at("doc_id").get<std::string>();
      doc.tokens = j.at("tokens").get<std::vector<std::string>>();
      for (const auto& js : j.at("sentences")) doc.sentences.push_back(parse_span(js));
      doc.speakers = j.at("speakers").get<std::vector<int>>();
      doc.genre = j.at("genre").get<int>();
      doc.gold_clusters = parse_clusters(j.at("clusters"));
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": bad document object: " + e.what());
    }
    auto violations = validate_document(doc);
    if (!violations.empty()) {
      std::ostringstream os;
      os << "line " << line_no << ": document '" << doc.doc_id << "' failed validation:";
      for (const auto& v : violations) os << "\n  - " << v;
      throw DataError(os.str());
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

void save_documents(const std::vector<Document>& docs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write document file: " + path);
  for (const Document& doc : docs) {
    json j;
    j["doc_id"] = doc.doc_id;
    j["tokens"] = doc.tokens;
    json sents = json::array();
    for (const Span& s : doc.sentences) sents.push_back(json::array({s.start, s.end}));
    j["sentences"] = std::move(sents);
    j["speakers"] = doc.speakers;
    j["genre"] = doc.genre;
    j["clusters"] = clusters_to_json(doc.gold_clusters);
    out << j.dump() << '\n';
  }
}

std::vector<Prediction> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open prediction file: " + path);
  std::vector<Prediction> preds;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      Prediction p;
      p.doc_id = j.at("doc_id").get<std::string>();
      p.clusters = parse_clusters(j.at("clusters"));
      preds.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw DataError("line " + std::to_string(line_no) + ": malformed prediction: " + e.what());
    }
  }
  return preds;
}

void save_predictions(const std::vector<Prediction>& preds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write prediction file: " + path);
  for (const Prediction& p : preds) {
    json j;
    j["doc_id"] = p.doc_id;
    j["clusters"] = clusters_to_json(p.clusters);
    out << j.dump() << '\n';
  }
}

std::vector<std::string> validate_document(const Document& doc) {
  std::vector<std::string> violations;
  const int n = static_cast<int>(doc.tokens.size());

  if (static_cast<int>(doc.speakers.size()) != n)
    violations.push_back("speakers length does not match token count");
  if (doc.genre < 0 || doc.genre >= kNumGenres)
    violations.push_back("genre " + std::to_string(doc.genre) + " outside [0," +
                         std::to_string(kNumGenres) + ")");

  // Sentence bounds must tile [0, n) in order, without gaps or overlap.
  int expect = 0;
  bool tiling_ok = true;
  for (const Span& s : doc.sentences) {
    if (s.start != expect || s.end < s.start || s.end >= n) {
      tiling_ok = false;
      break;
    }
    expect = s.end + 1;
  }
  if (expect != n) tiling_ok = false;
  if (!tiling_ok) violations.push_back("sentence bounds do not tile token range");

  auto sentence_of = [&](const Span& s) -> int {
    for (std::size_t i = 0; i < doc.sentences.size(); ++i)
      if (s.start >= doc.sentences[i].start && s.end <= doc.sentences[i].end)
        return static_cast<int>(i);
    return -1;
  };

  std::set<Span> seen;
  for (std::size_t c = 0; c < doc.gold_clusters.size(); ++c) {
    const auto& cluster = doc.gold_clusters[c];
    if (cluster.size() < 2)
      violations.push_back("cluster " + std::to_string(c) + " size < 2");
    for (const Span& s : cluster) {
      if (s.end < s.start) {
        violations.push_back("inverted span " + span_str(s));
        continue;
      }
      if (s.start < 0 || s.end >= n) {
        violations.push_back("span " + span_str(s) + " out of token range");
        continue;
      }
      if (tiling_ok && sentence_of(s) < 0)
        violations.push_back("span " + span_str(s) + " crosses a sentence boundary");
      if (!seen.insert(s).second)
        violations.push_back("span " + span_str(s) + " appears in more than one cluster");
    }
    // Duplicates within one cluster also land in the cross-cluster check via `seen`.
  }
  return violations;
}

std::vector<CandidateSpan> enumerate_spans(const Document& doc, int max_width) {
  if (max_width < 1) throw DataError("max_width must be >= 1");
  std::vector<CandidateSpan> spans;
  for (const Span& sent : doc.sentences) {
    for (int start = sent.start; start <= sent.end; ++start) {
      int last = std::min(sent.end, start + max_width - 1);
      for (int end = start; end <= last; ++end)
        spans.push_back(CandidateSpan{start, end, static_cast<int>(spans.size())});
    }
  }
  return spans;
}

int count_unreachable_gold_spans(const Document& doc, int max_width) {
  int count = 0;
  for (const auto& cluster : doc.gold_clusters)
    for (const Span& s : cluster)
      if (s.end - s.start + 1 > max_width) ++count;
  return count;
}

namespace {

struct SentenceSlot {
  int sentence = 0;
  // Role payload: up to two tokens written at a random in-sentence offset.
  std::vector<std::string> payload;
  bool is_mention = false;
  int cluster = -1;
};

}  // namespace

std::vector<Document> generate_synthetic(const SyntheticConfig& config, std::uint64_t seed) {
  if (config.n_docs < 0 || config.tokens_per_doc <= 0 || config.n_clusters < 0 ||
      config.vocab_size <= 0 || config.sentence_len < 4)
    throw DataError("infeasible synthetic config: non-positive sizes");
  if (config.n_clusters > 0 && config.mentions_per_cluster < 2)
    throw DataError("infeasible synthetic config: clusters need >= 2 mentions");

  const int n_tokens = config.tokens_per_doc;
  const int sent_len = config.sentence_len;
  const int n_sentences = (n_tokens + sent_len - 1) / sent_len;
  const bool ambiguous = config.mode == SyntheticMode::kAmbiguous;
  // One sentence per mention, plus one bridge sentence per cluster in
  // ambiguous mode; each role sentence hosts exactly one two-token payload.
  const int roles_per_cluster = config.mentions_per_cluster + (ambiguous ? 1 : 0);
  const int n_roles = config.n_clusters * roles_per_cluster;
  if (n_roles > n_sentences)
    throw DataError("infeasible synthetic config: " + std::to_string(n_roles) +
                    " role sentences needed but only " + std::to_string(n_sentences) + " fit");
  // The final sentence can be a stub shorter than sent_len; never give it a role.
  const int last_full = (n_tokens % sent_len == 0) ? n_sentences : n_sentences - 1;
  if (n_roles > last_full)
    throw DataError("infeasible synthetic config: not enough full sentences for roles");

  // Ambiguous mode keeps the name pools tight so the same entity and pronoun
  // tokens recur across documents with conflicting pairings; only the
  // in-document bridge can tell those documents apart.
  const int entity_pool =
      ambiguous ? std::max(2 * config.n_clusters, 2) : std::max(2 * config.n_clusters, 6);
  const int pronoun_pool = entity_pool;

  Rng rng(seed);
  std::vector<Document> docs;
  for (int d = 0; d < config.n_docs; ++d) {
    Document doc;
    doc.doc_id = "syn" + std::to_string(d);
    // Ambiguous documents pin genre, speakers, and payload offsets: metadata
    // and token-position noise would otherwise identify the document and let
    // a model shortcut the bridge.
    doc.genre = ambiguous ? 0 : rng.uniform_int(0, kNumGenres - 1);

    // Per-document entity and pronoun draw; the pairing is re-randomized per
    // document so cross-document token memorization cannot resolve pronouns.
    std::vector<int> ents(static_cast<std::size_t>(entity_pool));
    std::vector<int> pros(static_cast<std::size_t>(pronoun_pool));
    for (int i = 0; i < entity_pool; ++i) ents[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < pronoun_pool; ++i) pros[static_cast<std::size_t>(i)] = i;
    rng.shuffle(ents);
    rng.shuffle(pros);

    // Assign roles to distinct sentences; antecedents must precede their
    // pronouns, so draw sentence ids and hand the earliest to the antecedent.
    std::vector<int> sentence_ids(static_cast<std::size_t>(last_full));
    for (int i = 0; i < last_full; ++i) sentence_ids[static_cast<std::size_t>(i)] = i;
    rng.shuffle(sentence_ids);
    sentence_ids.resize(static_cast<std::size_t>(n_roles));

    std::vector<SentenceSlot> slots;
    int next_sentence = 0;
    for (int c = 0; c < config.n_clusters; ++c) {
      std::string ent = "ent" + std::to_string(ents[static_cast<std::size_t>(c)]);
      std::string pro = "pro" + std::to_string(pros[static_cast<std::size_t>(c)]);
      std::vector<int> picked(sentence_ids.begin() + next_sentence,
                              sentence_ids.begin() + next_sentence + roles_per_cluster);
      next_sentence += roles_per_cluster;
      std::sort(picked.begin(), picked.end());
      // Earliest picked sentence hosts the entity mention. In ambiguous mode
      // the latest hosts the bridge and the middle ones host pronoun mentions;
      // in plain mode every remaining sentence hosts an entity mention.
      for (std::size_t k = 0; k < picked.size(); ++k) {
        SentenceSlot slot;
        slot.sentence = picked[k];
        slot.cluster = c;
        if (!ambiguous) {
          slot.payload = {"mk", ent};
          slot.is_mention = true;
        } else if (k == 0) {
          slot.payload = {"mk", ent};
          slot.is_mention = true;
        } else if (k + 1 < picked.size()) {
          slot.payload = {"mk", pro};
          slot.is_mention = true;
        } else {
          slot.payload = {pro, ent};  // bridge: never a gold mention
          slot.is_mention = false;
        }
        slots.push_back(std::move(slot));
      }
    }

    // Lay out tokens: filler everywhere, then payloads at random offsets.
    doc.tokens.assign(static_cast<std::size_t>(n_tokens), "");
    for (int t = 0; t < n_tokens; ++t)
      doc.tokens[static_cast<std::size_t>(t)] =
          "w" + std::to_string(rng.uniform_int(0, config.vocab_size - 1));
    for (int s = 0; s < n_sentences; ++s) {
      int start = s * sent_len;
      int end = std::min(n_tokens - 1, start + sent_len - 1);
      doc.sentences.push_back(Span{start, end});
    }
    doc.speakers.assign(static_cast<std::size_t>(n_tokens), 0);
    if (!ambiguous) {
      for (const Span& sent : doc.sentences) {
        int spk = rng.uniform_int(0, 1);
        for (int t = sent.start; t <= sent.end; ++t)
          doc.speakers[static_cast<std::size_t>(t)] = spk;
      }
    }

    std::vector<std::vector<Span>> clusters(static_cast<std::size_t>(config.n_clusters));
    for (const SentenceSlot& slot : slots) {
      const Span sent = doc.sentences[static_cast<std::size_t>(slot.sentence)];
      int width = static_cast<int>(slot.payload.size());
      int offset = ambiguous ? sent.start : rng.uniform_int(sent.start, sent.end - width + 1);
      for (int k = 0; k < width; ++k)
        doc.tokens[static_cast<std::size_t>(offset + k)] = slot.payload[static_cast<std::size_t>(k)];
      if (slot.is_mention)
        clusters[static_cast<std::size_t>(slot.cluster)].push_back(
            Span{offset, offset + width - 1});
    }
    for (auto& cluster : clusters) std::sort(cluster.begin(), cluster.end());
    for (auto& cluster : clusters)
      if (!cluster.empty()) doc.gold_clusters.push_back(std::move(cluster));

    auto violations = validate_document(doc);
    if (!violations.empty())
      throw DataError("synthetic generator produced an invalid document: " + violations.front());
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace cspan
