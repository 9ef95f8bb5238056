#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cspan {

// Inclusive token span.
struct Span {
  int start = 0;
  int end = 0;
  friend bool operator==(const Span& a, const Span& b) = default;
  friend auto operator<=>(const Span& a, const Span& b) = default;
};

struct Document {
  std::string doc_id;
  std::vector<std::string> tokens;
  std::vector<Span> sentences;  // inclusive bounds, tiling [0, n)
  std::vector<int> speakers;    // one id per token
  int genre = 0;                // in [0, kNumGenres)
  std::vector<std::vector<Span>> gold_clusters;
};

inline constexpr int kNumGenres = 7;

struct CandidateSpan {
  int start = 0;
  int end = 0;
  int span_index = 0;
  int width() const { return end - start + 1; }
};

// Predicted clusters, serialized in the same JSON-lines cluster format.
struct Prediction {
  std::string doc_id;
  std::vector<std::vector<Span>> clusters;
};

// JSON-lines ingestion. Throws DataError with the offending line number on
// malformed input, and with the violation list when a document fails
// validation.
std::vector<Document> load_documents(const std::string& path);
void save_documents(const std::vector<Document>& docs, const std::string& path);

std::vector<Prediction> load_predictions(const std::string& path);
void save_predictions(const std::vector<Prediction>& preds, const std::string& path);

// Empty result iff every Document invariant holds. Violations are data.
std::vector<std::string> validate_document(const Document& doc);

// All sentence-internal spans of width <= max_width, ordered by (start, end).
std::vector<CandidateSpan> enumerate_spans(const Document& doc, int max_width);

// Gold spans wider than max_width are unreachable by enumeration; they are
// reported as a coverage warning, not an error.
int count_unreachable_gold_spans(const Document& doc, int max_width);

enum class SyntheticMode {
  kPlain,      // every mention of a cluster carries the cluster's entity token
  kAmbiguous,  // later mentions are pronouns; the entity token is reachable
               // only through non-mention bridge spans elsewhere in the text
};

struct SyntheticConfig {
  int n_docs = 20;
  int tokens_per_doc = 64;
  int n_clusters = 2;
  int mentions_per_cluster = 3;
  int vocab_size = 50;
  int sentence_len = 8;
  SyntheticMode mode = SyntheticMode::kPlain;
};

// Deterministic under a fixed seed; every emitted document validates clean.
std::vector<Document> generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

}  // namespace cspan
