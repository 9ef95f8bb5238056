#pragma once

#include <string>
#include <utility>
#include <vector>

namespace cspan {

// Flat run configuration: every knob is a `key = value` line in a text file,
// overridable as `--key value` on the command line. Unknown keys are rejected.
struct RunConfig {
  // data
  std::string train_data;
  std::string dev_data;
  std::string input;
  std::string output;
  std::string checkpoint;
  std::string gold;  // score: reference documents
  std::string pred;  // score: predictions to evaluate

  // embeddings
  std::string embedding_mode = "hash";  // hash | file
  std::string embedding_file;
  int embedding_dim = 32;
  bool char_cnn = false;
  int char_dim = 8;
  int char_filters = 50;

  // model widths
  int hidden_dim = 32;
  int feat_dim = 8;
  int attention_dim = 64;
  int ffnn_hidden = 64;
  int ffnn_depth = 2;
  int feature_embedding_dim = 20;

  // span handling
  int max_width = 10;
  double span_ratio = 0.4;
  int max_antecedents = 50;
  int max_attended_spans = 0;  // 0 = attend over every candidate span
  std::string distance_unit = "mention";  // mention | token
  bool refine = true;

  // training
  std::string optimizer = "adam";  // adam | sgd
  double learning_rate = 1e-3;
  int epochs = 30;
  long seed = 1;
  bool neg_term = true;
  double neg_term_weight = 1.0;
  double prob_floor = 1e-7;
  double grad_clip = 5.0;
  double early_stop_f1 = 0.0;  // stop once dev CoNLL F1 reaches this; 0 = off

  // inspection
  std::string inspect_doc;  // empty: inspect every input document
  int inspect_k = 3;

  // synthetic generator
  int gen_docs = 20;
  int gen_tokens = 64;
  int gen_clusters = 2;
  int gen_mentions = 3;
  int gen_vocab = 50;
  int gen_sentence_len = 8;
  std::string gen_mode = "plain";  // plain | ambiguous
};

// Reads `key = value` lines; '#' starts a comment; blank lines ignored.
// Throws UsageError on unknown keys, bad syntax, or unparseable values.
void load_config_file(RunConfig& config, const std::string& path);

// Sets one key from its text form; rejects unknown keys and bad values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

// Overrides as ("key", "value") pairs, e.g. from `--key value` arguments.
void apply_overrides(RunConfig& config, const std::vector<std::pair<std::string, std::string>>& kv);

// Range and enum validation; throws UsageError naming the offending key.
void validate_config(const RunConfig& config);

// Full resolved configuration, one `key = value` line per field, fixed order.
std::string resolved_config(const RunConfig& config);

}  // namespace cspan
