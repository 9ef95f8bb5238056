#include "config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <variant>

#include "errors.hpp"

namespace cspan {

namespace {

struct Field {
  const char* key;
  std::variant<std::string RunConfig::*, int RunConfig::*, long RunConfig::*,
               double RunConfig::*, bool RunConfig::*>
      member;
};

const Field kFields[] = {
    {"train_data", &RunConfig::train_data},
    {"dev_data", &RunConfig::dev_data},
    {"input", &RunConfig::input},
    {"output", &RunConfig::output},
    {"checkpoint", &RunConfig::checkpoint},
    {"gold", &RunConfig::gold},
    {"pred", &RunConfig::pred},
    {"embedding_mode", &RunConfig::embedding_mode},
    {"embedding_file", &RunConfig::embedding_file},
    {"embedding_dim", &RunConfig::embedding_dim},
    {"char_cnn", &RunConfig::char_cnn},
    {"char_dim", &RunConfig::char_dim},
    {"char_filters", &RunConfig::char_filters},
    {"hidden_dim", &RunConfig::hidden_dim},
    {"feat_dim", &RunConfig::feat_dim},
    {"attention_dim", &RunConfig::attention_dim},
    {"ffnn_hidden", &RunConfig::ffnn_hidden},
    {"ffnn_depth", &RunConfig::ffnn_depth},
    {"feature_embedding_dim", &RunConfig::feature_embedding_dim},
    {"max_width", &RunConfig::max_width},
    {"span_ratio", &RunConfig::span_ratio},
    {"max_antecedents", &RunConfig::max_antecedents},
    {"max_attended_spans", &RunConfig::max_attended_spans},
    {"distance_unit", &RunConfig::distance_unit},
    {"refine", &RunConfig::refine},
    {"optimizer", &RunConfig::optimizer},
    {"learning_rate", &RunConfig::learning_rate},
    {"epochs", &RunConfig::epochs},
    {"seed", &RunConfig::seed},
    {"neg_term", &RunConfig::neg_term},
    {"neg_term_weight", &RunConfig::neg_term_weight},
    {"prob_floor", &RunConfig::prob_floor},
    {"grad_clip", &RunConfig::grad_clip},
    {"early_stop_f1", &RunConfig::early_stop_f1},
    {"inspect_doc", &RunConfig::inspect_doc},
    {"inspect_k", &RunConfig::inspect_k},
    {"gen_docs", &RunConfig::gen_docs},
    {"gen_tokens", &RunConfig::gen_tokens},
    {"gen_clusters", &RunConfig::gen_clusters},
    {"gen_mentions", &RunConfig::gen_mentions},
    {"gen_vocab", &RunConfig::gen_vocab},
    {"gen_sentence_len", &RunConfig::gen_sentence_len},
    {"gen_mode", &RunConfig::gen_mode},
};

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw UsageError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

void set_field(RunConfig& config, const std::string& key, const std::string& value) {
  for (const Field& f : kFields) {
    if (key != f.key) continue;
    if (auto* m = std::get_if<std::string RunConfig::*>(&f.member)) {
      config.**m = value;
      return;
    }
    try {
      if (auto* m = std::get_if<int RunConfig::*>(&f.member)) {
        std::size_t used = 0;
        config.**m = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } else if (auto* m = std::get_if<long RunConfig::*>(&f.member)) {
        std::size_t used = 0;
        config.**m = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } else if (auto* m = std::get_if<double RunConfig::*>(&f.member)) {
        std::size_t used = 0;
        config.**m = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } else if (auto* m = std::get_if<bool RunConfig::*>(&f.member)) {
        config.**m = parse_bool(value, key);
      }
    } catch (const std::logic_error&) {
      throw UsageError("config key '" + key + "': cannot parse value '" + value + "'");
    }
    return;
  }
  throw UsageError("unknown config key '" + key + "'");
}

std::string field_str(const RunConfig& config, const Field& f) {
  std::ostringstream os;
  if (auto* m = std::get_if<std::string RunConfig::*>(&f.member))
    os << config.**m;
  else if (auto* m = std::get_if<int RunConfig::*>(&f.member))
    os << config.**m;
  else if (auto* m = std::get_if<long RunConfig::*>(&f.member))
    os << config.**m;
  else if (auto* m = std::get_if<double RunConfig::*>(&f.member))
    os << config.**m;
  else if (auto* m = std::get_if<bool RunConfig::*>(&f.member))
    os << (config.**m ? "true" : "false");
  return os.str();
}

}  // namespace

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  set_field(config, key, value);
}

void load_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
    set_field(config, key, value);
  }
}

void apply_overrides(RunConfig& config,
                     const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [key, value] : kv) set_field(config, key, value);
}

void validate_config(const RunConfig& config) {
  auto fail = [](const std::string& msg) { throw UsageError("config: " + msg); };
  if (config.embedding_mode != "hash" && config.embedding_mode != "file")
    fail("embedding_mode must be 'hash' or 'file'");
  if (config.embedding_mode == "file" && config.embedding_file.empty())
    fail("embedding_mode 'file' requires embedding_file");
  if (config.embedding_dim <= 0) fail("embedding_dim must be positive");
  if (config.char_dim <= 0 || config.char_filters <= 0)
    fail("char_dim and char_filters must be positive");
  if (config.hidden_dim <= 0) fail("hidden_dim must be positive");
  if (config.feat_dim < 0) fail("feat_dim must be non-negative");
  if (config.attention_dim <= 0) fail("attention_dim must be positive");
  if (config.ffnn_hidden <= 0 || config.ffnn_depth < 1)
    fail("ffnn_hidden must be positive and ffnn_depth at least 1");
  if (config.feature_embedding_dim <= 0) fail("feature_embedding_dim must be positive");
  if (config.max_width < 1) fail("max_width must be at least 1");
  if (!(config.span_ratio > 0.0 && config.span_ratio <= 1.0))
    fail("span_ratio must lie in (0, 1]");
  if (config.max_antecedents < 1) fail("max_antecedents must be at least 1");
  if (config.max_attended_spans < 0) fail("max_attended_spans must be non-negative");
  if (config.distance_unit != "mention" && config.distance_unit != "token")
    fail("distance_unit must be 'mention' or 'token'");
  if (config.optimizer != "adam" && config.optimizer != "sgd")
    fail("optimizer must be 'adam' or 'sgd'");
  if (!(config.learning_rate > 0.0)) fail("learning_rate must be positive");
  if (config.epochs < 0) fail("epochs must be non-negative");
  if (config.neg_term_weight < 0.0) fail("neg_term_weight must be non-negative");
  if (!(config.prob_floor > 0.0 && config.prob_floor < 0.5))
    fail("prob_floor must lie in (0, 0.5)");
  if (config.grad_clip < 0.0) fail("grad_clip must be non-negative");
  if (config.early_stop_f1 < 0.0 || config.early_stop_f1 > 1.0)
    fail("early_stop_f1 must lie in [0, 1]");
  if (config.inspect_k < 1) fail("inspect_k must be at least 1");
  if (config.gen_mode != "plain" && config.gen_mode != "ambiguous")
    fail("gen_mode must be 'plain' or 'ambiguous'");
}

std::string resolved_config(const RunConfig& config) {
  std::ostringstream os;
  for (const Field& f : kFields) os << f.key << " = " << field_str(config, f) << '\n';
  return os.str();
}

}  // namespace cspan
