#pragma once

#include <functional>
#include <string>

#include "config.hpp"
#include "metrics.hpp"

namespace cspan {

using LogFn = std::function<void(const std::string&)>;

struct TrainResult {
  double final_loss = 0.0;
  int epochs_run = 0;
  double final_dev_f1 = 0.0;
};

// Trains on `train_data`, evaluating each epoch against `dev_data` (or the
// training set when unset) and logging one line per epoch. Writes the final
// checkpoint when `checkpoint` is set. Stops early once the dev CoNLL F1
// reaches `early_stop_f1` (when positive).
TrainResult run_train(const RunConfig& config, const LogFn& log);

// Loads `checkpoint`, predicts clusters for every document in `input`, and
// writes JSON-lines predictions to `output`.
void run_predict(const RunConfig& config, const LogFn& log);

// Scores `pred` against `gold` and logs the fixed-format report.
ScoreReport run_score(const RunConfig& config, const LogFn& log);

// For each kept mention of the selected documents, logs its text, predicted
// cluster id, and the top inspect_k attended spans with weights.
void run_inspect(const RunConfig& config, const LogFn& log);

// Generates a synthetic corpus from the gen_* keys into `output`.
void run_gen(const RunConfig& config, const LogFn& log);

}  // namespace cspan
