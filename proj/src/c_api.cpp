#include "cspan/cspan.h"

#include <new>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "pipeline.hpp"

struct cspan_config {
  cspan::RunConfig cfg;
  std::string resolved;
};

namespace {

thread_local std::string g_last_error;

cspan_status to_status(const std::exception& e) {
  if (dynamic_cast<const cspan::UsageError*>(&e)) return CSPAN_USAGE_ERROR;
  if (dynamic_cast<const cspan::DataError*>(&e)) return CSPAN_DATA_ERROR;
  if (dynamic_cast<const cspan::NumericError*>(&e)) return CSPAN_NUMERIC_ERROR;
  return CSPAN_DATA_ERROR;
}

template <typename Fn>
cspan_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CSPAN_OK;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return to_status(e);
  }
}

cspan_status run_command(cspan_config* config, cspan_log_fn log, void* user_data,
                         void (*command)(const cspan::RunConfig&, const cspan::LogFn&)) {
  if (config == nullptr) {
    g_last_error = "config handle is null";
    return CSPAN_USAGE_ERROR;
  }
  cspan::LogFn sink;
  if (log != nullptr) {
    sink = [log, user_data](const std::string& msg) { log(user_data, msg.c_str()); };
  } else {
    sink = [](const std::string&) {};
  }
  return guarded([&] { command(config->cfg, sink); });
}

}  // namespace

extern "C" {

cspan_config* cspan_config_new(void) {
  return new (std::nothrow) cspan_config();
}

void cspan_config_free(cspan_config* config) {
  delete config;
}

cspan_status cspan_config_load_file(cspan_config* config, const char* path) {
  if (config == nullptr || path == nullptr) {
    g_last_error = "null argument to cspan_config_load_file";
    return CSPAN_USAGE_ERROR;
  }
  return guarded([&] { cspan::load_config_file(config->cfg, path); });
}

cspan_status cspan_config_set(cspan_config* config, const char* key, const char* value) {
  if (config == nullptr || key == nullptr || value == nullptr) {
    g_last_error = "null argument to cspan_config_set";
    return CSPAN_USAGE_ERROR;
  }
  return guarded([&] { cspan::set_config_value(config->cfg, key, value); });
}

const char* cspan_config_resolved(cspan_config* config) {
  if (config == nullptr) return "";
  config->resolved = cspan::resolved_config(config->cfg);
  return config->resolved.c_str();
}

cspan_status cspan_train(cspan_config* config, cspan_log_fn log, void* user_data) {
  return run_command(config, log, user_data,
                     [](const cspan::RunConfig& c, const cspan::LogFn& l) { cspan::run_train(c, l); });
}

cspan_status cspan_predict(cspan_config* config, cspan_log_fn log, void* user_data) {
  return run_command(config, log, user_data, &cspan::run_predict);
}

cspan_status cspan_score(cspan_config* config, cspan_log_fn log, void* user_data) {
  return run_command(config, log, user_data,
                     [](const cspan::RunConfig& c, const cspan::LogFn& l) { cspan::run_score(c, l); });
}

cspan_status cspan_inspect(cspan_config* config, cspan_log_fn log, void* user_data) {
  return run_command(config, log, user_data, &cspan::run_inspect);
}

cspan_status cspan_generate(cspan_config* config, cspan_log_fn log, void* user_data) {
  return run_command(config, log, user_data, &cspan::run_gen);
}

const char* cspan_last_error(void) {
  return g_last_error.c_str();
}

}  // extern "C"
