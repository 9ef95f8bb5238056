#ifndef CSPAN_H
#define CSPAN_H

/*
 * C interface to the span-refinement coreference resolver.
 *
 * All state lives behind opaque handles; every entry point returns a status
 * code and leaves a human-readable message in cspan_last_error() on failure.
 */

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cspan_status {
  CSPAN_OK = 0,
  CSPAN_USAGE_ERROR = 1,  /* bad arguments or configuration */
  CSPAN_DATA_ERROR = 2,   /* invalid or inconsistent input data */
  CSPAN_NUMERIC_ERROR = 3 /* numeric failure during computation */
} cspan_status;

typedef struct cspan_config cspan_config;

/* One log message per call; messages may span multiple lines. */
typedef void (*cspan_log_fn)(void* user_data, const char* message);

/* Configuration handle with built-in defaults. Never fails; returns NULL
 * only on allocation failure. */
cspan_config* cspan_config_new(void);
void cspan_config_free(cspan_config* config);

/* Loads `key = value` lines; '#' starts a comment; unknown keys rejected. */
cspan_status cspan_config_load_file(cspan_config* config, const char* path);

/* Sets a single key. */
cspan_status cspan_config_set(cspan_config* config, const char* key, const char* value);

/* Fully resolved configuration, one `key = value` line per field. The string
 * is owned by the handle and valid until the next call that uses it. */
const char* cspan_config_resolved(cspan_config* config);

/* Commands. The log callback may be NULL. */
cspan_status cspan_train(cspan_config* config, cspan_log_fn log, void* user_data);
cspan_status cspan_predict(cspan_config* config, cspan_log_fn log, void* user_data);
cspan_status cspan_score(cspan_config* config, cspan_log_fn log, void* user_data);
cspan_status cspan_inspect(cspan_config* config, cspan_log_fn log, void* user_data);
cspan_status cspan_generate(cspan_config* config, cspan_log_fn log, void* user_data);

/* Message from the most recent failing call on this thread ("" if none). */
const char* cspan_last_error(void);

#ifdef __cplusplus
}
#endif

#endif /* CSPAN_H */
