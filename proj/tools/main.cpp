#include <cstdio>
#include <cstring>
#include <string>

#include "cspan/cspan.h"

namespace {

void print_usage(std::FILE* out) {
  std::fputs(
      "usage: cspan <command> [--config FILE] [--KEY VALUE]...\n"
      "\n"
      "commands:\n"
      "  gen      write a synthetic corpus to `output`\n"
      "  train    train a model and save it to `checkpoint`\n"
      "  predict  load `checkpoint`, resolve `input`, write `output`\n"
      "  score    compare `pred` against `gold` and print metrics\n"
      "  inspect  print attention weights for mentions in `input`\n"
      "\n"
      "Any configuration key can be set on the command line as --KEY VALUE;\n"
      "later settings override earlier ones and the config file.\n",
      out);
}

void log_to_stdout(void*, const char* message) {
  std::fputs(message, stdout);
  std::fputc('\n', stdout);
}

int fail(cspan_status status) {
  std::fprintf(stderr, "error: %s\n", cspan_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage(stderr);
    return static_cast<int>(CSPAN_USAGE_ERROR);
  }
  const std::string command = argv[1];
  if (command == "--help" || command == "-h" || command == "help") {
    print_usage(stdout);
    return 0;
  }

  cspan_status (*entry)(cspan_config*, cspan_log_fn, void*) = nullptr;
  if (command == "gen") entry = &cspan_generate;
  else if (command == "train") entry = &cspan_train;
  else if (command == "predict") entry = &cspan_predict;
  else if (command == "score") entry = &cspan_score;
  else if (command == "inspect") entry = &cspan_inspect;
  if (entry == nullptr) {
    std::fprintf(stderr, "error: unknown command '%s'\n\n", command.c_str());
    print_usage(stderr);
    return static_cast<int>(CSPAN_USAGE_ERROR);
  }

  cspan_config* config = cspan_config_new();
  if (config == nullptr) {
    std::fputs("error: out of memory\n", stderr);
    return static_cast<int>(CSPAN_DATA_ERROR);
  }

  int rc = 0;
  for (int i = 2; i < argc; ++i) {
    const char* arg = argv[i];
    if (std::strncmp(arg, "--", 2) != 0) {
      std::fprintf(stderr, "error: expected --KEY, got '%s'\n", arg);
      rc = static_cast<int>(CSPAN_USAGE_ERROR);
      break;
    }
    if (i + 1 >= argc) {
      std::fprintf(stderr, "error: missing value for '%s'\n", arg);
      rc = static_cast<int>(CSPAN_USAGE_ERROR);
      break;
    }
    const char* key = arg + 2;
    const char* value = argv[++i];
    cspan_status st = (std::strcmp(key, "config") == 0)
                          ? cspan_config_load_file(config, value)
                          : cspan_config_set(config, key, value);
    if (st != CSPAN_OK) {
      rc = fail(st);
      break;
    }
  }

  if (rc == 0) {
    cspan_status st = entry(config, &log_to_stdout, nullptr);
    if (st != CSPAN_OK) rc = fail(st);
  }

  cspan_config_free(config);
  return rc;
}
