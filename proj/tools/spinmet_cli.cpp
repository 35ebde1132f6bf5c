// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end; talks to the engine exclusively through the C API.

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spinmet.h"

namespace {

int fail(spinmet_status st) {
  std::fprintf(stderr, "error: %s\n", spinmet_last_error());
  switch (st) {
    case SPINMET_ERR_NUMERIC:
      return 3;
    default:
      return 1;
  }
}

const std::vector<std::string> kKeys = {
    "N",    "omega_p", "omega_a", "g",      "t1",   "n1",     "t2",
    "theta", "dt",     "beta",    "prep",   "a",    "b",      "phi",
    "phi0", "ancilla", "schedule", "axis",  "start", "stop",  "points",
    "figure", "method", "out",    "format", "tol",  "jobs"};

struct ConfigDeleter {
  void operator()(spinmet_config* c) const { spinmet_config_free(c); }
};
struct ResultDeleter {
  void operator()(spinmet_result* r) const { spinmet_result_free(r); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spin-ensemble metrology simulator and verifier"};
  app.require_subcommand(1);

  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<CLI::App*> subs;
  for (const char* name : {"qfi", "cfi", "sweep", "figure", "validate"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "key = value configuration file");
    for (const auto& key : kKeys)
      sub->add_option("--" + key, values[key], "config key '" + key + "'");
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);
  CLI::App* active = app.get_subcommands().front();

  std::unique_ptr<spinmet_config, ConfigDeleter> cfg(spinmet_config_create());
  if (!config_path.empty()) {
    const spinmet_status st = spinmet_config_load_file(cfg.get(), config_path.c_str());
    if (st != SPINMET_OK) return fail(st);
  }
  {
    const spinmet_status st =
        spinmet_config_set(cfg.get(), "mode", active->get_name().c_str());
    if (st != SPINMET_OK) return fail(st);
  }
  for (const auto& key : kKeys) {
    if (active->count("--" + key) == 0) continue;
    const spinmet_status st =
        spinmet_config_set(cfg.get(), key.c_str(), values[key].c_str());
    if (st != SPINMET_OK) return fail(st);
  }

  spinmet_result* raw = nullptr;
  const spinmet_status st = spinmet_run(cfg.get(), &raw);
  if (st != SPINMET_OK) return fail(st);
  std::unique_ptr<spinmet_result, ResultDeleter> result(raw);

  char out_path[4096];
  char format[16];
  spinmet_config_get(cfg.get(), "out", out_path, sizeof(out_path));
  spinmet_config_get(cfg.get(), "format", format, sizeof(format));
  if (out_path[0] != '\0') {
    const spinmet_status wst =
        spinmet_result_write(result.get(), cfg.get(), out_path);
    if (wst != SPINMET_OK) return fail(wst);
  } else {
    std::fputs(std::string(format) == "json" ? spinmet_result_json(result.get())
                                             : spinmet_result_csv(result.get()),
               stdout);
  }

  return spinmet_result_status(result.get()) == 0 ? 0 : 2;
}
