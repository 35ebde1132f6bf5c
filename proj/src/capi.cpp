// SPDX-License-Identifier: Apache-2.0
#include "spinmet.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "spinmet/analytic.hpp"
#include "spinmet/harness.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename F>
spinmet_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SPINMET_OK;
  } catch (const spinmet::harness::config_error& e) {
    set_error(e.what());
    return SPINMET_ERR_CONFIG;
  } catch (const spinmet::numeric_error& e) {
    set_error(e.what());
    return SPINMET_ERR_NUMERIC;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return SPINMET_ERR_INVALID_ARG;
  } catch (const std::exception& e) {
    set_error(e.what());
    return SPINMET_ERR_IO;
  }
}

}  // namespace

struct spinmet_config {
  spinmet::harness::RunConfig cfg;
};

struct spinmet_result {
  spinmet::harness::RunOutput output;
  spinmet::harness::RunConfig cfg;  // the configuration that produced it
};

extern "C" {

spinmet_config* spinmet_config_create(void) { return new spinmet_config(); }

void spinmet_config_free(spinmet_config* cfg) { delete cfg; }

spinmet_status spinmet_config_set(spinmet_config* cfg, const char* key,
                                  const char* value) {
  if (!cfg || !key || !value) {
    set_error("null argument");
    return SPINMET_ERR_INVALID_ARG;
  }
  return guarded([&] { spinmet::harness::apply_kv(cfg->cfg, key, value); });
}

spinmet_status spinmet_config_get(const spinmet_config* cfg, const char* key,
                                  char* buf, size_t buflen) {
  if (!cfg || !key || !buf || buflen == 0) {
    set_error("null argument");
    return SPINMET_ERR_INVALID_ARG;
  }
  std::string value;
  const spinmet_status st =
      guarded([&] { value = spinmet::harness::get_kv(cfg->cfg, key); });
  if (st != SPINMET_OK) return st;
  const size_t n = std::min(buflen - 1, value.size());
  std::memcpy(buf, value.data(), n);
  buf[n] = '\0';
  return SPINMET_OK;
}

spinmet_status spinmet_config_load_file(spinmet_config* cfg, const char* path) {
  if (!cfg || !path) {
    set_error("null argument");
    return SPINMET_ERR_INVALID_ARG;
  }
  std::ifstream f(path);
  if (!f) {
    set_error(std::string("cannot open config file: ") + path);
    return SPINMET_ERR_IO;
  }
  std::ostringstream body;
  body << f.rdbuf();
  return guarded(
      [&] { cfg->cfg = spinmet::harness::parse_config_text(body.str()); });
}

spinmet_status spinmet_run(const spinmet_config* cfg, spinmet_result** result) {
  if (!cfg || !result) {
    set_error("null argument");
    return SPINMET_ERR_INVALID_ARG;
  }
  *result = nullptr;
  auto out = new spinmet_result();
  out->cfg = cfg->cfg;
  const spinmet_status st =
      guarded([&] { out->output = spinmet::harness::run(cfg->cfg); });
  if (st != SPINMET_OK) {
    delete out;
    return st;
  }
  *result = out;
  return SPINMET_OK;
}

void spinmet_result_free(spinmet_result* result) { delete result; }

size_t spinmet_result_count(const spinmet_result* result) {
  if (!result) return 0;
  if (!result->output.checks.empty()) return result->output.checks.size();
  return result->output.records.size();
}

int spinmet_result_status(const spinmet_result* result) {
  return result ? result->output.status : -1;
}

const char* spinmet_result_csv(const spinmet_result* result) {
  return result ? result->output.csv.c_str() : "";
}

const char* spinmet_result_json(const spinmet_result* result) {
  return result ? result->output.json.c_str() : "";
}

const char* spinmet_result_manifest_json(const spinmet_result* result) {
  return result ? result->output.manifest_json.c_str() : "";
}

spinmet_status spinmet_result_value(const spinmet_result* result, size_t i,
                                    const char* field, double* value) {
  if (!result || !field || !value) {
    set_error("null argument");
    return SPINMET_ERR_INVALID_ARG;
  }
  if (i >= result->output.records.size()) {
    set_error("record index out of range");
    return SPINMET_ERR_INVALID_ARG;
  }
  const auto& rec = result->output.records[i];
  const std::string f = field;
  if (f == "fq_plus_eff")
    *value = rec.fq_plus_eff;
  else if (f == "fq_minus_eff")
    *value = rec.fq_minus_eff;
  else if (f == "fq_total")
    *value = rec.fq_total;
  else if (f == "fc" && rec.fc)
    *value = *rec.fc;
  else if (f == "prob_plus")
    *value = rec.prob_plus;
  else if (f == "prob_minus")
    *value = rec.prob_minus;
  else {
    set_error(std::string("unknown or unset result field: ") + field);
    return SPINMET_ERR_INVALID_ARG;
  }
  return SPINMET_OK;
}

spinmet_status spinmet_result_write(const spinmet_result* result,
                                    const spinmet_config* cfg, const char* path) {
  if (!result || !cfg || !path) {
    set_error("null argument");
    return SPINMET_ERR_INVALID_ARG;
  }
  return guarded(
      [&] { spinmet::harness::write_output(result->output, cfg->cfg, path); });
}

spinmet_status spinmet_hl_qfi(int N, double* value) {
  if (!value) return SPINMET_ERR_INVALID_ARG;
  return guarded([&] { *value = spinmet::analytic::hl_qfi(N); });
}

spinmet_status spinmet_thermal_qfi_exact(int N, double beta, double* value) {
  if (!value) return SPINMET_ERR_INVALID_ARG;
  return guarded([&] { *value = spinmet::analytic::thermal_qfi_exact(N, beta); });
}

spinmet_status spinmet_thermal_qfi_bound(int N, double beta, double* value) {
  if (!value) return SPINMET_ERR_INVALID_ARG;
  return guarded(
      [&] { *value = spinmet::analytic::thermal_qfi_lower_bound(N, beta); });
}

spinmet_status spinmet_measurement_delay_qfi(int N, double dt, double omega_a,
                                             double t1opt, double theta, double g,
                                             double* value) {
  if (!value) return SPINMET_ERR_INVALID_ARG;
  return guarded([&] {
    *value =
        spinmet::analytic::measurement_delay_qfi(N, dt, omega_a, t1opt, theta, g)
            .value;
  });
}

spinmet_status spinmet_encoding_delay_qfi(int N, double dt, double g,
                                          double omega_p, double* value) {
  if (!value) return SPINMET_ERR_INVALID_ARG;
  return guarded(
      [&] { *value = spinmet::analytic::encoding_delay_qfi(N, dt, g, omega_p); });
}

const char* spinmet_last_error(void) { return g_last_error.c_str(); }

}  // extern "C"
