// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spinmet/fisher.hpp"
#include "spinmet/protocol.hpp"

namespace spinmet::harness {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key = value configuration; every key doubles as a CLI flag.
// omega_a and t1 are kept as text so that "auto"/"opt" survive round-trips.
struct RunConfig {
  std::string mode = "qfi";  // qfi | cfi | sweep | figure | validate
  int N = 10;
  double omega_p = 10.0;
  std::string omega_a = "auto";  // number, or "auto" = Eq.-26 value with the
                                 // parity rule n2 (omega_a close to 5g)
  double g = 1.0;
  std::string t1 = "opt";  // number, or "opt" = (n1+1/2) pi/g
  int n1 = 0;
  double t2 = 0.0;
  double theta = 0.0;
  double dt = 0.0;
  double beta = 1.0;
  std::string prep = "polarized+";  // polarized+ | polarized- | superposed |
                                    // ghz | thermal
  double a = 0.6, b = 0.8, phi = 0.0, phi0 = 0.0;
  std::string ancilla = "plus";  // plus | minus | ground | excited
  std::string schedule = "synchronous";  // synchronous | measurement_delay |
                                         // encoding_delay
  std::string axis = "theta";  // N | t1 | t2 | theta | dt | beta
  double start = 0.0, stop = 6.283185307179586;
  int points = 50;
  std::string figure = "fig2";  // fig2 | fig3a..fig3f | fig4
  std::string method = "all";   // pure | spectral | sld | all
  std::string out;              // empty = stdout
  std::string format = "csv";   // csv | json
  double tol = 0.0;             // >0 overrides validation tolerances
  int jobs = 1;
};

std::vector<std::string> config_keys();
void apply_kv(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_kv(const RunConfig& cfg, const std::string& key);
RunConfig parse_config_text(const std::string& text);
std::string serialize_config(const RunConfig& cfg);

// Physical inputs for one evaluation, with t1/omega_a resolved to numbers.
struct Point {
  protocol::ProtocolParams params;
  protocol::ProbePrep prep;
  protocol::AncillaPrep ancilla;
  protocol::Schedule schedule;
};
Point resolve(const RunConfig& cfg);

struct ResultRecord {
  RunConfig inputs;   // fully resolved echo of the evaluated point
  double fq_plus_eff = 0.0, fq_minus_eff = 0.0, fq_total = 0.0;
  std::optional<double> fc;
  double prob_plus = 0.0, prob_minus = 0.0;
  std::string method;
};

struct ValidationCheck {
  std::string name;
  std::string status;  // PASS | WARN | FAIL
  double residual = 0.0;
  double tolerance = 0.0;
  std::string note;
};

struct RunOutput {
  int status = 0;  // 0 ok, 2 validation failure
  std::vector<ResultRecord> records;
  std::string csv;            // dataset in the mode's schema
  std::string json;           // same dataset as JSON (plus wall time)
  std::string manifest_json;  // figure parameter manifest (figure mode)
  std::vector<ValidationCheck> checks;  // validate mode
  double wall_ms = 0.0;
};

RunOutput run(const RunConfig& cfg);

// Writes output.csv (or .json per format) to path; figure mode additionally
// writes <path>.manifest.json.
void write_output(const RunOutput& output, const RunConfig& cfg,
                  const std::string& path);

// --- building blocks shared with the test suites ---

// Branch-summed QFI of the simulated circuit via the SLD oracle on the
// normalized branch states. Works for pure and mixed preparations. U(t2) is
// theta-independent and cancels from the QFI, so branch families are built at
// t2 = 0 (probe-reduced where the branch factorizes).
double circuit_qfi_sld(const Point& point);

// Branch-summed QFI via the Eq.-(27) spectral generator e^{-i pi Jz} J_opt
// (valid when the unitarity condition on omega_a holds).
double circuit_qfi_spectral(const Point& point);

// Pure-probe branch QFI with analytic derivative insertion.
fisher::FisherReport circuit_qfi_pure(const Point& point);

// CFI of the Jz (x) sign outcome distribution; analytic derivative.
fisher::CfiResult circuit_cfi(const Point& point);

// Outcome distribution over (m, +) then (m, -), normalized over both.
RealVector outcome_distribution(const Point& point, double theta);
RealVector outcome_distribution_derivative(const Point& point, double theta);

std::string format_double(double v);  // 12 significant digits

}  // namespace spinmet::harness
