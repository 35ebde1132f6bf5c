// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "spinmet/spin_algebra.hpp"

namespace spinmet::protocol {

// All times in units of 1/g, frequencies in units of g (g itself sets the
// scale and must stay positive). t1_frame is the evolution time entering the
// J_opt rotated frame of the prepared probe; it stays pinned to the optimized
// time when t1 itself is swept.
struct ProtocolParams {
  int N = 10;
  double omega_p = 10.0;
  double omega_a = 5.5;
  double g = 1.0;
  double t1 = M_PI / 2;
  double t2 = 0.0;
  double theta = 0.0;
  double t1_frame = M_PI / 2;
  SpinDimension dim() const { return SpinDimension(N); }
  void validate() const;
};

struct ProbePrep {
  enum class Kind { PolarizedOpt, SuperposedOpt, GhzX, DickeMixture, Thermal };
  Kind kind = Kind::PolarizedOpt;
  int sign = +1;                          // PolarizedOpt
  double a = 1.0, b = 0.0, phi = 0.0;     // SuperposedOpt: a|j,j> + b e^{-i phi}|j,-j>
  double phi0 = 0.0;                      // GhzX relative phase
  std::vector<double> weights;            // DickeMixture over m = +j..-j
  double beta = 1.0;                      // Thermal inverse temperature

  static ProbePrep polarized(int sign = +1);
  static ProbePrep superposed(double a, double b, double phi);
  static ProbePrep ghz(double phi0 = 0.0);
  static ProbePrep mixture(std::vector<double> weights);
  static ProbePrep thermal(double beta);
  bool is_pure() const {
    return kind == Kind::PolarizedOpt || kind == Kind::SuperposedOpt ||
           kind == Kind::GhzX;
  }
};

struct AncillaPrep {
  enum class Kind { Plus, Minus, Ground, Excited, Bloch };
  Kind kind = Kind::Plus;
  double bloch_theta = 0.0, bloch_phi = 0.0;
  // qubit amplitudes over (|e>, |g>), sigma_z|e> = +|e>
  Eigen::Vector2cd vec() const;
};

struct Schedule {
  enum class Variant { Synchronous, MeasurementDelay, EncodingDelay };
  Variant variant = Variant::Synchronous;
  double dt = 0.0;
  static Schedule synchronous() { return {Variant::Synchronous, 0.0}; }
  static Schedule measurement_delay(double dt);
  static Schedule encoding_delay(double dt);
};

struct BranchOutcome {
  int sign = +1;                          // +: outcome |+>, -: outcome |->
  double probability = 0.0;
  std::optional<PureVector> pure;         // normalized composite state
  std::optional<DensityMatrix> mixed;
  bool null_state() const { return !pure && !mixed; }
};

struct CircuitResult {
  BranchOutcome plus, minus;
  ProtocolParams params;
  Schedule schedule;
};

// Spectral decomposition of a prepared probe state in the Jz basis:
// rho = sum_k weights(k) |vectors.col(k)><vectors.col(k)|.
struct ProbeState {
  RealVector weights;
  Matrix vectors;  // d x r, orthonormal columns
  bool pure() const { return weights.size() == 1; }
  Vector pure_vector() const { return vectors.col(0); }
  Matrix density() const;
};

Operator full_hamiltonian(const ProtocolParams& params);

// (n1 + 1/2) pi / g; n1 >= 0
double optimal_t1(double g, int n1);

// (N + 1 + 2 n2) pi / (4 t1opt)
double optimal_omega_a(int N, double t1opt, int n2);

// n2 = (9-N)/2 for odd N, (10-N)/2 for even N; gives omega_a close to 5g.
int caption_n2(int N);

ProbeState prepare_probe(const ProbePrep& prep, const ProtocolParams& params);

std::pair<BranchOutcome, BranchOutcome> measure_sigma_x(const PureVector& state);
std::pair<BranchOutcome, BranchOutcome> measure_sigma_x(const DensityMatrix& state);

// Executes the full circuit, returning both measurement branches.
CircuitResult run(const ProtocolParams& params, const ProbePrep& prep,
                  const AncillaPrep& ancilla, const Schedule& schedule);

// Unnormalized composite branch vectors for a pure probe state, with the
// ordering of operations dictated by the schedule.
struct PureBranches {
  Vector plus, minus;
};
PureBranches run_pure(const ProtocolParams& params, const Vector& probe,
                      const AncillaPrep& ancilla, const Schedule& schedule);
// d/dtheta of run_pure (analytic: -iJx inserted at the encoding slot).
PureBranches run_pure_derivative(const ProtocolParams& params, const Vector& probe,
                                 const AncillaPrep& ancilla, const Schedule& schedule);

// Both branches for every column of a d x r probe matrix at once; the theta
// rotation is built a single time and shared. Columns of plus/minus are the
// unnormalized 2d composite branch vectors.
struct BranchMatrices {
  Matrix plus, minus;
};
BranchMatrices run_pure_batch(const ProtocolParams& params, const Matrix& probes,
                              const AncillaPrep& ancilla, const Schedule& schedule,
                              bool derivative = false);

// Diagonal branch Kraus operators <±|U(t1)|ancilla> acting on the probe.
std::pair<Vector, Vector> branch_kraus(const ProtocolParams& params,
                                       const AncillaPrep& ancilla);

// P(m, sign | theta): probe Jz populations scaled by the branch probability.
RealVector branch_distribution(const BranchOutcome& branch);

}  // namespace spinmet::protocol
