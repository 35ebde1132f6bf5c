// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>

#include "spinmet/protocol.hpp"

namespace spinmet::fisher {

// Effective phase generator; mat may be a unitary-times-Hermitian product
// such as e^{-i pi Jz} J_opt.
struct GeneratorSpec {
  Matrix mat;
  std::string label;
};

struct FisherReport {
  double fq_plus_eff = 0.0;
  double fq_minus_eff = 0.0;
  double fq_total = 0.0;
  std::optional<double> fc;
  double prob_plus = 0.0;
  double theta = 0.0;
  std::string method;
};

// theta -> pair of unnormalized branch vectors
using PureFamily = std::function<protocol::PureBranches(double)>;
// theta -> normalized density matrix
using StateFamily = std::function<Matrix(double)>;
// theta -> probability vector over outcomes
using DistributionFamily = std::function<RealVector(double)>;

// Branch-summed QFI for pure branch families:
// F_{±,eff} = 4 N_± [<dPsi'|dPsi'> - |<Psi'|dPsi'>|^2] with Psi' normalized.
// The derivative is analytic when a derivative family is supplied, otherwise
// central difference with one Richardson refinement.
FisherReport qfi_pure_branches(const PureFamily& family, double theta0,
                               const PureFamily* analytic_derivative = nullptr);

// SLD-based QFI; the reference oracle for every other QFI path. d rho/d theta
// by Richardson-refined central difference.
double qfi_sld(const StateFamily& family, double theta0, double h = 1e-5);

// Eq.-(10)-style spectral QFI on an initial-state eigendecomposition:
// F = sum 4 p_i <i|G'G|i> - sum 8 p_i p_j/(p_i+p_j) |<i|G|j>|^2.
double qfi_spectral(const RealVector& weights, const Matrix& eigvecs,
                    const GeneratorSpec& generator);

struct GeneratorExtremes {
  double lambda_max = 0.0, lambda_min = 0.0;
  double fq_max = 0.0;  // (lambda_max - lambda_min)^2
  Vector state;         // (|max> + |min>)/sqrt(2)
  bool degenerate = false;
};
GeneratorExtremes generator_extremes(const Matrix& h);

struct CfiOptions {
  double h = 1e-5;          // central-difference step
  double eps = 1e-14;       // outcome-probability floor
  double slope_tol = 1e-9;  // flag threshold for vanishing-p outcomes
};
struct CfiResult {
  double value = 0.0;
  bool singular = false;  // some outcome had p <= eps but |dp| > slope_tol
};
CfiResult cfi(const DistributionFamily& family, double theta0,
              const DistributionFamily* analytic_derivative = nullptr,
              CfiOptions opts = {});

// Relative-probability floor for the spectral/SLD denominators p_i + p_j.
inline constexpr double kWeightFloor = 1e-12;

}  // namespace spinmet::fisher
