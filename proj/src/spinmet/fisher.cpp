// SPDX-License-Identifier: Apache-2.0
#include "spinmet/fisher.hpp"

#include <cmath>

namespace spinmet::fisher {

namespace {

// one branch of the probability-weighted pure-state formula
double branch_eff_qfi(const Vector& psi, const Vector& dpsi) {
  const double n = psi.squaredNorm();
  if (n < 1e-300) return 0.0;
  const double dn = 2.0 * std::real(psi.dot(dpsi));  // d/dtheta of N
  const double inv = 1.0 / std::sqrt(n);
  Vector psin = psi * inv;
  Vector dpsin = dpsi * inv - psi * (0.5 * dn / (n * std::sqrt(n)));
  const double term = dpsin.squaredNorm() - std::norm(psin.dot(dpsin));
  return 4.0 * n * term;
}

protocol::PureBranches central_difference(const PureFamily& family, double theta0,
                                          double h) {
  protocol::PureBranches hi = family(theta0 + h);
  protocol::PureBranches lo = family(theta0 - h);
  protocol::PureBranches out;
  out.plus = (hi.plus - lo.plus) / (2.0 * h);
  out.minus = (hi.minus - lo.minus) / (2.0 * h);
  return out;
}

}  // namespace

FisherReport qfi_pure_branches(const PureFamily& family, double theta0,
                               const PureFamily* analytic_derivative) {
  protocol::PureBranches psi = family(theta0);
  protocol::PureBranches dpsi;
  FisherReport report;
  report.theta = theta0;
  if (analytic_derivative) {
    dpsi = (*analytic_derivative)(theta0);
    report.method = "pure/analytic";
  } else {
    // central difference with one Richardson refinement
    const double h = 1e-5;
    protocol::PureBranches d1 = central_difference(family, theta0, h);
    protocol::PureBranches d2 = central_difference(family, theta0, h / 2);
    dpsi.plus = (4.0 * d2.plus - d1.plus) / 3.0;
    dpsi.minus = (4.0 * d2.minus - d1.minus) / 3.0;
    report.method = "pure/central-difference";
  }
  report.fq_plus_eff = branch_eff_qfi(psi.plus, dpsi.plus);
  report.fq_minus_eff = branch_eff_qfi(psi.minus, dpsi.minus);
  report.fq_total = report.fq_plus_eff + report.fq_minus_eff;
  report.prob_plus = psi.plus.squaredNorm();
  return report;
}

double qfi_sld(const StateFamily& family, double theta0, double h) {
  const Matrix rho = family(theta0);
  const int d = static_cast<int>(rho.rows());
  if (rho.diagonal().real().minCoeff() < -1e-8 ||
      (rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw numeric_error("qfi_sld: family returned an invalid density matrix");

  auto diff = [&](double step) -> Matrix {
    return (family(theta0 + step) - family(theta0 - step)) / (2.0 * step);
  };
  const Matrix drho = (4.0 * diff(h / 2) - diff(h)) / 3.0;

  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  if (es.info() != Eigen::Success) throw numeric_error("qfi_sld: eigensolve failed");
  const RealVector p = es.eigenvalues();
  if (p.minCoeff() < -1e-10)
    throw numeric_error("qfi_sld: density matrix has a negative eigenvalue");

  const Matrix dm = es.eigenvectors().adjoint() * drho * es.eigenvectors();
  double f = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double s = p(i) + p(j);
      if (s > kWeightFloor) f += 2.0 * std::norm(dm(i, j)) / s;
    }
  return f;
}

double qfi_spectral(const RealVector& weights, const Matrix& eigvecs,
                    const GeneratorSpec& generator) {
  const int r = static_cast<int>(weights.size());
  if (eigvecs.cols() != r || eigvecs.rows() != generator.mat.rows())
    throw std::invalid_argument("qfi_spectral: dimension mismatch");
  if (std::abs(weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("qfi_spectral: weights must sum to 1");

  const Matrix gv = generator.mat * eigvecs;          // G |psi_j>
  const Matrix g2 = gv.adjoint() * gv;                // <psi_i|G'G|psi_j>
  const Matrix cross = eigvecs.adjoint() * gv;        // <psi_i|G|psi_j>

  double f = 0.0;
  for (int i = 0; i < r; ++i) f += 4.0 * weights(i) * g2(i, i).real();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      const double s = weights(i) + weights(j);
      if (s > kWeightFloor)
        f -= 8.0 * weights(i) * weights(j) / s * std::norm(cross(i, j));
    }
  return f;
}

GeneratorExtremes generator_extremes(const Matrix& h) {
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("generator_extremes: H must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw numeric_error("generator_extremes: eigensolve failed");
  const int d = static_cast<int>(h.rows());
  GeneratorExtremes out;
  out.lambda_min = es.eigenvalues()(0);
  out.lambda_max = es.eigenvalues()(d - 1);
  out.fq_max = (out.lambda_max - out.lambda_min) * (out.lambda_max - out.lambda_min);
  out.state = (es.eigenvectors().col(d - 1) + es.eigenvectors().col(0)) / std::sqrt(2.0);
  const double gap_tol = 1e-10 * std::max(1.0, std::abs(out.lambda_max));
  out.degenerate =
      d > 1 && (es.eigenvalues()(1) - out.lambda_min < gap_tol ||
                out.lambda_max - es.eigenvalues()(d - 2) < gap_tol);
  return out;
}

CfiResult cfi(const DistributionFamily& family, double theta0,
              const DistributionFamily* analytic_derivative, CfiOptions opts) {
  const RealVector p = family(theta0);
  RealVector dp;
  if (analytic_derivative) {
    dp = (*analytic_derivative)(theta0);
  } else {
    auto diff = [&](double step) -> RealVector {
      return (family(theta0 + step) - family(theta0 - step)) / (2.0 * step);
    };
    dp = (4.0 * diff(opts.h / 2) - diff(opts.h)) / 3.0;
  }

  CfiResult out;
  for (int i = 0; i < p.size(); ++i) {
    if (p(i) > opts.eps) {
      out.value += dp(i) * dp(i) / p(i);
    } else if (std::abs(dp(i)) > opts.slope_tol) {
      out.singular = true;  // vanishing probability with non-vanishing slope
    }
  }
  return out;
}

}  // namespace spinmet::fisher
