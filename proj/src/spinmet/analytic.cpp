// SPDX-License-Identifier: Apache-2.0
#include "spinmet/analytic.hpp"

#include <cmath>
#include <stdexcept>

#include "spinmet/fisher.hpp"

namespace spinmet::analytic {

namespace {
void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

double hl_qfi(int N) {
  require(N >= 1, "N must be >= 1");
  return double(N) * double(N);
}

double superposition_qfi(const std::vector<SuperpositionComponent>& components) {
  double csum = 0.0, f = 0.0;
  for (const auto& c : components) {
    require(c.c_abs2 >= 0.0, "|c_m|^2 must be nonnegative");
    require(std::abs(c.a * c.a + c.b * c.b - 1.0) <= 1e-9,
            "each component needs a^2 + b^2 = 1");
    csum += c.c_abs2;
    const double s = std::sin(c.phi);
    f += 4.0 * c.m * c.m * c.c_abs2 *
         (1.0 - 4.0 * c.a * c.a * c.b * c.b * s * s);
  }
  require(std::abs(csum - 1.0) <= 1e-9, "component weights must sum to 1");
  return f;
}

double thermal_qfi_exact(int N, double beta) {
  require(N >= 1, "N must be >= 1");
  require(std::isfinite(beta), "beta must be finite");
  const double j = 0.5 * N;
  // log-domain: weights shifted by the largest exponent
  double xmax = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= N; ++k) xmax = std::max(xmax, -(j - k) * beta);
  double z = 0.0, first = 0.0;
  for (int k = 0; k <= N; ++k) {
    const double m = j - k;
    const double w = std::exp(-m * beta - xmax);
    z += w;
    first += m * m * w;
  }
  const double log_z = xmax + std::log(z);
  double second = 0.0;
  for (int k = 0; k <= N; ++k) {
    const double m = j - k;
    // log(e^{-m b} + e^{m b}) = |m b| + log1p(e^{-2|m b|})
    const double lse = std::abs(m * beta) + std::log1p(std::exp(-2.0 * std::abs(m * beta)));
    second += m * m * std::exp(-(log_z + lse));
  }
  return 4.0 * first / z - 8.0 * second;
}

double thermal_qfi_lower_bound(int N, double beta) {
  require(N >= 1, "N must be >= 1");
  require(beta > 0.0, "the bound is derived for beta > 0");
  const double em1 = std::expm1(beta);  // e^beta - 1
  const double eb = std::exp(beta);
  const double nn = double(N);
  return nn * nn - 4.0 * nn / em1 + 4.0 * (eb + 1.0) / (em1 * em1) -
         (std::pow(M_PI, 3) / std::pow(beta, 3)) * std::exp(-nn * beta / 2.0) *
             (1.0 - std::exp(-beta));
}

DelayQfi measurement_delay_qfi(int N, double dt, double omega_a, double t1opt,
                               double theta, double g) {
  require(N >= 1, "N must be >= 1");
  const double nn = double(N);
  const double s2n = std::pow(std::sin(g * dt) * std::sin(g * dt), N);
  const double c = std::cos(2.0 * omega_a * (dt + t1opt) + nn * theta);
  const double num = nn * nn * (1.0 - s2n);
  const double den = 1.0 - s2n * c * c;
  DelayQfi out;
  if (den < 1e-14 && num < 1e-14 * nn * nn) {
    // 0/0 at sin^2(g dt) = 1 and cos^2 = 1: continuous limit along dt is N^2
    out.value = nn * nn;
    out.degenerate = true;
  } else {
    out.value = num / den;
  }
  return out;
}

double encoding_delay_qfi(int N, double dt, double g, double omega_p) {
  require(N >= 1, "N must be >= 1");
  const double nn = double(N);
  return 0.25 * nn *
         (2.0 * (nn + 1.0) +
          (nn - 1.0) * (std::cos(2.0 * dt * (g - omega_p)) +
                        std::cos(2.0 * dt * (g + omega_p))));
}

double encoding_delay_qfi_quadratic(int N, double dt, double g, double omega_p) {
  require(N >= 1, "N must be >= 1");
  const double nn = double(N);
  return nn * nn - nn * (nn - 1.0) * (g * g + omega_p * omega_p) * dt * dt;
}

std::pair<double, double> general_t1_probability(int N, double omega_a, double g,
                                                 double t1) {
  require(N >= 1, "N must be >= 1");
  const double p =
      0.5 * (1.0 + std::cos(2.0 * omega_a * t1) * std::pow(std::cos(g * t1), N));
  return {p, 1.0 - p};
}

double no_ancilla_qfi(const RealVector& weights, const Matrix& eigvecs, int N,
                      double omega_p, double t1) {
  const SpinDimension dim{N};
  const double phi = omega_p * t1;
  Matrix jphi = std::cos(phi) * collective_operator(dim, Axis::X).mat -
                std::sin(phi) * collective_operator(dim, Axis::Y).mat;
  return fisher::qfi_spectral(weights, eigvecs,
                              fisher::GeneratorSpec{std::move(jphi), "J_phi"});
}

double cfi_optimal(int N) { return hl_qfi(N); }

}  // namespace spinmet::analytic
