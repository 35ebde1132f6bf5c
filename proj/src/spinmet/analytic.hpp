// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "spinmet/spin_algebra.hpp"

namespace spinmet::analytic {

// N^2, the Heisenberg-limit QFI of the optimized protocol.
double hl_qfi(int N);

// One m-component of a superposed probe: c_m (a_m|j,m> + b_m e^{-i phi_m}|j,-m>)_opt.
struct SuperpositionComponent {
  double c_abs2;  // |c_m|^2
  double a, b, phi;
  double m;
};
// F_Q = 4 sum m^2 |c_m|^2 (1 - 4 a_m^2 b_m^2 sin^2 phi_m)
double superposition_qfi(const std::vector<SuperpositionComponent>& components);

// Exact thermal double sum (log-domain, safe for large beta*N):
// F = (4/Z) sum m^2 e^{-m beta} - (8/Z) sum m^2/(e^{-m beta}+e^{m beta}).
double thermal_qfi_exact(int N, double beta);

// Large-N lower bound:
// N^2 - 4N/(e^b-1) + 4(e^b+1)/(e^b-1)^2 - (pi^3/b^3) e^{-N b/2}(1-e^{-b}).
double thermal_qfi_lower_bound(int N, double beta);

struct DelayQfi {
  double value = 0.0;
  bool degenerate = false;  // 0/0 point resolved by its continuous limit
};
// N^2 [1 - sin^{2N}(g dt)] / (1 - sin^{2N}(g dt) cos^2[2 wA(dt+t1opt)+N theta])
DelayQfi measurement_delay_qfi(int N, double dt, double omega_a, double t1opt,
                               double theta, double g);

// (N/4){2(N+1) + (N-1)[cos(2 dt(g-wP)) + cos(2 dt(g+wP))]}
double encoding_delay_qfi(int N, double dt, double g, double omega_p);

// N^2 - N(N-1)(g^2+wP^2) dt^2
double encoding_delay_qfi_quadratic(int N, double dt, double g, double omega_p);

// N_± = [1 ± cos(2 wA t1) cos^N(g t1)]/2
std::pair<double, double> general_t1_probability(int N, double omega_a, double g,
                                                 double t1);

// Spectral QFI with the decoupled-ancilla generator
// J_phi = cos(phi) Jx - sin(phi) Jy, phi = wP t1.
double no_ancilla_qfi(const RealVector& weights, const Matrix& eigvecs, int N,
                      double omega_p, double t1);

// N^2: CFI of the Jz projective readout for an optimized probe, any t2.
double cfi_optimal(int N);

}  // namespace spinmet::analytic
