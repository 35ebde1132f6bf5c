// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace spinmet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Raised when an intermediate quantity violates a numeric contract
// (non-Hermitian Hamiltonian, negative eigenvalue, lost normalization).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Basis { ProbeJz, Composite };
enum class Axis { X, Y, Z };

// Collective-spin dimensions for an ensemble of N spin-1/2 particles.
// j = N/2 (half-integer allowed, 2j always integer), probe dimension d = N+1.
// The Jz eigenbasis is ordered m = +j, j-1, ..., -j; row k carries m = j - k.
struct SpinDimension {
  explicit SpinDimension(int spin_count);
  int N;
  int two_j() const { return N; }
  double j() const { return 0.5 * N; }
  int d() const { return N + 1; }
  double m_at(int k) const { return j() - k; }
};

struct Operator {
  Matrix mat;
  bool hermitian = false;
  Basis basis = Basis::ProbeJz;
};

struct PureVector {
  Vector amps;
  Basis basis = Basis::ProbeJz;
  double norm2 = 1.0;
};

struct DensityMatrix {
  Matrix rho;
  Basis basis = Basis::ProbeJz;
};

// Collective spin operator J_alpha in the Jz eigenbasis, (N+1)x(N+1).
Operator collective_operator(SpinDimension dim, Axis axis);

// Full Jx eigenbasis as a matrix whose column k is the eigenvector with
// eigenvalue m = j - k. Phase convention: the amplitude on |j,j> is real
// positive, except that the m = -j column carries an extra (-1) for odd N so
// that <j,m|j,-j>_x = (-i)^{2(j+m)} <j,m|j,j>_x holds for both parities.
const Matrix& x_eigenbasis(SpinDimension dim);

// Eigenvector of Jx with eigenvalue m = two_m/2.
PureVector x_basis_eigenvector(SpinDimension dim, int two_m);

// cos[(wp+g)t1] Jx - sin[(wp+g)t1] Jy, the rotated-frame generator whose
// extremal eigenstates are the protocol's optimal probe states.
Operator opt_operator(SpinDimension dim, double omega_p, double g, double t1);

// e^{i(wp+g)t1 Jz} |j,m>_x, eigenvector of opt_operator with eigenvalue m.
PureVector opt_eigenvector(SpinDimension dim, int two_m, double omega_p,
                           double g, double t1);

// Diagonal of e^{i(wp+g)t1 Jz} over m = +j..-j.
Vector opt_frame_phases(SpinDimension dim, double omega_p, double g, double t1);

// Unitary e^{-iHt} by spectral decomposition; diagonal H short-circuits to a
// direct phase exponential. Throws numeric_error if H is not Hermitian.
Operator hermitian_propagator(const Operator& h, double t);

// e^{-i theta Jx} via the cached Jx eigenbasis.
Operator rotate_x(SpinDimension dim, double theta);

// Probe (x) ancilla Kronecker product, ancilla index fastest.
Operator tensor(const Operator& probe, const Operator& ancilla);

// Trace out the 2-dimensional ancilla factor of a composite density matrix.
DensityMatrix partial_trace_ancilla(const DensityMatrix& rho);

}  // namespace spinmet
