// SPDX-License-Identifier: Apache-2.0
#include "spinmet/spin_algebra.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace spinmet {

namespace {
constexpr double kHermTol = 1e-12;
const Complex kI{0.0, 1.0};

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

SpinDimension::SpinDimension(int spin_count) : N(spin_count) {
  require(spin_count >= 1, "spin count N must be >= 1");
}

Operator collective_operator(SpinDimension dim, Axis axis) {
  const int d = dim.d();
  const double j = dim.j();
  Matrix m = Matrix::Zero(d, d);
  switch (axis) {
    case Axis::Z:
      for (int k = 0; k < d; ++k) m(k, k) = dim.m_at(k);
      break;
    case Axis::X:
    case Axis::Y:
      // ladder coefficients: J+|j,m> = sqrt(j(j+1)-m(m+1)) |j,m+1>
      for (int k = 1; k < d; ++k) {
        const double mm = dim.m_at(k);
        const double c = 0.5 * std::sqrt(j * (j + 1) - mm * (mm + 1));
        if (axis == Axis::X) {
          m(k - 1, k) = c;
          m(k, k - 1) = c;
        } else {
          m(k - 1, k) = -kI * c;
          m(k, k - 1) = kI * c;
        }
      }
      break;
  }
  return Operator{std::move(m), true, Basis::ProbeJz};
}

const Matrix& x_eigenbasis(SpinDimension dim) {
  static std::map<int, Matrix> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(dim.N);
  if (it != cache.end()) return it->second;

  const int d = dim.d();
  Eigen::SelfAdjointEigenSolver<Matrix> es(collective_operator(dim, Axis::X).mat);
  if (es.info() != Eigen::Success) throw numeric_error("Jx eigensolve failed");
  // ascending eigenvalues -> reorder columns to m = +j..-j
  Matrix v(d, d);
  for (int k = 0; k < d; ++k) v.col(k) = es.eigenvectors().col(d - 1 - k);
  // first nonzero amplitude in the Jz basis real positive
  for (int k = 0; k < d; ++k) {
    int idx = 0;
    while (idx < d - 1 && std::abs(v(idx, k)) < 1e-12) ++idx;
    v.col(k) *= std::conj(v(idx, k)) / std::abs(v(idx, k));
  }
  // odd N: flip |j,-j>_x so the (-i)^{2(j+m)} parity identity holds
  if (dim.N % 2 == 1) v.col(d - 1) *= -1.0;
  return cache.emplace(dim.N, std::move(v)).first->second;
}

namespace {
int m_to_column(SpinDimension dim, int two_m) {
  if (std::abs(two_m) > dim.two_j() || (dim.two_j() - two_m) % 2 != 0)
    throw std::domain_error("eigenvalue m out of range for spin j");
  return (dim.two_j() - two_m) / 2;
}
}  // namespace

PureVector x_basis_eigenvector(SpinDimension dim, int two_m) {
  const Matrix& v = x_eigenbasis(dim);
  return PureVector{v.col(m_to_column(dim, two_m)), Basis::ProbeJz, 1.0};
}

Operator opt_operator(SpinDimension dim, double omega_p, double g, double t1) {
  const double angle = (omega_p + g) * t1;
  Matrix m = std::cos(angle) * collective_operator(dim, Axis::X).mat -
             std::sin(angle) * collective_operator(dim, Axis::Y).mat;
  return Operator{std::move(m), true, Basis::ProbeJz};
}

Vector opt_frame_phases(SpinDimension dim, double omega_p, double g, double t1) {
  const double angle = (omega_p + g) * t1;
  Vector ph(dim.d());
  for (int k = 0; k < dim.d(); ++k)
    ph(k) = std::exp(kI * angle * dim.m_at(k));
  return ph;
}

PureVector opt_eigenvector(SpinDimension dim, int two_m, double omega_p,
                           double g, double t1) {
  Vector v = x_eigenbasis(dim).col(m_to_column(dim, two_m));
  v.array() *= opt_frame_phases(dim, omega_p, g, t1).array();
  return PureVector{std::move(v), Basis::ProbeJz, 1.0};
}

Operator hermitian_propagator(const Operator& h, double t) {
  const auto& m = h.mat;
  if (m.rows() != m.cols()) throw std::invalid_argument("H must be square");
  if (!h.hermitian || (m - m.adjoint()).cwiseAbs().maxCoeff() > kHermTol)
    throw numeric_error("hermitian_propagator: H is not Hermitian");

  const int d = static_cast<int>(m.rows());
  bool diagonal = true;
  for (int c = 0; c < d && diagonal; ++c)
    for (int r = 0; r < d; ++r)
      if (r != c && m(r, c) != Complex{0.0, 0.0}) {
        diagonal = false;
        break;
      }

  Matrix u;
  if (diagonal) {
    u = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) u(k, k) = std::exp(-kI * t * m(k, k).real());
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) throw numeric_error("eigensolve failed");
    Vector phases(d);
    for (int k = 0; k < d; ++k) phases(k) = std::exp(-kI * t * es.eigenvalues()(k));
    u = es.eigenvectors() * phases.asDiagonal() *
        es.eigenvectors().adjoint();
  }
  return Operator{std::move(u), false, h.basis};
}

Operator rotate_x(SpinDimension dim, double theta) {
  const Matrix& v = x_eigenbasis(dim);
  Vector phases(dim.d());
  for (int k = 0; k < dim.d(); ++k)
    phases(k) = std::exp(-kI * theta * dim.m_at(k));
  Matrix u = v * phases.asDiagonal() * v.adjoint();
  return Operator{std::move(u), false, Basis::ProbeJz};
}

Operator tensor(const Operator& probe, const Operator& ancilla) {
  if (ancilla.mat.rows() != 2 || ancilla.mat.cols() != 2)
    throw std::invalid_argument("ancilla operator must be 2x2");
  const int d = static_cast<int>(probe.mat.rows());
  if (probe.mat.cols() != d) throw std::invalid_argument("probe operator must be square");
  Matrix out(2 * d, 2 * d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      out.block<2, 2>(2 * p, 2 * q) = probe.mat(p, q) * ancilla.mat;
  return Operator{std::move(out), probe.hermitian && ancilla.hermitian,
                  Basis::Composite};
}

DensityMatrix partial_trace_ancilla(const DensityMatrix& rho) {
  if (rho.basis != Basis::Composite)
    throw std::invalid_argument("partial_trace_ancilla expects a composite state");
  const int d2 = static_cast<int>(rho.rho.rows());
  if (d2 % 2 != 0) throw std::invalid_argument("composite dimension must be even");
  const int d = d2 / 2;
  Matrix out(d, d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      out(p, q) = rho.rho(2 * p, 2 * q) + rho.rho(2 * p + 1, 2 * q + 1);
  return DensityMatrix{std::move(out), Basis::ProbeJz};
}

}  // namespace spinmet
