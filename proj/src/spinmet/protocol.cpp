// SPDX-License-Identifier: Apache-2.0
#include "spinmet/protocol.hpp"

#include <cmath>

namespace spinmet::protocol {

namespace {
const Complex kI{0.0, 1.0};
constexpr double kInvSqrt2 = 0.70710678118654752440;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

void ProtocolParams::validate() const {
  require(N >= 1, "N must be >= 1");
  require(g > 0.0, "coupling g must be positive");
  for (double v : {omega_p, omega_a, g, t1, t2, theta, t1_frame})
    require(std::isfinite(v), "protocol parameters must be finite");
}

ProbePrep ProbePrep::polarized(int sign) {
  require(sign == 1 || sign == -1, "polarized sign must be +1 or -1");
  ProbePrep p;
  p.kind = Kind::PolarizedOpt;
  p.sign = sign;
  return p;
}

ProbePrep ProbePrep::superposed(double a, double b, double phi) {
  require(std::abs(a * a + b * b - 1.0) <= 1e-9,
          "superposition weights must satisfy a^2 + b^2 = 1");
  ProbePrep p;
  p.kind = Kind::SuperposedOpt;
  p.a = a;
  p.b = b;
  p.phi = phi;
  return p;
}

ProbePrep ProbePrep::ghz(double phi0) {
  ProbePrep p;
  p.kind = Kind::GhzX;
  p.phi0 = phi0;
  return p;
}

ProbePrep ProbePrep::mixture(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    require(w >= 0.0, "mixture weights must be nonnegative");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "mixture weights must sum to 1");
  ProbePrep p;
  p.kind = Kind::DickeMixture;
  p.weights = std::move(weights);
  return p;
}

ProbePrep ProbePrep::thermal(double beta) {
  require(std::isfinite(beta), "thermal beta must be finite");
  ProbePrep p;
  p.kind = Kind::Thermal;
  p.beta = beta;
  return p;
}

Eigen::Vector2cd AncillaPrep::vec() const {
  switch (kind) {
    case Kind::Plus:
      return {kInvSqrt2, kInvSqrt2};
    case Kind::Minus:
      return {kInvSqrt2, -kInvSqrt2};
    case Kind::Excited:
      return {1.0, 0.0};
    case Kind::Ground:
      return {0.0, 1.0};
    case Kind::Bloch:
      return {std::cos(bloch_theta / 2),
              std::exp(kI * bloch_phi) * std::sin(bloch_theta / 2)};
  }
  throw std::logic_error("unknown ancilla kind");
}

Schedule Schedule::measurement_delay(double dt) {
  require(dt >= 0.0, "schedule delay must be >= 0");
  return {Variant::MeasurementDelay, dt};
}

Schedule Schedule::encoding_delay(double dt) {
  require(dt >= 0.0, "schedule delay must be >= 0");
  return {Variant::EncodingDelay, dt};
}

Matrix ProbeState::density() const {
  return vectors * weights.asDiagonal() * vectors.adjoint();
}

Operator full_hamiltonian(const ProtocolParams& params) {
  params.validate();
  const SpinDimension dim = params.dim();
  const int d = dim.d();
  Matrix h = Matrix::Zero(2 * d, 2 * d);
  for (int p = 0; p < d; ++p) {
    const double m = dim.m_at(p);
    for (int a = 0; a < 2; ++a) {
      const double s = (a == 0) ? 1.0 : -1.0;  // sigma_z|e> = +|e>
      h(2 * p + a, 2 * p + a) =
          params.omega_p * m + params.omega_a * s + params.g * m * s;
    }
  }
  return Operator{std::move(h), true, Basis::Composite};
}

double optimal_t1(double g, int n1) {
  require(g > 0.0, "coupling g must be positive");
  require(n1 >= 0, "t1 index n1 must be >= 0");
  return (n1 + 0.5) * M_PI / g;
}

double optimal_omega_a(int N, double t1opt, int n2) {
  require(t1opt > 0.0, "t1opt must be positive");
  return (N + 1 + 2 * n2) * M_PI / (4.0 * t1opt);
}

int caption_n2(int N) { return (N % 2 == 1) ? (9 - N) / 2 : (10 - N) / 2; }

ProbeState prepare_probe(const ProbePrep& prep, const ProtocolParams& params) {
  params.validate();
  const SpinDimension dim = params.dim();
  const int d = dim.d();
  const Vector frame =
      opt_frame_phases(dim, params.omega_p, params.g, params.t1_frame);
  const Matrix& xb = x_eigenbasis(dim);

  ProbeState out;
  switch (prep.kind) {
    case ProbePrep::Kind::PolarizedOpt: {
      Vector v = xb.col(prep.sign > 0 ? 0 : d - 1);
      v.array() *= frame.array();
      out.weights = RealVector::Ones(1);
      out.vectors = v;
      break;
    }
    case ProbePrep::Kind::SuperposedOpt: {
      Vector v = prep.a * xb.col(0) +
                 prep.b * std::exp(-kI * prep.phi) * xb.col(d - 1);
      v.array() *= frame.array();
      out.weights = RealVector::Ones(1);
      out.vectors = v;
      break;
    }
    case ProbePrep::Kind::GhzX: {
      Vector v = kInvSqrt2 * (xb.col(0) + std::exp(-kI * prep.phi0) * xb.col(d - 1));
      out.weights = RealVector::Ones(1);
      out.vectors = v;
      break;
    }
    case ProbePrep::Kind::DickeMixture: {
      require(static_cast<int>(prep.weights.size()) == d,
              "mixture needs one weight per Dicke level");
      out.weights = Eigen::Map<const RealVector>(prep.weights.data(), d);
      out.vectors = Matrix::Identity(d, d);
      break;
    }
    case ProbePrep::Kind::Thermal: {
      // p_m = e^{-m beta}/Z, evaluated max-exponent shifted
      RealVector x(d);
      for (int k = 0; k < d; ++k) x(k) = -dim.m_at(k) * prep.beta;
      const double xmax = x.maxCoeff();
      RealVector w = (x.array() - xmax).exp();
      out.weights = w / w.sum();
      out.vectors = xb;
      for (int k = 0; k < d; ++k) out.vectors.col(k).array() *= frame.array();
      break;
    }
  }
  return out;
}

namespace {

// composite index 2p + a, a = 0:|e>, 1:|g>
RealVector composite_energies(const ProtocolParams& params) {
  const SpinDimension dim = params.dim();
  RealVector e(2 * dim.d());
  for (int p = 0; p < dim.d(); ++p) {
    const double m = dim.m_at(p);
    e(2 * p) = params.omega_p * m + params.omega_a + params.g * m;
    e(2 * p + 1) = params.omega_p * m - params.omega_a - params.g * m;
  }
  return e;
}

void apply_phase(Vector& psi, const RealVector& energies, double t) {
  if (t == 0.0) return;
  for (int i = 0; i < psi.size(); ++i)
    psi(i) *= std::exp(-kI * energies(i) * t);
}

// (A x I_2) psi with ancilla index fastest
void apply_probe_op(Vector& psi, const Matrix& a) {
  const int d = static_cast<int>(a.rows());
  using StrideT = Eigen::Map<Eigen::Matrix<Complex, Eigen::Dynamic, 2, Eigen::RowMajor>>;
  StrideT view(psi.data(), d, 2);
  view = (a * view).eval();
}

void apply_measure(Vector& psi, int sign) {
  const int d = static_cast<int>(psi.size()) / 2;
  for (int p = 0; p < d; ++p) {
    const Complex c = 0.5 * (psi(2 * p) + double(sign) * psi(2 * p + 1));
    psi(2 * p) = c;
    psi(2 * p + 1) = double(sign) * c;
  }
}

// single probe column, with the theta rotation precomputed
PureBranches run_pure_column(const ProtocolParams& params, const Vector& probe,
                             const Eigen::Vector2cd& anc, const Schedule& schedule,
                             const RealVector& energies, const Matrix& rx) {
  const int d = static_cast<int>(probe.size());
  Vector psi0(2 * d);
  for (int p = 0; p < d; ++p) {
    psi0(2 * p) = probe(p) * anc(0);
    psi0(2 * p + 1) = probe(p) * anc(1);
  }

  PureBranches out;
  for (int sign : {+1, -1}) {
    Vector psi = psi0;
    apply_phase(psi, energies, params.t1);
    switch (schedule.variant) {
      case Schedule::Variant::Synchronous:
        apply_measure(psi, sign);
        apply_probe_op(psi, rx);
        break;
      case Schedule::Variant::MeasurementDelay:
        apply_probe_op(psi, rx);
        apply_phase(psi, energies, schedule.dt);
        apply_measure(psi, sign);
        break;
      case Schedule::Variant::EncodingDelay:
        apply_measure(psi, sign);
        apply_phase(psi, energies, schedule.dt);
        apply_probe_op(psi, rx);
        break;
    }
    apply_phase(psi, energies, params.t2);
    (sign > 0 ? out.plus : out.minus) = std::move(psi);
  }
  return out;
}

Matrix encoding_op(const ProtocolParams& params, bool derivative) {
  Matrix rx = rotate_x(params.dim(), params.theta).mat;
  if (derivative) {
    const Matrix jx = collective_operator(params.dim(), Axis::X).mat;
    rx = (rx * (-kI * jx)).eval();
  }
  return rx;
}

PureBranches run_pure_impl(const ProtocolParams& params, const Vector& probe,
                           const AncillaPrep& ancilla, const Schedule& schedule,
                           bool derivative) {
  params.validate();
  require(static_cast<int>(probe.size()) == params.dim().d(),
          "probe vector has wrong dimension");
  return run_pure_column(params, probe, ancilla.vec(), schedule,
                         composite_energies(params),
                         encoding_op(params, derivative));
}

BranchOutcome make_pure_outcome(int sign, Vector unnormalized) {
  BranchOutcome b;
  b.sign = sign;
  b.probability = unnormalized.squaredNorm();
  if (b.probability > 1e-300)
    b.pure = PureVector{unnormalized / std::sqrt(b.probability),
                        Basis::Composite, 1.0};
  else
    b.probability = 0.0;  // null-state marker
  return b;
}

BranchOutcome make_mixed_outcome(int sign, Matrix unnormalized) {
  BranchOutcome b;
  b.sign = sign;
  b.probability = unnormalized.trace().real();
  if (b.probability > 1e-300)
    b.mixed = DensityMatrix{unnormalized / b.probability, Basis::Composite};
  else
    b.probability = 0.0;
  return b;
}

}  // namespace

PureBranches run_pure(const ProtocolParams& params, const Vector& probe,
                      const AncillaPrep& ancilla, const Schedule& schedule) {
  return run_pure_impl(params, probe, ancilla, schedule, false);
}

PureBranches run_pure_derivative(const ProtocolParams& params, const Vector& probe,
                                 const AncillaPrep& ancilla,
                                 const Schedule& schedule) {
  return run_pure_impl(params, probe, ancilla, schedule, true);
}

std::pair<BranchOutcome, BranchOutcome> measure_sigma_x(const PureVector& state) {
  require(state.basis == Basis::Composite, "measurement expects a composite state");
  Vector plus = state.amps, minus = state.amps;
  apply_measure(plus, +1);
  apply_measure(minus, -1);
  return {make_pure_outcome(+1, std::move(plus)),
          make_pure_outcome(-1, std::move(minus))};
}

std::pair<BranchOutcome, BranchOutcome> measure_sigma_x(const DensityMatrix& state) {
  require(state.basis == Basis::Composite, "measurement expects a composite state");
  const int d2 = static_cast<int>(state.rho.rows());
  const int d = d2 / 2;
  std::pair<BranchOutcome, BranchOutcome> out;
  for (int sign : {+1, -1}) {
    // M rho M with M = I x |±><±|
    Matrix proj = state.rho;
    for (int q = 0; q < d2; ++q) {
      Vector col = proj.col(q);
      apply_measure(col, sign);
      proj.col(q) = col;
    }
    for (int r = 0; r < d2; ++r) {
      Vector row = proj.row(r).conjugate();
      apply_measure(row, sign);
      proj.row(r) = row.conjugate();
    }
    (sign > 0 ? out.first : out.second) = make_mixed_outcome(sign, std::move(proj));
  }
  return out;
}

CircuitResult run(const ProtocolParams& params, const ProbePrep& prep,
                  const AncillaPrep& ancilla, const Schedule& schedule) {
  const ProbeState probe = prepare_probe(prep, params);
  CircuitResult result;
  result.params = params;
  result.schedule = schedule;
  if (probe.pure()) {
    PureBranches br = run_pure(params, probe.pure_vector(), ancilla, schedule);
    result.plus = make_pure_outcome(+1, std::move(br.plus));
    result.minus = make_pure_outcome(-1, std::move(br.minus));
  } else {
    const int d2 = 2 * params.dim().d();
    Matrix rho_plus = Matrix::Zero(d2, d2), rho_minus = Matrix::Zero(d2, d2);
    BranchMatrices br = run_pure_batch(params, probe.vectors, ancilla, schedule);
    for (int k = 0; k < probe.weights.size(); ++k) {
      if (probe.weights(k) == 0.0) continue;
      rho_plus.noalias() += probe.weights(k) * br.plus.col(k) * br.plus.col(k).adjoint();
      rho_minus.noalias() +=
          probe.weights(k) * br.minus.col(k) * br.minus.col(k).adjoint();
    }
    result.plus = make_mixed_outcome(+1, std::move(rho_plus));
    result.minus = make_mixed_outcome(-1, std::move(rho_minus));
  }
  return result;
}

BranchMatrices run_pure_batch(const ProtocolParams& params, const Matrix& probes,
                              const AncillaPrep& ancilla, const Schedule& schedule,
                              bool derivative) {
  params.validate();
  const int d = params.dim().d();
  require(static_cast<int>(probes.rows()) == d, "probe columns have wrong dimension");
  const int r = static_cast<int>(probes.cols());
  const RealVector energies = composite_energies(params);
  const Matrix rx = encoding_op(params, derivative);
  const Eigen::Vector2cd anc = ancilla.vec();

  BranchMatrices out;
  out.plus.resize(2 * d, r);
  out.minus.resize(2 * d, r);
  for (int k = 0; k < r; ++k) {
    PureBranches br =
        run_pure_column(params, probes.col(k), anc, schedule, energies, rx);
    out.plus.col(k) = br.plus;
    out.minus.col(k) = br.minus;
  }
  return out;
}

std::pair<Vector, Vector> branch_kraus(const ProtocolParams& params,
                                       const AncillaPrep& ancilla) {
  params.validate();
  const SpinDimension dim = params.dim();
  const int d = dim.d();
  const Eigen::Vector2cd anc = ancilla.vec();
  Vector plus(d), minus(d);
  for (int p = 0; p < d; ++p) {
    const double m = dim.m_at(p);
    const Complex ue =
        std::exp(-kI * (params.omega_p * m + params.omega_a + params.g * m) * params.t1);
    const Complex ug =
        std::exp(-kI * (params.omega_p * m - params.omega_a - params.g * m) * params.t1);
    plus(p) = kInvSqrt2 * (anc(0) * ue + anc(1) * ug);
    minus(p) = kInvSqrt2 * (anc(0) * ue - anc(1) * ug);
  }
  return {std::move(plus), std::move(minus)};
}

RealVector branch_distribution(const BranchOutcome& branch) {
  if (branch.null_state()) return RealVector();
  if (branch.pure) {
    const Vector& v = branch.pure->amps;
    const int d = static_cast<int>(v.size()) / 2;
    RealVector p(d);
    for (int k = 0; k < d; ++k)
      p(k) = branch.probability *
             (std::norm(v(2 * k)) + std::norm(v(2 * k + 1)));
    return p;
  }
  const DensityMatrix reduced = partial_trace_ancilla(*branch.mixed);
  return branch.probability * reduced.rho.diagonal().real();
}

}  // namespace spinmet::protocol
