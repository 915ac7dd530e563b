// Copyright 2026 The iongate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Operator and state algebra on qubit ⊗ qubit ⊗ truncated oscillator.
//
// Conventions used everywhere in iongate:
//   * factor order is ion1 ⊗ ion2 ⊗ oscillator, so the flat index of
//     |s1, s2, n> is (2*s1 + s2) * fock_dim + n;
//   * |↓> = (F=4, mF=+4) is qubit index 0 and the +1 eigenstate of σz,
//     |↑> = (F=3, mF=+3) is index 1;
//   * two-qubit basis order is |↓↓>, |↓↑>, |↑↓>, |↑↑>.

#ifndef IONGATE_HILBERT_HPP
#define IONGATE_HILBERT_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "iongate/errors.hpp"

namespace iongate {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using QubitMatrix = Eigen::Matrix4cd;
using QubitVector = Eigen::Vector4cd;
using Matrix2 = Eigen::Matrix2cd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

namespace qubit_index {
inline constexpr int kDownDown = 0;
inline constexpr int kDownUp = 1;
inline constexpr int kUpDown = 2;
inline constexpr int kUpUp = 3;
}  // namespace qubit_index

class SpaceSpec {
 public:
  static constexpr int kDefaultFockDim = 15;

  explicit SpaceSpec(int fock_dim = kDefaultFockDim) : fock_dim_(fock_dim) {
    if (fock_dim < 2) {
      throw ConfigError("fock_dim must be >= 2, got " + std::to_string(fock_dim));
    }
  }

  int fock_dim() const { return fock_dim_; }
  int dim() const { return 4 * fock_dim_; }

  friend bool operator==(const SpaceSpec&, const SpaceSpec&) = default;

 private:
  int fock_dim_;
};

/// Dense Kronecker product.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// A dense operator on the composite space.
class Operator {
 public:
  Operator(SpaceSpec space, Matrix m) : space_(space), m_(std::move(m)) {
    if (m_.rows() != space_.dim() || m_.cols() != space_.dim()) {
      throw ConfigError("operator shape " + std::to_string(m_.rows()) + "x" +
                        std::to_string(m_.cols()) + " does not match space dimension " +
                        std::to_string(space_.dim()));
    }
  }

  static Operator identity(SpaceSpec space) {
    return Operator(space, Matrix::Identity(space.dim(), space.dim()));
  }
  static Operator zero(SpaceSpec space) {
    return Operator(space, Matrix::Zero(space.dim(), space.dim()));
  }

  const Matrix& matrix() const { return m_; }
  SpaceSpec space() const { return space_; }
  int dim() const { return space_.dim(); }

  bool is_hermitian(double tol = 1e-12) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
  }

  Operator adjoint() const { return Operator(space_, m_.adjoint()); }

  Operator operator*(const Operator& rhs) const {
    check_same(rhs);
    return Operator(space_, m_ * rhs.m_);
  }
  Operator operator+(const Operator& rhs) const {
    check_same(rhs);
    return Operator(space_, m_ + rhs.m_);
  }
  Operator operator-(const Operator& rhs) const {
    check_same(rhs);
    return Operator(space_, m_ - rhs.m_);
  }
  Operator operator*(cplx s) const { return Operator(space_, s * m_); }
  friend Operator operator*(cplx s, const Operator& op) { return op * s; }

 private:
  void check_same(const Operator& rhs) const {
    if (!(space_ == rhs.space_)) {
      throw ConfigError("operators live on different spaces");
    }
  }

  SpaceSpec space_;
  Matrix m_;
};

/// Largest |element| of the commutator [A, B].
inline double commutator_norm(const Operator& a, const Operator& b) {
  return (a.matrix() * b.matrix() - b.matrix() * a.matrix()).cwiseAbs().maxCoeff();
}

// Tolerances of the density-matrix invariants.
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPositivityTol = 1e-8;

/// Density matrix on the composite space. Construction validates trace,
/// Hermiticity and the eigenvalue floor.
class CompositeState {
 public:
  CompositeState(SpaceSpec space, Matrix rho) : space_(space), rho_(std::move(rho)) {
    if (rho_.rows() != space_.dim() || rho_.cols() != space_.dim()) {
      throw ConfigError("state shape does not match space dimension");
    }
    validate();
  }

  const Matrix& matrix() const { return rho_; }
  SpaceSpec space() const { return space_; }

  double trace_deviation() const { return std::abs(rho_.trace() - cplx(1.0, 0.0)); }
  double hermiticity_deviation() const {
    return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  }
  double purity() const { return (rho_ * rho_).trace().real(); }

 private:
  void validate() const {
    if (!rho_.allFinite()) throw StateError("density matrix has non-finite entries");
    if (trace_deviation() > kTraceTol) {
      throw StateError("trace deviates from 1 by " + std::to_string(trace_deviation()));
    }
    if (hermiticity_deviation() > kHermitianTol) {
      throw StateError("density matrix is not Hermitian (deviation " +
                       std::to_string(hermiticity_deviation()) + ")");
    }
    if (double lo = min_eigenvalue(); lo < -kPositivityTol) {
      throw StateError("density matrix has eigenvalue " + std::to_string(lo));
    }
  }

  SpaceSpec space_;
  Matrix rho_;
};

enum class Pauli { I, X, Y, Z };

inline Matrix2 pauli_matrix(Pauli p) {
  Matrix2 m;
  switch (p) {
    case Pauli::I:
      m << 1, 0, 0, 1;
      break;
    case Pauli::X:
      m << 0, 1, 1, 0;
      break;
    case Pauli::Y:
      m << 0, -kI, kI, 0;
      break;
    case Pauli::Z:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

/// σ+ raises the σz eigenvalue: |↑> -> |↓>.
inline Matrix2 sigma_plus() {
  Matrix2 m;
  m << 0, 1, 0, 0;
  return m;
}

/// σ- lowers the σz eigenvalue: |↓> -> |↑>.
inline Matrix2 sigma_minus() {
  Matrix2 m;
  m << 0, 0, 1, 0;
  return m;
}

inline Pauli parse_pauli(std::string_view label) {
  if (label == "I") return Pauli::I;
  if (label == "X") return Pauli::X;
  if (label == "Y") return Pauli::Y;
  if (label == "Z") return Pauli::Z;
  throw ConfigError("unknown Pauli label '" + std::string(label) + "'");
}

/// Single-ion 2x2 matrix lifted to the 4x4 two-qubit space.
inline QubitMatrix embed_on_ion(const Matrix2& m, int ion_index) {
  const Matrix2 id = Matrix2::Identity();
  if (ion_index == 1) return kron(m, id);
  if (ion_index == 2) return kron(id, m);
  throw ConfigError("ion index must be 1 or 2, got " + std::to_string(ion_index));
}

/// Two-qubit operator ⊗ identity on the oscillator.
inline Operator embed_qubits(const QubitMatrix& q, SpaceSpec space) {
  return Operator(space, kron(q, Matrix::Identity(space.fock_dim(), space.fock_dim())));
}

/// Oscillator operator with identity on both qubits.
inline Operator embed_oscillator(const Matrix& osc, SpaceSpec space) {
  if (osc.rows() != space.fock_dim() || osc.cols() != space.fock_dim()) {
    throw ConfigError("oscillator operator shape does not match fock_dim");
  }
  return Operator(space, kron(QubitMatrix::Identity(), osc));
}

inline Operator embed_qubit_matrix(const Matrix2& m, int ion_index, SpaceSpec space) {
  return embed_qubits(embed_on_ion(m, ion_index), space);
}

inline Operator embed_qubit_op(Pauli label, int ion_index, SpaceSpec space) {
  return embed_qubit_matrix(pauli_matrix(label), ion_index, space);
}

struct LadderOps {
  Operator a;
  Operator a_dag;
  Operator n;
};

/// Truncated annihilation matrix on the oscillator factor alone.
inline Matrix annihilation_matrix(int fock_dim) {
  Matrix a = Matrix::Zero(fock_dim, fock_dim);
  for (int k = 1; k < fock_dim; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

inline LadderOps ladder_ops(SpaceSpec space) {
  const Matrix a = annihilation_matrix(space.fock_dim());
  const Matrix ad = a.adjoint();
  return {embed_oscillator(a, space), embed_oscillator(ad, space),
          embed_oscillator(ad * a, space)};
}

/// Thermal occupation p_n = nbar^n / (nbar+1)^(n+1), renormalised on the
/// truncated space. Throws TruncationError if the discarded tail exceeds 1e-6.
inline std::vector<double> thermal_populations(double nbar, int fock_dim) {
  constexpr double kMaxTail = 1e-6;
  if (!(nbar >= 0.0)) throw ConfigError("nbar must be >= 0");
  std::vector<double> p(fock_dim, 0.0);
  if (nbar == 0.0) {
    p[0] = 1.0;
    return p;
  }
  const double ratio = nbar / (nbar + 1.0);
  const double tail = std::pow(ratio, fock_dim);
  if (tail >= kMaxTail) {
    const int required = static_cast<int>(std::ceil(std::log(kMaxTail) / std::log(ratio))) + 1;
    throw TruncationError("fock_dim " + std::to_string(fock_dim) + " too small for nbar " +
                              std::to_string(nbar) + " (tail weight " + std::to_string(tail) +
                              "); need fock_dim >= " + std::to_string(required),
                          required);
  }
  double sum = 0.0;
  for (int n = 0; n < fock_dim; ++n) {
    p[n] = std::pow(ratio, n) / (nbar + 1.0);
    sum += p[n];
  }
  for (double& x : p) x /= sum;
  return p;
}

/// Two-qubit computational basis state from a label: "dd", "du", "ud", "uu".
inline QubitVector qubit_basis_state(std::string_view label) {
  static constexpr std::string_view kLabels[] = {"dd", "du", "ud", "uu"};
  for (int k = 0; k < 4; ++k) {
    if (label == kLabels[k]) {
      QubitVector v = QubitVector::Zero();
      v(k) = 1.0;
      return v;
    }
  }
  throw ConfigError("unknown two-qubit label '" + std::string(label) + "'");
}

/// |ψ> = (|↓↓> + e^{iφ}|↑↑>)/√2.
inline QubitVector bell_state(double phase = 0.0) {
  QubitVector v = QubitVector::Zero();
  v(qubit_index::kDownDown) = 1.0 / std::sqrt(2.0);
  v(qubit_index::kUpUp) = std::exp(kI * phase) / std::sqrt(2.0);
  return v;
}

/// ρ = ρ_qubits ⊗ thermal(nbar).
inline CompositeState product_state(const QubitMatrix& qubits, double nbar, SpaceSpec space) {
  const auto p = thermal_populations(nbar, space.fock_dim());
  Matrix osc = Matrix::Zero(space.fock_dim(), space.fock_dim());
  for (int n = 0; n < space.fock_dim(); ++n) osc(n, n) = p[n];
  return CompositeState(space, kron(qubits, osc));
}

inline CompositeState initial_state(const QubitVector& qubits, double nbar, SpaceSpec space) {
  const double norm = qubits.norm();
  if (std::abs(norm - 1.0) > 1e-12) throw ConfigError("qubit state is not normalised");
  return product_state(qubits * qubits.adjoint(), nbar, space);
}

inline CompositeState initial_state(std::string_view label, double nbar, SpaceSpec space) {
  return initial_state(qubit_basis_state(label), nbar, space);
}

/// Tr_osc of an arbitrary (not necessarily Hermitian) composite matrix.
inline QubitMatrix partial_trace_osc(const Matrix& m, int fock_dim) {
  QubitMatrix out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      out(i, j) = m.block(i * fock_dim, j * fock_dim, fock_dim, fock_dim).trace();
    }
  }
  return out;
}

inline QubitMatrix partial_trace_osc(const CompositeState& rho) {
  return partial_trace_osc(rho.matrix(), rho.space().fock_dim());
}

/// <ψ|ρ|ψ> for |ψ> = (|↓↓> + e^{iφ}|↑↑>)/√2.
inline double fidelity_with_bell(const QubitMatrix& r, double bell_phase = 0.0) {
  using namespace qubit_index;
  const double pop = 0.5 * (r(kDownDown, kDownDown).real() + r(kUpUp, kUpUp).real());
  return pop + (std::exp(kI * bell_phase) * r(kDownDown, kUpUp)).real();
}

inline double fidelity_with_bell(const CompositeState& rho, double bell_phase = 0.0) {
  return fidelity_with_bell(partial_trace_osc(rho), bell_phase);
}

/// Bell phase maximising fidelity_with_bell.
inline double optimal_bell_phase(const QubitMatrix& r) {
  return -std::arg(r(qubit_index::kDownDown, qubit_index::kUpUp));
}

inline double fidelity_bell_optimal(const QubitMatrix& r) {
  using namespace qubit_index;
  return 0.5 * (r(kDownDown, kDownDown).real() + r(kUpUp, kUpUp).real()) +
         std::abs(r(kDownDown, kUpUp));
}

inline double fidelity_bell_optimal(const CompositeState& rho) {
  return fidelity_bell_optimal(partial_trace_osc(rho));
}

/// ½‖A − B‖₁ for Hermitian A, B.
inline double trace_distance(const Matrix& a, const Matrix& b) {
  const Matrix d = 0.5 * ((a - b) + (a - b).adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Truncated coherent state |α> (normalised after truncation).
inline Vector coherent_state(cplx alpha, int fock_dim) {
  Vector v(fock_dim);
  cplx amp = std::exp(-0.5 * std::norm(alpha));
  for (int n = 0; n < fock_dim; ++n) {
    v(n) = amp;
    amp *= alpha / std::sqrt(static_cast<double>(n + 1));
  }
  return v / v.norm();
}

}  // namespace iongate

#endif  // IONGATE_HILBERT_HPP
