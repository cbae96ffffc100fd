#pragma once

// Dense complex linear algebra on small Hilbert spaces.
//
// Basis convention: qubit 0 is the most significant bit of a basis index, so
// kron(A0, A1, ...) acts with A0 on qubit 0. sigma_z |0> = +|0>.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "freepulse/errors.hpp"

namespace freepulse {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PauliString {
  std::string label;  // over {I, X, Y, Z}, one char per qubit
  double coefficient = 0.0;
};

namespace pauli {

inline ComplexMatrix I() { return ComplexMatrix::Identity(2, 2); }

inline ComplexMatrix X() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline ComplexMatrix Y() {
  ComplexMatrix m(2, 2);
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}

inline ComplexMatrix Z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

/// |1><0|, raises |0> to |1>.
inline ComplexMatrix raising() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

/// |0><1|, lowers |1> to |0>.
inline ComplexMatrix lowering() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

inline ComplexMatrix from_char(char c) {
  switch (c) {
    case 'I': return I();
    case 'X': return X();
    case 'Y': return Y();
    case 'Z': return Z();
    default: throw PreconditionError(std::string("invalid Pauli character '") + c + "'");
  }
}

}  // namespace pauli

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) {
    throw DimMismatch("kron expects square operands");
  }
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  ComplexMatrix out(n * m, n * m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.block(i * m, j * m, m, m) = a(i, j) * b;
    }
  }
  return out;
}

/// Embeds a single-site operator at position `site` of `n_sites` identical
/// sites of dimension op.rows().
inline ComplexMatrix embed(const ComplexMatrix& op, int site, int n_sites) {
  const Eigen::Index d = op.rows();
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int k = 0; k < n_sites; ++k) {
    out = kron(out, k == site ? op : ComplexMatrix::Identity(d, d));
  }
  return out;
}

inline double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double tol) {
  return m.rows() == m.cols() && m.rows() >= 1 && hermiticity_defect(m) <= tol;
}

inline void require_hermitian(const ComplexMatrix& m, double tol, const char* what) {
  if (!is_hermitian(m, tol)) {
    throw NotHermitian(std::string(what) + ": matrix is not Hermitian within " +
                       std::to_string(tol));
  }
}

/// Propagator exp(-i h t) of a Hermitian generator, via eigendecomposition.
inline ComplexMatrix expm_herm_generator(const ComplexMatrix& h, double t) {
  require_hermitian(h, 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff()), "expm_herm_generator");
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
  const auto& v = es.eigenvectors();
  Eigen::VectorXcd phases(sym.rows());
  for (Eigen::Index k = 0; k < sym.rows(); ++k) {
    phases(k) = std::polar(1.0, -es.eigenvalues()(k) * t);
  }
  return v * phases.asDiagonal() * v.adjoint();
}

/// Applies exp(-i h t) to a state without forming the propagator matrix.
inline StateVector apply_expm(const ComplexMatrix& h, double t, const StateVector& psi) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  StateVector coeff = es.eigenvectors().adjoint() * psi;
  for (Eigen::Index k = 0; k < coeff.size(); ++k) {
    coeff(k) *= std::polar(1.0, -es.eigenvalues()(k) * t);
  }
  return es.eigenvectors() * coeff;
}

/// Rotates the global phase so the largest-magnitude amplitude is real positive.
inline StateVector fix_phase(StateVector v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const double mag = std::abs(v(imax));
  if (mag > 0.0) v *= std::conj(v(imax)) / mag;
  return v;
}

struct Eigenpair {
  double value = 0.0;
  StateVector vector;
  bool degenerate = false;
};

inline Eigenpair ground_eigenpair(const ComplexMatrix& m) {
  require_hermitian(m, 1e-8, "ground_eigenpair");
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(sym);
  Eigenpair out;
  out.value = es.eigenvalues()(0);
  out.vector = fix_phase(es.eigenvectors().col(0));
  if (sym.rows() > 1) {
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    out.degenerate = (es.eigenvalues()(1) - es.eigenvalues()(0)) <= 1e-10 * scale;
  }
  return out;
}

inline int qubits_for_dim(Eigen::Index dim) {
  int q = 0;
  while ((Eigen::Index{1} << q) < dim) ++q;
  return (Eigen::Index{1} << q) == dim ? q : -1;
}

inline ComplexMatrix pauli_matrix(std::string_view label) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (char c : label) out = kron(out, pauli::from_char(c));
  return out;
}

/// Tr(P m) for the Pauli string P, using that P has one nonzero per row.
inline cplx pauli_trace(std::string_view label, const ComplexMatrix& m) {
  const int q = static_cast<int>(label.size());
  const Eigen::Index dim = Eigen::Index{1} << q;
  Eigen::Index flip = 0;
  for (int i = 0; i < q; ++i) {
    if (label[i] == 'X' || label[i] == 'Y') flip |= Eigen::Index{1} << (q - 1 - i);
  }
  cplx acc = 0.0;
  for (Eigen::Index row = 0; row < dim; ++row) {
    // P(row, row ^ flip) = prod_i p_i(row_i, col_i)
    cplx entry = 1.0;
    for (int i = 0; i < q; ++i) {
      const int bit = static_cast<int>((row >> (q - 1 - i)) & 1);
      switch (label[i]) {
        case 'Z': entry *= bit ? -1.0 : 1.0; break;
        case 'Y': entry *= bit ? cplx(0.0, 1.0) : cplx(0.0, -1.0); break;
        default: break;
      }
    }
    acc += entry * m(row ^ flip, row);
  }
  return acc;
}

inline std::vector<std::string> all_pauli_labels(int q) {
  static constexpr char kChars[] = {'I', 'X', 'Y', 'Z'};
  std::vector<std::string> labels{""};
  for (int i = 0; i < q; ++i) {
    std::vector<std::string> next;
    next.reserve(labels.size() * 4);
    for (const auto& l : labels) {
      for (char c : kChars) next.push_back(l + c);
    }
    labels = std::move(next);
  }
  return labels;
}

/// Coefficients c_P = Tr(P m) / 2^q for every Pauli string with |c_P| > 1e-12.
inline std::vector<PauliString> pauli_decompose(const ComplexMatrix& m, int q) {
  if (q < 0 || q > 20 || m.rows() != (Eigen::Index{1} << q) || m.cols() != m.rows()) {
    throw DimMismatch("pauli_decompose: dimension is not 2^" + std::to_string(q));
  }
  require_hermitian(m, 1e-10, "pauli_decompose");
  const double norm = static_cast<double>(Eigen::Index{1} << q);
  std::vector<PauliString> terms;
  for (const auto& label : all_pauli_labels(q)) {
    const double c = pauli_trace(label, m).real() / norm;
    if (std::abs(c) > 1e-12) terms.push_back({label, c});
  }
  return terms;
}

inline ComplexMatrix pauli_reconstruct(const std::vector<PauliString>& terms, int q) {
  const Eigen::Index dim = Eigen::Index{1} << q;
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  for (const auto& t : terms) {
    if (static_cast<int>(t.label.size()) != q) {
      throw DimMismatch("Pauli label '" + t.label + "' does not match qubit count");
    }
    out += t.coefficient * pauli_matrix(t.label);
  }
  return out;
}

inline double norm_defect(const StateVector& v) { return std::abs(v.norm() - 1.0); }

inline StateVector basis_state(Eigen::Index dim, Eigen::Index index) {
  StateVector v = StateVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

}  // namespace freepulse
