#pragma once

// Selected-CI problems and their energy estimators: exact expectation
// values, and shot-sampled estimates with readout error and mitigation.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "freepulse/dynamics.hpp"
#include "freepulse/errors.hpp"
#include "freepulse/operators.hpp"
#include "freepulse/textfile.hpp"

namespace freepulse {

inline constexpr double kChemicalAccuracy = 1.6e-3;  // Ha

struct SCIProblem {
  std::string name;
  ComplexMatrix ci_matrix;  // Ha
  double nuclear_repulsion = 0.0;
  int q = 0;
  std::vector<PauliString> pauli_terms;
  std::optional<double> fci_total;

  static SCIProblem make(std::string name, ComplexMatrix m, double e_nuc, std::optional<double> fci) {
    if (m.rows() != m.cols() || m.rows() < 1) throw DimMismatch("CI matrix must be square");
    const int q = qubits_for_dim(m.rows());
    if (q < 0) throw DimNotPowerOfTwo("CI matrix dimension " + std::to_string(m.rows()) + " is not a power of two");
    require_hermitian(m, 1e-10, "CI matrix");
    if (!m.allFinite() || !std::isfinite(e_nuc)) throw ValidationError("CI problem has non-finite entries");
    SCIProblem p;
    p.name = std::move(name);
    p.ci_matrix = 0.5 * (m + m.adjoint());
    p.nuclear_repulsion = e_nuc;
    p.q = q;
    p.pauli_terms = pauli_decompose(p.ci_matrix, q);
    p.fci_total = fci;
    return p;
  }

  Eigen::Index dim() const { return ci_matrix.rows(); }

  double sci_ground_total() const { return ground_eigenpair(ci_matrix).value + nuclear_repulsion; }

  /// FCI total when known, otherwise the SCI ground total.
  double reference_total() const { return fci_total.value_or(sci_ground_total()); }
};

inline SCIProblem builtin_problem(const std::string& name) {
  if (name == "h2_eq") {
    ComplexMatrix m(2, 2);
    m << -1.8267, 0.1814, 0.1814, -0.2596;
    return SCIProblem::make(name, m, 0.7103, -1.1371);
  }
  if (name == "lih_eq") {
    Eigen::MatrixXd m(8, 8);
    m << -8.922, 0.123, 0.033, 0.033, 0.000, 0.000, 0.012, 0.024,  //
        0.123, -7.819, -0.025, -0.025, -0.031, -0.031, 0.026, 0.019,  //
        0.033, -0.025, -8.178, 0.026, -0.008, 0.142, -0.104, 0.014,   //
        0.033, -0.025, 0.026, -8.178, 0.142, -0.008, -0.104, 0.014,   //
        0.000, -0.031, -0.008, 0.142, -8.764, 0.012, 0.053, 0.019,    //
        0.000, -0.031, 0.142, -0.008, 0.012, -8.764, 0.053, 0.019,    //
        0.012, 0.026, -0.104, -0.104, 0.053, 0.053, -8.226, 0.041,    //
        0.024, 0.019, 0.014, 0.014, 0.019, 0.019, 0.041, -8.252;
    return SCIProblem::make(name, m.cast<cplx>(), 1.05835, -7.88236);
  }
  throw UnknownName("unknown builtin problem '" + name + "' (expected h2_eq or lih_eq)");
}

/// Problem file: `dim`, `nuclear_repulsion_ha`, `matrix` (dim*dim reals or
/// 2*dim*dim re/im pairs, row-major), optional `fci_total_ha` and `name`.
inline SCIProblem parse_problem(std::string_view content, const std::string& source) {
  const auto doc = text::Document::parse(content, source);
  const auto& root = doc.root();
  for (const auto& [key, entry] : root.entries) {
    if (key != "dim" && key != "nuclear_repulsion_ha" && key != "matrix" && key != "fci_total_ha" &&
        key != "name") {
      doc.fail(entry.line, "unknown key '" + key + "'");
    }
  }
  const double dim_value = doc.number(root, "dim");
  if (dim_value < 1 || dim_value != std::floor(dim_value)) doc.fail(root.entries.at("dim").line, "dim must be a positive integer");
  const auto dim = static_cast<Eigen::Index>(dim_value);
  const auto values = doc.numbers(root, "matrix");
  const auto n = static_cast<std::size_t>(dim * dim);
  ComplexMatrix m(dim, dim);
  if (values.size() == n) {
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index c = 0; c < dim; ++c) m(r, c) = values[static_cast<std::size_t>(r * dim + c)];
  } else if (values.size() == 2 * n) {
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index c = 0; c < dim; ++c) {
        const auto i = static_cast<std::size_t>(2 * (r * dim + c));
        m(r, c) = cplx(values[i], values[i + 1]);
      }
  } else {
    doc.fail(root.entries.at("matrix").line, "matrix has " + std::to_string(values.size()) +
                                                 " numbers, expected " + std::to_string(n) + " or " +
                                                 std::to_string(2 * n));
  }
  const std::string name = doc.optional_string(root, "name").value_or(source);
  return SCIProblem::make(name, m, doc.number(root, "nuclear_repulsion_ha"),
                          doc.optional_number(root, "fci_total_ha"));
}

/// Loads a problem file, or a builtin problem when given "builtin:<name>"
/// or a bare builtin name.
inline SCIProblem load_problem(const std::string& path) {
  constexpr std::string_view kPrefix = "builtin:";
  if (path.rfind(kPrefix, 0) == 0) return builtin_problem(path.substr(kPrefix.size()));
  if (path == "h2_eq" || path == "lih_eq") return builtin_problem(path);
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open problem file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str(), path);
}

struct EnergyEstimate {
  double electronic = 0.0;
  double total = 0.0;
  double stderr_ha = 0.0;
};

inline EnergyEstimate expectation_exact(const SCIProblem& prob, const StateVector& psi) {
  if (psi.size() != prob.dim()) throw DimMismatch("state dimension does not match the CI matrix");
  const cplx e = psi.dot(prob.ci_matrix * psi);
  if (std::abs(e.imag()) > 1e-10 * std::max(1.0, std::abs(e.real()))) {
    throw NotHermitian("expectation value has an imaginary part");
  }
  return {e.real(), e.real() + prob.nuclear_repulsion, 0.0};
}

inline EnergyEstimate expectation_exact(const SCIProblem& prob, const ComplexMatrix& rho) {
  if (rho.rows() != prob.dim()) throw DimMismatch("density dimension does not match the CI matrix");
  const double e = (prob.ci_matrix * rho).trace().real();
  return {e, e + prob.nuclear_repulsion, 0.0};
}

// ---------------------------------------------------------------------------
// Sampled estimation.

struct BasisGroup {
  std::string bases;  // one of Z/X/Y per qubit
  std::vector<PauliString> terms;
};

/// Non-identity Pauli terms grouped by the single-qubit basis each qubit
/// must be measured in (I counts as Z).
inline std::vector<BasisGroup> group_by_basis(const std::vector<PauliString>& terms) {
  std::map<std::string, std::vector<PauliString>> groups;
  for (const auto& t : terms) {
    if (t.label.find_first_not_of('I') == std::string::npos) continue;
    std::string b = t.label;
    for (auto& c : b) c = (c == 'I') ? 'Z' : c;
    groups[b].push_back(t);
  }
  std::vector<BasisGroup> out;
  for (auto& [b, ts] : groups) out.push_back({b, std::move(ts)});
  return out;
}

inline double identity_coefficient(const std::vector<PauliString>& terms) {
  double c = 0.0;
  for (const auto& t : terms) {
    if (t.label.find_first_not_of('I') == std::string::npos) c += t.coefficient;
  }
  return c;
}

/// Unitary taking the measurement basis onto the computational basis.
inline ComplexMatrix basis_rotation(const std::string& bases) {
  ComplexMatrix hadamard(2, 2);
  hadamard << 1.0, 1.0, 1.0, -1.0;
  hadamard /= std::sqrt(2.0);
  ComplexMatrix sdg = ComplexMatrix::Identity(2, 2);
  sdg(1, 1) = cplx(0.0, -1.0);
  ComplexMatrix u = ComplexMatrix::Identity(1, 1);
  for (char c : bases) {
    ComplexMatrix r = ComplexMatrix::Identity(2, 2);
    if (c == 'X') r = hadamard;
    if (c == 'Y') r = hadamard * sdg;
    u = kron(u, r);
  }
  return u;
}

/// Applies the per-qubit 2x2 matrices to a distribution over bitstrings
/// (qubit 0 = most significant bit).
inline Eigen::VectorXd apply_tensor(const std::vector<Eigen::Matrix2d>& per_qubit, Eigen::VectorXd p) {
  const int q = static_cast<int>(per_qubit.size());
  const Eigen::Index dim = p.size();
  for (int k = 0; k < q; ++k) {
    const Eigen::Index bit = Eigen::Index{1} << (q - 1 - k);
    const auto& m = per_qubit[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (i & bit) continue;
      const double a = p(i);
      const double b = p(i | bit);
      p(i) = m(0, 0) * a + m(0, 1) * b;
      p(i | bit) = m(1, 0) * a + m(1, 1) * b;
    }
  }
  return p;
}

/// Tensor-product inversion of the readout confusion; negative entries are
/// clipped and the result renormalized.
inline Eigen::VectorXd mitigate(const std::vector<Eigen::Matrix2d>& confusion, const Eigen::VectorXd& measured) {
  std::vector<Eigen::Matrix2d> inv;
  for (const auto& c : confusion) {
    if (std::abs(c.determinant()) < 1e-12) throw ValidationError("confusion matrix is singular");
    inv.push_back(c.inverse());
  }
  Eigen::VectorXd p = apply_tensor(inv, measured);
  p = p.cwiseMax(0.0);
  const double s = p.sum();
  if (s > 0.0) p /= s;
  return p;
}

/// <P> for a Z-type string over the measured bitstring distribution.
inline double parity_expectation(const std::string& label, const Eigen::VectorXd& p) {
  const int q = static_cast<int>(label.size());
  Eigen::Index mask = 0;
  for (int i = 0; i < q; ++i) {
    if (label[static_cast<std::size_t>(i)] != 'I') mask |= Eigen::Index{1} << (q - 1 - i);
  }
  double e = 0.0;
  for (Eigen::Index x = 0; x < p.size(); ++x) {
    e += (std::popcount(static_cast<std::uint64_t>(x & mask)) % 2 ? -1.0 : 1.0) * p(x);
  }
  return e;
}

/// Multinomial draw via a chain of binomials.
inline Eigen::VectorXd sample_frequencies(const Eigen::VectorXd& p, long shots, std::mt19937_64& rng) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(p.size());
  long remaining = shots;
  double mass = 1.0;
  for (Eigen::Index i = 0; i < p.size() && remaining > 0; ++i) {
    if (i + 1 == p.size()) {
      counts(i) = static_cast<double>(remaining);
      break;
    }
    const double prob = mass > 0.0 ? std::clamp(p(i) / mass, 0.0, 1.0) : 0.0;
    std::binomial_distribution<long> draw(remaining, prob);
    const long c = draw(rng);
    counts(i) = static_cast<double>(c);
    remaining -= c;
    mass -= p(i);
  }
  return counts / static_cast<double>(shots);
}

struct SamplingOptions {
  std::optional<long> shots;  // per basis group; empty = exact distributions
  std::optional<NoiseModel> noise;
  bool mitigate = false;
  std::uint64_t seed = 0;
};

/// Measured distribution of one basis group for the state (or density).
template <typename State>
Eigen::VectorXd group_distribution(const State& state, const std::string& bases, const SamplingOptions& opt,
                                   std::size_t group_index) {
  const ComplexMatrix u = basis_rotation(bases);
  Eigen::VectorXd p;
  if constexpr (std::is_same_v<State, StateVector>) {
    p = (u * state).cwiseAbs2();
  } else {
    p = (u * state * u.adjoint()).diagonal().real().cwiseMax(0.0);
  }
  p /= p.sum();
  if (opt.noise && opt.noise->has_readout_error()) p = apply_tensor(opt.noise->confusion, p);
  if (opt.shots) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(group_index)};
    std::mt19937_64 rng(seq);
    p = sample_frequencies(p, *opt.shots, rng);
  }
  if (opt.mitigate && opt.noise) p = mitigate(opt.noise->confusion, p);
  return p;
}

template <typename State>
EnergyEstimate expectation_sampled(const SCIProblem& prob, const State& state, const SamplingOptions& opt) {
  if (state.rows() != prob.dim()) throw DimMismatch("state dimension does not match the CI matrix");
  if (opt.shots && *opt.shots < 1) throw PreconditionError("shots must be >= 1");
  if (opt.noise) opt.noise->validate(prob.q);
  double e = identity_coefficient(prob.pauli_terms);
  double var = 0.0;
  const auto groups = group_by_basis(prob.pauli_terms);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto p = group_distribution(state, groups[g].bases, opt, g);
    for (const auto& t : groups[g].terms) {
      const double v = parity_expectation(t.label, p);
      e += t.coefficient * v;
      if (opt.shots) var += t.coefficient * t.coefficient * std::max(0.0, 1.0 - v * v) / static_cast<double>(*opt.shots);
    }
  }
  return {e, e + prob.nuclear_repulsion, std::sqrt(var)};
}

inline EnergyEstimate expectation_sampled(const SCIProblem& prob, const StateVector& psi, long shots,
                                          const std::optional<NoiseModel>& noise, bool mitigate_readout,
                                          std::uint64_t seed) {
  if (shots < 1) throw PreconditionError("shots must be >= 1");
  return expectation_sampled(prob, psi, SamplingOptions{shots, noise, mitigate_readout, seed});
}

struct BasisDeviation {
  std::string observable;  // e.g. "Z", "X", "ZI"
  double exact = 0.0;
  double measured = 0.0;
  double relative_error = 0.0;
};

/// Relative deviation of each non-identity Pauli observable of the problem
/// when measured through the noise model's readout channel (no mitigation).
inline std::vector<BasisDeviation> measurement_error_report(const SCIProblem& prob, const StateVector& psi_true,
                                                            const NoiseModel& noise, std::optional<long> shots,
                                                            std::uint64_t seed = 0) {
  if (psi_true.size() != prob.dim()) throw DimMismatch("state dimension does not match the CI matrix");
  noise.validate(prob.q);
  const SamplingOptions opt{shots, noise, false, seed};
  std::vector<BasisDeviation> out;
  const auto groups = group_by_basis(prob.pauli_terms);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto p = group_distribution(psi_true, groups[g].bases, opt, g);
    for (const auto& t : groups[g].terms) {
      BasisDeviation d;
      d.observable = t.label;
      d.exact = psi_true.dot(pauli_matrix(t.label) * psi_true).real();
      d.measured = parity_expectation(t.label, p);
      d.relative_error = std::abs(d.measured - d.exact) / std::max(std::abs(d.exact), 1e-300);
      out.push_back(d);
    }
  }
  return out;
}

}  // namespace freepulse
