#pragma once

// Time-dependent Hamiltonians of driven transmon qubits and their
// piecewise-constant propagation.
//
// Conventions (all energies are H/hbar in rad/s):
//   lab drift       -(w_z/2) Z_k + J (s+_k s-_l + h.c.)
//   lab drive       2 W_k Re[exp(-i w_d,k t) d_k] X_k
//   lab control     2 W_k Re[exp(-i w_d,l t) u_kl] X_k
// In the frame rotating at each drive frequency, after dropping the
// counter-rotating terms, a drive contributes W_k (Re d X_k + Im d Y_k), a
// control contributes the same with u_kl exp(i (w_d,k - w_d,l) t), and the
// exchange picks up the phase exp(i (w_d,k - w_d,l) t).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "freepulse/device.hpp"
#include "freepulse/errors.hpp"
#include "freepulse/operators.hpp"
#include "freepulse/pulse.hpp"

namespace freepulse {

enum class Frame {
  Lab,       // full lab frame, every qubit
  RWA,       // single-qubit rotating frame with the RWA
  Rotating,  // multi-qubit rotating frame: drives under the RWA, exchange kept
};

inline Frame parse_frame(const std::string& s) {
  if (s == "lab") return Frame::Lab;
  if (s == "rwa") return Frame::RWA;
  if (s == "rotating") return Frame::Rotating;
  throw UnknownName("unknown frame '" + s + "' (expected lab, rwa or rotating)");
}

inline std::string to_string(Frame f) {
  switch (f) {
    case Frame::Lab: return "lab";
    case Frame::RWA: return "rwa";
    case Frame::Rotating: return "rotating";
  }
  return "?";
}

/// Constant generator acting over [start_dt, end_dt).
struct HamiltonianSegment {
  ComplexMatrix generator;
  int start_dt = 0;
  int end_dt = 0;
};

struct NoiseModel {
  std::vector<double> gamma1;     // 1/s
  std::vector<double> gamma_phi;  // 1/s
  // confusion[k](measured, prepared); columns sum to 1.
  std::vector<Eigen::Matrix2d> confusion;

  static NoiseModel ideal(int n_qubits) {
    NoiseModel m;
    m.gamma1.assign(static_cast<std::size_t>(n_qubits), 0.0);
    m.gamma_phi.assign(static_cast<std::size_t>(n_qubits), 0.0);
    m.confusion.assign(static_cast<std::size_t>(n_qubits), Eigen::Matrix2d::Identity());
    return m;
  }

  /// Relaxation and dephasing rates from the device's T1/T2; perfect readout.
  static NoiseModel from_device(const DeviceModel& dev) {
    NoiseModel m = ideal(dev.n_qubits());
    for (int k = 0; k < dev.n_qubits(); ++k) {
      const auto& q = dev.qubits[static_cast<std::size_t>(k)];
      const double g1 = std::isfinite(q.t1) ? 1.0 / q.t1 : 0.0;
      const double g2 = std::isfinite(q.t2) ? 1.0 / q.t2 : 0.0;
      m.gamma1[static_cast<std::size_t>(k)] = g1;
      m.gamma_phi[static_cast<std::size_t>(k)] = std::max(0.0, g2 - 0.5 * g1);
    }
    return m;
  }

  static Eigen::Matrix2d readout_matrix(double p1_given0, double p0_given1) {
    Eigen::Matrix2d c;
    c << 1.0 - p1_given0, p0_given1, p1_given0, 1.0 - p0_given1;
    return c;
  }

  NoiseModel& with_readout(double p1_given0, double p0_given1) {
    for (auto& c : confusion) c = readout_matrix(p1_given0, p0_given1);
    return *this;
  }

  int n_qubits() const { return static_cast<int>(gamma1.size()); }

  bool has_dissipation() const {
    return std::any_of(gamma1.begin(), gamma1.end(), [](double g) { return g > 0.0; }) ||
           std::any_of(gamma_phi.begin(), gamma_phi.end(), [](double g) { return g > 0.0; });
  }

  bool has_readout_error() const {
    return std::any_of(confusion.begin(), confusion.end(),
                       [](const Eigen::Matrix2d& c) { return !c.isIdentity(0.0); });
  }

  void validate(int n_qubits_expected) const {
    if (n_qubits() != n_qubits_expected || gamma_phi.size() != gamma1.size() ||
        confusion.size() != gamma1.size()) {
      throw DimMismatch("noise model covers " + std::to_string(n_qubits()) + " qubits, expected " +
                        std::to_string(n_qubits_expected));
    }
    for (std::size_t k = 0; k < gamma1.size(); ++k) {
      if (!(gamma1[k] >= 0.0) || !(gamma_phi[k] >= 0.0)) {
        throw ValidationError("noise rates must be non-negative");
      }
      const auto& c = confusion[k];
      if ((c.array() < 0.0).any() || std::abs(c.col(0).sum() - 1.0) > 1e-12 ||
          std::abs(c.col(1).sum() - 1.0) > 1e-12) {
        throw ValidationError("confusion matrix columns must be probability vectors");
      }
    }
  }
};

/// Builds H(t) for one device and frame with the per-qubit operators cached.
class HamiltonianModel {
 public:
  HamiltonianModel(const DeviceModel& dev, Frame frame) : dev_(dev), frame_(frame) {
    dev.validate();
    n_ = dev.n_qubits();
    if (frame == Frame::RWA && n_ != 1) {
      throw FrameUnsupported("RWA frame is single-qubit only; use the rotating frame for " +
                             std::to_string(n_) + " qubits");
    }
    dim_ = Eigen::Index{1} << n_;
    drift_ = ComplexMatrix::Zero(dim_, dim_);
    for (int k = 0; k < n_; ++k) {
      const auto& q = dev.qubits[static_cast<std::size_t>(k)];
      x_.push_back(embed(pauli::X(), k, n_));
      raise_.push_back(embed(pauli::raising(), k, n_));
      omega_.push_back(kTwoPi * q.coupling_rate);
      wd_.push_back(kTwoPi * q.drive_freq);
      const double w = frame == Frame::Lab ? kTwoPi * q.freq_z : kTwoPi * (q.freq_z - q.drive_freq);
      drift_ += -0.5 * w * embed(pauli::Z(), k, n_);
    }
    for (const auto& e : dev.edges) {
      ExchangeTerm t;
      t.hop = raise_[static_cast<std::size_t>(e.k)] * raise_[static_cast<std::size_t>(e.l)].adjoint();
      t.j = kTwoPi * e.j;
      t.phase_rate = wd_[static_cast<std::size_t>(e.k)] - wd_[static_cast<std::size_t>(e.l)];
      if (frame == Frame::Lab) {
        drift_ += t.j * (t.hop + t.hop.adjoint());
      } else {
        exchange_.push_back(std::move(t));
      }
    }
  }

  const DeviceModel& device() const { return dev_; }
  Frame frame() const { return frame_; }
  Eigen::Index dim() const { return dim_; }

  void check_channels(const PulseSchedule& s) const {
    for (const auto& [ch, _] : s.channels()) {
      const bool ok = ch.k >= 0 && ch.k < n_ &&
                      (ch.is_drive() || (ch.l >= 0 && ch.l < n_ && dev_.has_edge(ch.k, ch.l)));
      if (!ok) throw TopologyMismatch("channel " + ch.label() + " does not exist on this device");
    }
  }

  /// Generator at time t given the amplitude on each channel at that time.
  ComplexMatrix generator(const std::vector<std::pair<ChannelId, cplx>>& amps, double t) const {
    ComplexMatrix h = drift_;
    add_controls(h, amps, t);
    return h;
  }

  void add_controls(ComplexMatrix& h, const std::vector<std::pair<ChannelId, cplx>>& amps,
                    double t) const {
    if (frame_ == Frame::Lab) {
      std::vector<double> coeff(static_cast<std::size_t>(n_), 0.0);
      for (const auto& [ch, a] : amps) {
        const auto k = static_cast<std::size_t>(ch.k);
        const double w = ch.is_drive() ? wd_[k] : wd_[static_cast<std::size_t>(ch.l)];
        coeff[k] += 2.0 * omega_[k] * (std::polar(1.0, -w * t) * a).real();
      }
      for (std::size_t k = 0; k < coeff.size(); ++k) {
        if (coeff[k] != 0.0) h += coeff[k] * x_[k];
      }
      return;
    }
    std::vector<cplx> coeff(static_cast<std::size_t>(n_), cplx{});
    for (const auto& [ch, a] : amps) {
      const auto k = static_cast<std::size_t>(ch.k);
      if (ch.is_drive()) {
        coeff[k] += a;
      } else {
        coeff[k] += a * std::polar(1.0, (wd_[k] - wd_[static_cast<std::size_t>(ch.l)]) * t);
      }
    }
    for (std::size_t k = 0; k < coeff.size(); ++k) {
      if (coeff[k] == cplx{}) continue;
      const cplx c = omega_[k] * coeff[k];
      h += c * raise_[k] + std::conj(c) * raise_[k].adjoint();
    }
    for (const auto& e : exchange_) {
      const cplx c = e.j * std::polar(1.0, e.phase_rate * t);
      h += c * e.hop + std::conj(c) * e.hop.adjoint();
    }
  }

  /// Substeps per dt that resolve the fastest oscillation in this frame
  /// with at least 20 points per period.
  int default_substeps() const {
    double fmax = 0.0;
    if (frame_ == Frame::Lab) {
      for (const auto& q : dev_.qubits) fmax = std::max({fmax, q.freq_z, q.drive_freq});
    } else {
      for (const auto& e : dev_.edges) {
        fmax = std::max(fmax, std::abs(dev_.qubits[static_cast<std::size_t>(e.k)].drive_freq -
                                       dev_.qubits[static_cast<std::size_t>(e.l)].drive_freq));
      }
    }
    return std::max(1, static_cast<int>(std::ceil(20.0 * fmax * dev_.dt() - 1e-9)));
  }

 private:
  struct ExchangeTerm {
    ComplexMatrix hop;  // s+_k s-_l
    double j = 0.0;
    double phase_rate = 0.0;
  };

  DeviceModel dev_;
  Frame frame_;
  int n_ = 0;
  Eigen::Index dim_ = 0;
  ComplexMatrix drift_;
  std::vector<ComplexMatrix> x_, raise_;
  std::vector<double> omega_, wd_;
  std::vector<ExchangeTerm> exchange_;
};

inline ComplexMatrix assemble(const DeviceModel& dev, const PulseSchedule& s, Frame frame, double t) {
  const HamiltonianModel model(dev, frame);
  model.check_channels(s);
  const double span = s.total_dt() * dev.dt();
  if (!(t >= 0.0) || t > span * (1.0 + 1e-12)) {
    throw PreconditionError("assemble: time outside the schedule span");
  }
  const int index = std::min(std::max(s.total_dt() - 1, 0), static_cast<int>(std::floor(t / dev.dt())));
  std::vector<std::pair<ChannelId, cplx>> amps;
  for (const auto& [ch, _] : s.channels()) amps.emplace_back(ch, s.amplitude(ch, index));
  return model.generator(amps, t);
}

namespace detail {

/// Walks the schedule substep by substep, handing the midpoint generator
/// and substep length to `step`.
template <typename Step>
void for_each_substep(const HamiltonianModel& model, const PulseSchedule& s, int substeps, Step&& step) {
  model.check_channels(s);
  if (substeps < 1) throw PreconditionError("substeps_per_dt must be >= 1");
  const double dt = model.device().dt();
  const double h = dt / substeps;
  std::vector<ChannelId> chans;
  std::vector<std::vector<cplx>> samples;
  for (const auto& [ch, _] : s.channels()) {
    chans.push_back(ch);
    samples.push_back(s.samples(ch));
  }
  std::vector<std::pair<ChannelId, cplx>> amps;
  for (int i = 0; i < s.total_dt(); ++i) {
    amps.clear();
    for (std::size_t c = 0; c < chans.size(); ++c) {
      const cplx a = samples[c][static_cast<std::size_t>(i)];
      if (a != cplx{}) amps.emplace_back(chans[c], a);
    }
    for (int j = 0; j < substeps; ++j) {
      const double t = i * dt + (j + 0.5) * h;
      step(model.generator(amps, t), h);
    }
  }
}

inline void require_density(const ComplexMatrix& rho, Eigen::Index dim) {
  if (rho.rows() != dim || rho.cols() != dim) throw DimMismatch("density matrix dimension mismatch");
  if (hermiticity_defect(rho) > 1e-10) throw InvalidDensity("density matrix is not Hermitian");
  if (std::abs(rho.trace() - cplx(1.0, 0.0)) > 1e-8) throw InvalidDensity("density matrix trace is not 1");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) throw InvalidDensity("density matrix is not positive semidefinite");
}

}  // namespace detail

inline StateVector propagate_state(const DeviceModel& dev, const PulseSchedule& s, Frame frame,
                                   const StateVector& psi0, int substeps_per_dt = 0) {
  const HamiltonianModel model(dev, frame);
  if (psi0.size() != model.dim()) throw DimMismatch("initial state dimension mismatch");
  if (norm_defect(psi0) > 1e-10) throw PreconditionError("initial state is not normalized");
  if (substeps_per_dt < 0) throw PreconditionError("substeps_per_dt must be >= 0");
  const int substeps = substeps_per_dt > 0 ? substeps_per_dt : model.default_substeps();
  StateVector psi = psi0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(model.dim());
  StateVector coeff(model.dim());
  detail::for_each_substep(model, s, substeps, [&](const ComplexMatrix& h, double tau) {
    es.compute(h);
    coeff.noalias() = es.eigenvectors().adjoint() * psi;
    for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff(k) *= std::polar(1.0, -es.eigenvalues()(k) * tau);
    psi.noalias() = es.eigenvectors() * coeff;
  });
  return psi;
}

/// Unitary substep followed by the exact amplitude-damping and dephasing
/// channels of each qubit over the same substep.
inline ComplexMatrix propagate_density(const DeviceModel& dev, const PulseSchedule& s, Frame frame,
                                       const ComplexMatrix& rho0, const NoiseModel& noise,
                                       int substeps_per_dt = 0) {
  const HamiltonianModel model(dev, frame);
  detail::require_density(rho0, model.dim());
  noise.validate(dev.n_qubits());
  if (substeps_per_dt < 0) throw PreconditionError("substeps_per_dt must be >= 0");
  const int substeps = substeps_per_dt > 0 ? substeps_per_dt : model.default_substeps();
  const double h = dev.dt() / substeps;

  std::vector<std::vector<ComplexMatrix>> kraus;
  for (int k = 0; k < dev.n_qubits(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (noise.gamma1[i] > 0.0) {
      const double p = -std::expm1(-noise.gamma1[i] * h);
      ComplexMatrix k0 = ComplexMatrix::Identity(2, 2);
      k0(1, 1) = std::sqrt(1.0 - p);
      kraus.push_back({embed(k0, k, dev.n_qubits()),
                       embed(std::sqrt(p) * pauli::lowering(), k, dev.n_qubits())});
    }
    if (noise.gamma_phi[i] > 0.0) {
      const double lambda = std::exp(-noise.gamma_phi[i] * h);
      kraus.push_back({embed(std::sqrt(0.5 * (1.0 + lambda)) * pauli::I(), k, dev.n_qubits()),
                       embed(std::sqrt(0.5 * (1.0 - lambda)) * pauli::Z(), k, dev.n_qubits())});
    }
  }

  ComplexMatrix rho = rho0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(model.dim());
  ComplexMatrix u(model.dim(), model.dim());
  detail::for_each_substep(model, s, substeps, [&](const ComplexMatrix& gen, double tau) {
    es.compute(gen);
    Eigen::VectorXcd ph(model.dim());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::polar(1.0, -es.eigenvalues()(k) * tau);
    u.noalias() = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    rho = u * rho * u.adjoint();
    for (const auto& ops : kraus) {
      ComplexMatrix next = ComplexMatrix::Zero(rho.rows(), rho.cols());
      for (const auto& op : ops) next.noalias() += op * rho * op.adjoint();
      rho = std::move(next);
    }
  });
  return 0.5 * (rho + rho.adjoint());
}

inline double purity(const ComplexMatrix& rho) { return (rho * rho).trace().real(); }

// ---------------------------------------------------------------------------
// Multi-level (Duffing) transmon used for leakage estimates.

struct LeakageTrace {
  std::vector<double> time_s;
  std::vector<std::vector<double>> populations;  // one row per recorded time
};

/// Evolves |0> of a d-level transmon (qubit 0 of `dev`) under a constant
/// lab-frame pulse with its carrier at the drive frequency and records the
/// level populations after every substep.
inline LeakageTrace leakage_trace(int levels, cplx amplitude, int duration_dt, const DeviceModel& dev,
                                  int substeps_per_dt = 200) {
  if (levels < 3) throw PreconditionError("leakage needs at least 3 levels");
  if (std::abs(amplitude) > 1.0 + 1e-12) throw PreconditionError("leakage amplitude must satisfy |a| <= 1");
  if (duration_dt < 0) throw PreconditionError("duration must be non-negative");
  if (substeps_per_dt < 1) throw PreconditionError("substeps_per_dt must be >= 1");
  dev.validate();
  const auto& q = dev.qubits.front();
  const double w = kTwoPi * q.freq_z;
  const double wd = kTwoPi * q.drive_freq;
  const double alpha = kTwoPi * q.anharmonicity;
  const double om = kTwoPi * q.coupling_rate;

  ComplexMatrix a = ComplexMatrix::Zero(levels, levels);
  for (int n = 1; n < levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const ComplexMatrix x = a + a.adjoint();
  ComplexMatrix drift = ComplexMatrix::Zero(levels, levels);
  for (int n = 0; n < levels; ++n) drift(n, n) = w * n + 0.5 * alpha * n * (n - 1);

  LeakageTrace out;
  StateVector psi = basis_state(levels, 0);
  const auto record = [&](double t) {
    out.time_s.push_back(t);
    std::vector<double> p(static_cast<std::size_t>(levels));
    for (int n = 0; n < levels; ++n) p[static_cast<std::size_t>(n)] = std::norm(psi(n));
    out.populations.push_back(std::move(p));
  };
  record(0.0);
  const double h = dev.dt() / substeps_per_dt;
  const long steps = static_cast<long>(duration_dt) * substeps_per_dt;
  for (long i = 0; i < steps; ++i) {
    const double t = (static_cast<double>(i) + 0.5) * h;
    const ComplexMatrix gen = drift + 2.0 * om * (std::polar(1.0, -wd * t) * amplitude).real() * x;
    psi = apply_expm(gen, h, psi);
    record(static_cast<double>(i + 1) * h);
  }
  return out;
}

inline std::vector<double> leakage_probe(int levels, cplx amplitude, int duration_dt, const DeviceModel& dev) {
  return leakage_trace(levels, amplitude, duration_dt, dev).populations.back();
}

}  // namespace freepulse
