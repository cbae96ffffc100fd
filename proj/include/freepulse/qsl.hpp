#pragma once

// Quantum speed limit for piecewise-constant trajectories:
//   tau = max(alpha * pi / (2 Ebar), beta * pi / (2 dEbar)),
//   beta = (2/pi) arccos(sqrt(eps)), alpha ~ beta^2, eps = |<psi0|psif>|^2,
// with Ebar and dEbar time averages of the energy above the instantaneous
// ground level and of its spread.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "freepulse/device.hpp"
#include "freepulse/dynamics.hpp"
#include "freepulse/errors.hpp"
#include "freepulse/operators.hpp"

namespace freepulse {

struct QSLInputs {
  StateVector psi0;
  StateVector psif;
  std::vector<HamiltonianSegment> segments;  // consecutive, in units of dt
  double dt = 0.0;                           // s
  // Energy offset; when empty each segment is shifted by its own ground energy.
  std::optional<double> ground_shift;
};

struct QSLResult {
  double epsilon = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double e_bar = 0.0;   // rad/s
  double de_bar = 0.0;  // rad/s
  double tau_energy = 0.0;
  double tau_variance = 0.0;
  double tau = 0.0;  // s
  double tau_in_dt = 0.0;
  bool variance_degenerate = false;
};

/// Published states carry rounded amplitudes, so their norm is only
/// checked to 1e-3.
inline constexpr double kQslNormTolerance = 1e-3;

inline double overlap_epsilon(const StateVector& psi0, const StateVector& psif) {
  if (psi0.size() != psif.size()) throw DimMismatch("overlap_epsilon: state dimensions differ");
  return std::clamp(std::norm(psi0.dot(psif)), 0.0, 1.0);
}

inline double qsl_beta(double epsilon) {
  return 2.0 / std::numbers::pi * std::acos(std::sqrt(std::clamp(epsilon, 0.0, 1.0)));
}

namespace detail {

inline double segment_shift(const QSLInputs& in, const ComplexMatrix& h) {
  if (in.ground_shift) return *in.ground_shift;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline void validate(const QSLInputs& in) {
  if (in.psi0.size() != in.psif.size()) throw DimMismatch("QSL states differ in dimension");
  if (norm_defect(in.psi0) > kQslNormTolerance || norm_defect(in.psif) > kQslNormTolerance) {
    throw PreconditionError("QSL states must be normalized");
  }
  if (!(in.dt > 0.0) || in.segments.empty()) throw PreconditionError("QSL trajectory is empty");
  int t = in.segments.front().start_dt;
  for (const auto& s : in.segments) {
    if (s.start_dt != t || s.end_dt < s.start_dt) throw PreconditionError("QSL segments must be consecutive");
    if (s.generator.rows() != in.psi0.size()) throw DimMismatch("QSL generator dimension mismatch");
    require_hermitian(s.generator, 1e-10 * std::max(1.0, s.generator.cwiseAbs().maxCoeff()), "QSL segment");
    t = s.end_dt;
  }
  if (t == in.segments.front().start_dt) throw PreconditionError("QSL trajectory has zero duration");
}

}  // namespace detail

/// Time averages of E(t) and dE(t) along the trajectory that ends in psif,
/// integrated with Simpson's rule on 200 intervals per segment.
inline std::pair<double, double> time_averages(const QSLInputs& in) {
  detail::validate(in);
  constexpr int kIntervals = 200;
  double e_int = 0.0;
  double de_int = 0.0;
  double total = 0.0;
  StateVector end_state = in.psif;
  for (auto it = in.segments.rbegin(); it != in.segments.rend(); ++it) {
    const double span = (it->end_dt - it->start_dt) * in.dt;
    if (span == 0.0) continue;
    const Eigen::Index n = it->generator.rows();
    const ComplexMatrix h = it->generator - detail::segment_shift(in, it->generator) * ComplexMatrix::Identity(n, n);
    const ComplexMatrix h2 = h * h;
    const double step = span / kIntervals;
    for (int k = 0; k <= kIntervals; ++k) {
      // state at time (span - k*step) into the segment
      const StateVector psi = apply_expm(h, -k * step, end_state);
      const double e = psi.dot(h * psi).real();
      const double var = psi.dot(h2 * psi).real() - e * e;
      const double w = (k == 0 || k == kIntervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      e_int += w * e * step / 3.0;
      de_int += w * std::sqrt(std::max(var, 0.0)) * step / 3.0;
    }
    end_state = apply_expm(h, -span, end_state);
    total += span;
  }
  return {e_int / total, de_int / total};
}

inline QSLResult qsl_tau(const QSLInputs& in) {
  QSLResult r;
  r.epsilon = overlap_epsilon(in.psi0, in.psif);
  r.beta = qsl_beta(r.epsilon);
  r.alpha = r.beta * r.beta;
  const auto [e, de] = time_averages(in);
  r.e_bar = e;
  r.de_bar = de;
  const double scale = std::max(std::abs(e), std::abs(de));
  if (!(std::abs(e) > 1e-12 * std::max(scale, 1.0)) && !(de > 1e-12 * std::max(scale, 1.0))) {
    throw DegenerateTrajectory("QSL trajectory has zero mean energy and zero energy spread");
  }
  r.tau_energy = e > 0.0 ? r.alpha * std::numbers::pi / (2.0 * e) : std::numeric_limits<double>::quiet_NaN();
  if (de > 0.0) {
    r.tau_variance = r.beta * std::numbers::pi / (2.0 * de);
    r.tau = std::isnan(r.tau_energy) ? r.tau_variance : std::max(r.tau_energy, r.tau_variance);
  } else {
    r.variance_degenerate = true;
    r.tau_variance = std::numeric_limits<double>::quiet_NaN();
    r.tau = r.tau_energy;
  }
  r.tau_in_dt = r.tau / in.dt;
  return r;
}

// ---------------------------------------------------------------------------
// Single-pulse speed-limit study on a one-qubit device.

/// Default single-bin amplitude of the study.
inline constexpr cplx kStudyAmplitude{-0.07047161691763452, -0.26610396687855536};

/// Theoretical target: the H2 ground state with amplitudes rounded to four
/// decimals (norm 0.99992, used as given).
inline StateVector study_theoretical_target() {
  StateVector v(2);
  v << -0.9935, 0.1135;
  return v;
}

/// Lab-frame snapshot of the study: -(w/2) Z + W Re[exp(i w t) d] X.
inline ComplexMatrix qsl_lab_generator(const DeviceModel& dev, cplx d, double t) {
  const auto& q = dev.qubits.front();
  const double w = kTwoPi * q.freq_z;
  const double om = kTwoPi * q.coupling_rate;
  return -0.5 * w * pauli::Z() + om * (std::polar(1.0, kTwoPi * q.drive_freq * t) * d).real() * pauli::X();
}

inline ComplexMatrix qsl_rwa_generator(const DeviceModel& dev, cplx d) {
  const auto& q = dev.qubits.front();
  const double om = kTwoPi * q.coupling_rate;
  const double delta = kTwoPi * (q.freq_z - q.drive_freq);
  return -0.5 * delta * pauli::Z() + om * (d.real() * pauli::X() + d.imag() * pauli::Y());
}

/// |0> evolved for one dt under the ground-shifted generator.
inline StateVector qsl_final_state(const ComplexMatrix& h, double dt) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  const ComplexMatrix shifted = h - es.eigenvalues()(0) * ComplexMatrix::Identity(h.rows(), h.cols());
  return apply_expm(shifted, dt, basis_state(h.rows(), 0));
}

struct QSLRow {
  std::string frame;   // "lab" or "rwa"
  std::string target;  // "theoretical" or "experimental"
  QSLResult result;
};

namespace detail {

inline void require_single_qubit(const DeviceModel& dev) {
  dev.validate();
  if (dev.n_qubits() != 1) throw FrameUnsupported("the speed-limit study needs a 1-qubit device");
}

/// Lab trajectory over one dt: the t = 0 snapshot gets zero weight and the
/// t = dt snapshot spans the whole window.
inline std::vector<HamiltonianSegment> lab_segments(const DeviceModel& dev, cplx d) {
  return {{qsl_lab_generator(dev, d, 0.0), 0, 0}, {qsl_lab_generator(dev, d, dev.dt()), 0, 1}};
}

}  // namespace detail

/// The four (frame, target) rows for a single-bin pulse of amplitude d.
inline std::vector<QSLRow> qsl_table(const DeviceModel& dev, cplx d = kStudyAmplitude,
                                     const StateVector& theoretical = study_theoretical_target()) {
  detail::require_single_qubit(dev);
  const double dt = dev.dt();
  const StateVector zero = basis_state(2, 0);
  const auto lab = detail::lab_segments(dev, d);
  const std::vector<HamiltonianSegment> rwa{{qsl_rwa_generator(dev, d), 0, 1}};
  const StateVector lab_exp = qsl_final_state(lab.back().generator, dt);
  const StateVector rwa_exp = qsl_final_state(rwa.front().generator, dt);
  return {
      {"lab", "theoretical", qsl_tau({zero, theoretical, lab, dt, std::nullopt})},
      {"lab", "experimental", qsl_tau({zero, lab_exp, lab, dt, std::nullopt})},
      {"rwa", "theoretical", qsl_tau({zero, theoretical, rwa, dt, std::nullopt})},
      {"rwa", "experimental", qsl_tau({zero, rwa_exp, rwa, dt, std::nullopt})},
  };
}

/// RWA rows with the pulse direction kept and |d| rescaled to `scale`
/// (1 = maximal amplitude); the experimental target stays the state reached
/// by the original pulse.
inline std::vector<QSLRow> qsl_max_amplitude(const DeviceModel& dev, cplx d = kStudyAmplitude, double scale = 1.0,
                                             const StateVector& theoretical = study_theoretical_target()) {
  detail::require_single_qubit(dev);
  if (std::abs(d) == 0.0) throw DegenerateTrajectory("pulse direction undefined for zero amplitude");
  const double dt = dev.dt();
  const StateVector zero = basis_state(2, 0);
  const StateVector original = qsl_final_state(qsl_rwa_generator(dev, d), dt);
  const std::vector<HamiltonianSegment> rwa{{qsl_rwa_generator(dev, scale * d / std::abs(d)), 0, 1}};
  return {
      {"rwa-max", "theoretical", qsl_tau({zero, theoretical, rwa, dt, std::nullopt})},
      {"rwa-max", "experimental", qsl_tau({zero, original, rwa, dt, std::nullopt})},
  };
}

/// Energies in the 2pi*MHz display unit.
inline double to_2pi_mhz(double rad_per_s) { return rad_per_s / (kTwoPi * 1e6); }

}  // namespace freepulse
