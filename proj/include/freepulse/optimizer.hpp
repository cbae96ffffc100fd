#pragma once

// Variational pulse optimization: schedule parameters are fed through the
// simulator and the chemistry cost, and COBYLA updates them.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "freepulse/chemistry.hpp"
#include "freepulse/cobyla.hpp"
#include "freepulse/device.hpp"
#include "freepulse/dynamics.hpp"
#include "freepulse/pulse.hpp"

namespace freepulse {

struct OptimizerConfig {
  double rhobeg = 0.05;
  double rhoend = 1e-4;
  int max_iters = 500;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(rhoend > 0.0) || !(rhoend <= rhobeg)) throw ValidationError("optimizer: need 0 < rhoend <= rhobeg");
    if (max_iters < 1) throw ValidationError("optimizer: max_iters must be >= 1");
  }
};

/// How the cost is evaluated: exact statevector expectation, or shots drawn
/// per measurement basis. A noise model with T1/T2 switches the dynamics to
/// density-matrix propagation; its readout confusion applies to sampling.
struct Evaluation {
  std::optional<long> shots;
  std::optional<NoiseModel> noise;
  bool mitigate = false;

  static Evaluation exact() { return {}; }
  static Evaluation sampled(long shots, std::optional<NoiseModel> noise = std::nullopt, bool mitigate = false) {
    return {shots, std::move(noise), mitigate};
  }

  bool is_exact() const { return !shots && !noise; }
};

struct TraceRecord {
  int iter = 0;
  std::vector<double> theta;
  double total_energy = 0.0;
  double stderr_ha = 0.0;
  double best_so_far = 0.0;
  bool clamped = false;
  bool exploration = false;  // within the first p evaluations
};

struct RunResult {
  std::vector<double> best_theta;
  double best_energy = 0.0;
  std::vector<TraceRecord> trace;
  bool converged = false;
  std::optional<int> chem_acc_iter;
  double reference_total = 0.0;

  double delta_reference_mha() const { return (best_energy - reference_total) * 1e3; }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Cost function of one (device, template, problem, frame, evaluation).
class PulseCost {
 public:
  PulseCost(DeviceModel dev, ScheduleTemplate tpl, SCIProblem prob, Frame frame, Evaluation eval,
            std::uint64_t seed = 0)
      : dev_(std::move(dev)),
        tpl_(std::move(tpl)),
        prob_(std::move(prob)),
        frame_(frame),
        eval_(std::move(eval)),
        seed_(seed) {
    if (prob_.dim() != (Eigen::Index{1} << dev_.n_qubits())) {
      throw DimMismatch("problem needs " + std::to_string(prob_.q) + " qubits, device has " +
                        std::to_string(dev_.n_qubits()));
    }
    const HamiltonianModel model(dev_, frame_);
    model.check_channels(from_params(tpl_, std::vector<double>(static_cast<std::size_t>(tpl_.parameter_count()))));
    if (eval_.noise) eval_.noise->validate(dev_.n_qubits());
  }

  const ScheduleTemplate& schedule_template() const { return tpl_; }
  const SCIProblem& problem() const { return prob_; }

  /// Energy for parameters theta; `index` derives the sampling seed.
  std::pair<EnergyEstimate, bool> operator()(const std::vector<double>& theta, int index) const {
    const PulseSchedule s = from_params(tpl_, theta);
    const StateVector psi0 = basis_state(prob_.dim(), 0);
    const std::uint64_t seed = splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(index)));
    SamplingOptions opt{eval_.shots, eval_.noise, eval_.mitigate, seed};
    if (eval_.noise && eval_.noise->has_dissipation()) {
      const ComplexMatrix rho = propagate_density(dev_, s, frame_, psi0 * psi0.adjoint(), *eval_.noise);
      if (!eval_.shots && !eval_.noise->has_readout_error()) return {expectation_exact(prob_, rho), s.clamped()};
      return {expectation_sampled(prob_, rho, opt), s.clamped()};
    }
    const StateVector psi = propagate_state(dev_, s, frame_, psi0);
    if (eval_.is_exact()) return {expectation_exact(prob_, psi), s.clamped()};
    return {expectation_sampled(prob_, psi, opt), s.clamped()};
  }

 private:
  DeviceModel dev_;
  ScheduleTemplate tpl_;
  SCIProblem prob_;
  Frame frame_;
  Evaluation eval_;
  std::uint64_t seed_;
};

inline RunResult optimize_pulse(const DeviceModel& dev, const ScheduleTemplate& tpl, const SCIProblem& prob,
                                Frame frame, const Evaluation& eval, const OptimizerConfig& cfg,
                                const std::function<void(const TraceRecord&)>& progress = {}) {
  cfg.validate();
  const PulseCost cost(dev, tpl, prob, frame, eval, cfg.seed);
  RunResult result;
  result.reference_total = prob.reference_total();
  const int p = tpl.parameter_count();
  double best = std::numeric_limits<double>::infinity();

  const Objective f = [&](const std::vector<double>& theta) {
    const int iter = static_cast<int>(result.trace.size());
    const auto [e, clamped] = cost(theta, iter);
    TraceRecord rec;
    rec.iter = iter;
    rec.theta = theta;
    rec.total_energy = e.total;
    rec.stderr_ha = e.stderr_ha;
    rec.clamped = clamped;
    rec.exploration = iter < p;
    if (e.total < best) {
      best = e.total;
      result.best_theta = theta;
    }
    rec.best_so_far = best;
    if (!result.chem_acc_iter && std::abs(e.total - result.reference_total) <= kChemicalAccuracy) {
      result.chem_acc_iter = iter;
    }
    result.trace.push_back(std::move(rec));
    if (progress) progress(result.trace.back());
    return e.total;
  };

  const CobylaConfig ccfg{cfg.rhobeg, cfg.rhoend, cfg.max_iters};
  const auto r = cobyla_minimize(f, std::vector<double>(static_cast<std::size_t>(p), 0.0), ccfg);
  result.best_energy = best;
  result.converged = r.converged;
  return result;
}

struct DurationSearchResult {
  int n_bins = 0;
  RunResult run;
};

/// Extends a uniform template one bin at a time, each with a fresh
/// zero-initialized run, until the optimized energy is within chemical
/// accuracy of the problem's reference energy.
inline DurationSearchResult minimal_duration_search(const DeviceModel& dev, const SCIProblem& prob, Frame frame,
                                                    const Evaluation& eval, const OptimizerConfig& cfg,
                                                    int max_bins, int bin_width_dt = 1) {
  if (max_bins < 1) throw PreconditionError("minimal_duration_search: max_bins must be >= 1");
  for (int n = 1; n <= max_bins; ++n) {
    auto run = optimize_pulse(dev, uniform_template(dev, n, bin_width_dt, true), prob, frame, eval, cfg);
    if (std::abs(run.best_energy - run.reference_total) <= kChemicalAccuracy) return {n, std::move(run)};
  }
  throw NotReached(max_bins);
}

inline std::string trace_csv(const RunResult& r) {
  std::ostringstream out;
  out.precision(12);
  out << "iter,total_ha,stderr_ha,best_ha,phase\n";
  for (const auto& t : r.trace) {
    out << t.iter << ',' << t.total_energy << ',' << t.stderr_ha << ',' << t.best_so_far << ','
        << (t.exploration ? "exploration" : "convergence") << '\n';
  }
  return out.str();
}

}  // namespace freepulse
