#pragma once

// Unconstrained COBYLA: linear interpolation on a simplex of n+1 points with
// a trust region of radius rho that shrinks from rhobeg to rhoend.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "freepulse/errors.hpp"

namespace freepulse {

struct CobylaConfig {
  double rhobeg = 0.5;
  double rhoend = 1e-4;
  int max_evals = 500;
};

struct CobylaResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;  // stopped because rho reached rhoend
};

using Objective = std::function<double(const std::vector<double>&)>;
// Called after every evaluation with its 0-based index.
using EvalObserver = std::function<void(int, const std::vector<double>&, double)>;

namespace detail {

class Cobyla {
 public:
  Cobyla(const Objective& f, const CobylaConfig& cfg, const EvalObserver& observer)
      : f_(f), cfg_(cfg), observer_(observer) {}

  CobylaResult run(const std::vector<double>& x0) {
    n_ = static_cast<Eigen::Index>(x0.size());
    rho_ = cfg_.rhobeg;
    pole_ = Eigen::Map<const Eigen::VectorXd>(x0.data(), n_);
    fpole_ = 0.0;
    if (!evaluate(pole_, fpole_)) return finish(false);

    sim_ = rho_ * Eigen::MatrixXd::Identity(n_, n_);
    fval_ = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (!evaluate(pole_ + sim_.col(j), fval_(j))) return finish(false);
    }
    simi_ = sim_.inverse();

    bool geometry_allowed = true;  // false right after a trust step
    for (;;) {
      promote_best_vertex();
      const bool acceptable = simplex_acceptable();
      if (!geometry_allowed || acceptable) {
        const Eigen::VectorXd g = gradient();
        const double gnorm = g.norm();
        bool reduce = true;
        if (gnorm > 0.0 && std::isfinite(gnorm)) {
          const Eigen::VectorXd d = -(rho_ / gnorm) * g;
          const double predicted = rho_ * gnorm;
          double fnew = 0.0;
          if (!evaluate(pole_ + d, fnew)) return finish(false);
          const double actual = fpole_ - fnew;
          replace_vertex_after_trust_step(d, fnew, actual);
          reduce = !(actual > 0.0 && actual >= 0.1 * predicted);
        }
        geometry_allowed = false;
        if (!reduce) continue;
        if (!acceptable) {
          geometry_allowed = true;
          continue;
        }
      } else {
        if (!geometry_step()) return finish(false);
        continue;
      }
      if (rho_ <= cfg_.rhoend) return finish(true);
      rho_ *= 0.5;
      if (rho_ <= 1.5 * cfg_.rhoend) rho_ = cfg_.rhoend;
    }
  }

 private:
  static constexpr double kAlpha = 0.25;  // min vsig / rho
  static constexpr double kBeta = 2.1;    // max veta / rho
  static constexpr double kGamma = 0.5;   // geometry step length / rho
  static constexpr double kDelta = 1.1;   // edge-length threshold / rho

  bool evaluate(const Eigen::VectorXd& x, double& out) {
    if (evals_ >= cfg_.max_evals) return false;
    std::vector<double> xv(x.data(), x.data() + x.size());
    const double v = f_(xv);
    if (!std::isfinite(v)) throw NonFiniteObjective("objective returned a non-finite value");
    if (observer_) observer_(evals_, xv, v);
    ++evals_;
    if (v < best_f_) {
      best_f_ = v;
      best_x_ = std::move(xv);
    }
    out = v;
    return true;
  }

  CobylaResult finish(bool converged) const {
    CobylaResult r;
    r.x = best_x_;
    r.f = best_f_;
    r.evaluations = evals_;
    r.converged = converged;
    return r;
  }

  /// Makes the lowest vertex the pole; on ties the current pole stays.
  void promote_best_vertex() {
    Eigen::Index best = -1;
    double fbest = fpole_;
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (fval_(j) < fbest) {
        fbest = fval_(j);
        best = j;
      }
    }
    if (best < 0) return;
    const Eigen::VectorXd shift = sim_.col(best);
    pole_ += shift;
    std::swap(fpole_, fval_(best));
    for (Eigen::Index j = 0; j < n_; ++j) sim_.col(j) -= shift;
    sim_.col(best) = -shift;
    simi_ = sim_.inverse();
  }

  bool simplex_acceptable() {
    vsig_.resize(n_);
    veta_.resize(n_);
    bool ok = true;
    for (Eigen::Index j = 0; j < n_; ++j) {
      vsig_(j) = 1.0 / simi_.row(j).norm();
      veta_(j) = sim_.col(j).norm();
      if (vsig_(j) < kAlpha * rho_ || veta_(j) > kBeta * rho_) ok = false;
    }
    return ok;
  }

  /// Gradient of the linear interpolant through the pole and the vertices.
  Eigen::VectorXd gradient() const {
    Eigen::VectorXd df = fval_.array() - fpole_;
    return simi_.transpose() * df;
  }

  void replace_vertex(Eigen::Index j, const Eigen::VectorXd& d, double fnew) {
    sim_.col(j) = d;
    fval_(j) = fnew;
    const double scale = simi_.row(j).dot(d);
    simi_.row(j) /= scale;
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (i != j) simi_.row(i) -= simi_.row(i).dot(d) * simi_.row(j);
    }
  }

  bool geometry_step() {
    Eigen::Index jdrop = 0;
    if (veta_.maxCoeff(&jdrop) <= kBeta * rho_) vsig_.minCoeff(&jdrop);
    Eigen::VectorXd d = (kGamma * rho_ * vsig_(jdrop)) * simi_.row(jdrop).transpose();
    if (gradient().dot(d) > 0.0) d = -d;
    double fnew = 0.0;
    if (!evaluate(pole_ + d, fnew)) return false;
    replace_vertex(jdrop, d, fnew);
    return true;
  }

  void replace_vertex_after_trust_step(const Eigen::VectorXd& d, double fnew, double actual) {
    double threshold = actual <= 0.0 ? 1.0 : 0.0;
    Eigen::Index jdrop = -1;
    Eigen::VectorXd sigbar(n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      const double t = std::abs(simi_.row(j).dot(d));
      if (t > threshold) {
        jdrop = j;
        threshold = t;
      }
      sigbar(j) = t * vsig_(j);
    }
    double edgmax = kDelta * rho_;
    Eigen::Index far = -1;
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (sigbar(j) >= kAlpha * rho_ || sigbar(j) >= vsig_(j)) {
        const double len = actual > 0.0 ? (d - sim_.col(j)).norm() : veta_(j);
        if (len > edgmax) {
          far = j;
          edgmax = len;
        }
      }
    }
    if (far >= 0) jdrop = far;
    if (jdrop < 0) return;
    replace_vertex(jdrop, d, fnew);
  }

  const Objective& f_;
  CobylaConfig cfg_;
  const EvalObserver& observer_;
  Eigen::Index n_ = 0;
  double rho_ = 0.0;
  Eigen::VectorXd pole_;
  double fpole_ = 0.0;
  Eigen::MatrixXd sim_;   // columns: vertex - pole
  Eigen::MatrixXd simi_;  // inverse of sim_
  Eigen::VectorXd fval_;
  Eigen::VectorXd vsig_, veta_;
  int evals_ = 0;
  double best_f_ = std::numeric_limits<double>::infinity();
  std::vector<double> best_x_;
};

}  // namespace detail

/// Minimizes f from x0. Evaluations never exceed cfg.max_evals; the result
/// holds the best point evaluated, the earliest one on ties.
inline CobylaResult cobyla_minimize(const Objective& f, const std::vector<double>& x0, const CobylaConfig& cfg,
                                    const EvalObserver& observer = {}) {
  if (x0.empty()) throw PreconditionError("cobyla: dimension must be >= 1");
  if (!(cfg.rhoend > 0.0) || !(cfg.rhobeg >= cfg.rhoend)) {
    throw PreconditionError("cobyla: need 0 < rhoend <= rhobeg");
  }
  if (cfg.max_evals < 1) throw PreconditionError("cobyla: max_evals must be >= 1");
  for (double v : x0) {
    if (!std::isfinite(v)) throw PreconditionError("cobyla: x0 must be finite");
  }
  return detail::Cobyla(f, cfg, observer).run(x0);
}

}  // namespace freepulse
