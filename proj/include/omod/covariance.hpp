#ifndef OMOD_COVARIANCE_HPP
#define OMOD_COVARIANCE_HPP

#include <functional>
#include <utility>
#include <vector>

#include "omod/classical.hpp"
#include "omod/model.hpp"
#include "omod/perturbative.hpp"

namespace omod {

/// Periodic schedule t -> (effective coupling, effective detuning) feeding
/// the drift matrix. Prescribed schedules come straight from an
/// EffectiveCouplingSpec; derived schedules reconstruct the classical cycle.
class CouplingSchedule {
 public:
  using Fn = std::function<std::pair<Complex, double>(double)>;

  CouplingSchedule(Fn fn, double period) : fn_(std::move(fn)), period_(period) {}

  static CouplingSchedule prescribed(const EffectiveCouplingSpec& spec);
  static CouplingSchedule derived(const LimitCycle& cycle, const SystemParams& params);
  static CouplingSchedule derived(const PerturbativeSolution& sol, const SystemParams& params);

  std::pair<Complex, double> operator()(double t) const { return fn_(t); }
  double period() const { return period_; }

 private:
  Fn fn_;
  double period_;
};

struct CovarianceSeries {
  std::vector<double> times;
  std::vector<Mat4> V;
};

struct MonodromyMatrix {
  Mat4 phi;
  double spectral_radius = 0.0;
};

struct StabilityResult {
  bool stable = false;
  double margin = 0.0;  // 1 - spectral radius
};

/// Symplectic form, block-diag of [[0,1],[-1,0]].
Mat4 symplectic_form();

/// Smallest eigenvalue of V + (i/2) sigma; >= 0 (within tolerance) iff V is
/// a physical covariance matrix.
double physicality_margin(const Mat4& V);

/// Fixed-step fourth-order integration of dV/dt = A(t) V + V A^T + D with
/// per-step re-symmetrization, sampled on the step grid every `stride` steps.
CovarianceSeries integrate_covariance(const CouplingSchedule& schedule,
                                      const SystemParams& params, const Mat4& V0,
                                      double t_end, double dt, long stride = 1,
                                      bool check_physical = true);

/// Propagator of the homogeneous system over one period.
MonodromyMatrix monodromy(const CouplingSchedule& schedule, const SystemParams& params,
                          long steps_per_period = 4096);

StabilityResult is_stable(const MonodromyMatrix& phi);

/// Algebraic steady state of the constant-coefficient Lyapunov equation
/// A V + V A^T + D = 0.
Mat4 steady_state_lyapunov(const Mat4& A, const Mat4& D);

/// Periodic steady-state covariance: one-period inhomogeneous integral plus
/// a discrete fixed-point solve in the 10 independent entries, then one
/// period of propagation sampled at samples_per_period points.
CovarianceSeries periodic_steady_state(const CouplingSchedule& schedule,
                                       const SystemParams& params,
                                       int samples_per_period = 256,
                                       long steps_per_period = 4096);

}  // namespace omod

#endif
