#ifndef OMOD_CLASSICAL_HPP
#define OMOD_CLASSICAL_HPP

#include <vector>

#include "omod/model.hpp"

namespace omod {

/// First moments <q>, <p>, <a> of the semiclassical dynamics.
struct ClassicalState {
  double q = 0.0;
  double p = 0.0;
  Complex a = 0.0;

  ClassicalState& operator+=(const ClassicalState& o) {
    q += o.q;
    p += o.p;
    a += o.a;
    return *this;
  }
  friend ClassicalState operator+(ClassicalState l, const ClassicalState& r) { return l += r; }
  friend ClassicalState operator*(double s, const ClassicalState& x) {
    return {s * x.q, s * x.p, s * x.a};
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<ClassicalState> states;
};

/// Fourier representation of the asymptotic periodic orbit.
/// Coefficient n is stored at index n + n_max.
struct LimitCycle {
  double Omega = 0.0;
  int n_max = 0;
  std::vector<Complex> q_coeffs, p_coeffs, a_coeffs;
  double residual = 0.0;

  double period() const { return 2.0 * std::numbers::pi / Omega; }
  Complex q_coeff(int n) const { return q_coeffs[static_cast<size_t>(n + n_max)]; }
  Complex p_coeff(int n) const { return p_coeffs[static_cast<size_t>(n + n_max)]; }
  Complex a_coeff(int n) const { return a_coeffs[static_cast<size_t>(n + n_max)]; }

  ClassicalState reconstruct(double t) const;
};

/// Right-hand side of the first-moment ODEs.
ClassicalState classical_rhs(const ClassicalState& state, double t,
                             const SystemParams& params, const DriveSpec& drive);

/// Fixed-step fourth-order integration of the first-moment ODEs,
/// sampled on the uniform step grid. Throws DivergedError if any
/// component exceeds 1e12 in magnitude.
Trajectory integrate_classical(const SystemParams& params, const DriveSpec& drive,
                               const ClassicalState& initial, double t_end, double dt);

/// Discrete Fourier analysis of the final period of a uniformly sampled
/// trajectory. The trajectory must cover at least two full periods at its
/// tail with >= 64 samples per period. Throws NotConvergedError when the
/// tail-to-previous-period mismatch exceeds `tol` (relative, per-component
/// scale max(1,|component|)).
LimitCycle extract_limit_cycle(const Trajectory& traj, double Omega, int n_max,
                               double tol = 1e-6);

/// Zeroth-order initial condition (0, 0, E_0/(kappa + i Delta)).
ClassicalState zeroth_order_state(const SystemParams& params, const DriveSpec& drive);

struct LimitCycleOptions {
  double t_relax = -1.0;       // < 0 selects the default 200/kappa
  int steps_per_period = 2048; // fixed-step resolution, dt = tau / steps_per_period
  int n_max = 4;
  double tol = 1e-6;
  bool newton_refine = true;   // shooting refinement of the period map
};

/// Relax from the zeroth-order state, refine the periodic orbit by Newton
/// shooting on the period map, and extract its Fourier coefficients.
LimitCycle find_limit_cycle(const SystemParams& params, const DriveSpec& drive,
                            const LimitCycleOptions& opt = {});

}  // namespace omod

#endif
