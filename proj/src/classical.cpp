#include "omod/classical.hpp"

#include <cmath>
#include <stdexcept>

#include "omod/errors.hpp"

namespace omod {

namespace {

bool too_large(const ClassicalState& s) {
  return std::abs(s.q) > 1e12 || std::abs(s.p) > 1e12 || std::abs(s.a) > 1e12 ||
         !std::isfinite(s.q) || !std::isfinite(s.p) || !std::isfinite(s.a.real()) ||
         !std::isfinite(s.a.imag());
}

ClassicalState rk4_step(const ClassicalState& x, double t, double dt,
                        const SystemParams& params, const DriveSpec& drive) {
  const ClassicalState k1 = classical_rhs(x, t, params, drive);
  const ClassicalState k2 = classical_rhs(x + (dt / 2) * k1, t + dt / 2, params, drive);
  const ClassicalState k3 = classical_rhs(x + (dt / 2) * k2, t + dt / 2, params, drive);
  const ClassicalState k4 = classical_rhs(x + dt * k3, t + dt, params, drive);
  return x + (dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Advances without storing intermediate samples.
ClassicalState advance(ClassicalState x, double t0, long n_steps, double dt,
                       const SystemParams& params, const DriveSpec& drive) {
  for (long i = 0; i < n_steps; ++i) {
    x = rk4_step(x, t0 + i * dt, dt, params, drive);
    if (too_large(x))
      throw DivergedError("classical integration diverged", t0 + (i + 1) * dt);
  }
  return x;
}

}  // namespace

ClassicalState classical_rhs(const ClassicalState& state, double t,
                             const SystemParams& params, const DriveSpec& drive) {
  ClassicalState d;
  d.q = params.omega_m * state.p;
  d.p = -params.omega_m * state.q - params.gamma_m * state.p + params.g * std::norm(state.a);
  d.a = -(params.kappa + Complex(0.0, params.delta)) * state.a +
        Complex(0.0, params.g) * state.a * state.q + drive.amplitude(t);
  return d;
}

Trajectory integrate_classical(const SystemParams& params, const DriveSpec& drive,
                               const ClassicalState& initial, double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0))
    throw std::invalid_argument("integrate_classical: dt and t_end must be > 0");
  if (dt > drive.period() / 1000.0)
    throw std::invalid_argument("integrate_classical: dt must be <= tau/1000");

  const long n = std::lround(t_end / dt);
  Trajectory traj;
  traj.times.reserve(n + 1);
  traj.states.reserve(n + 1);
  ClassicalState x = initial;
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  for (long i = 0; i < n; ++i) {
    x = rk4_step(x, i * dt, dt, params, drive);
    if (too_large(x))
      throw DivergedError("classical integration diverged", (i + 1) * dt);
    traj.times.push_back((i + 1) * dt);
    traj.states.push_back(x);
  }
  return traj;
}

ClassicalState LimitCycle::reconstruct(double t) const {
  Complex q = 0.0, p = 0.0, a = 0.0;
  for (int n = -n_max; n <= n_max; ++n) {
    const Complex ph = std::exp(Complex(0.0, n * Omega * t));
    q += q_coeff(n) * ph;
    p += p_coeff(n) * ph;
    a += a_coeff(n) * ph;
  }
  return {q.real(), p.real(), a};
}

LimitCycle extract_limit_cycle(const Trajectory& traj, double Omega, int n_max,
                               double tol) {
  const double tau = 2.0 * std::numbers::pi / Omega;
  const size_t N = traj.times.size();
  if (N < 3) throw std::invalid_argument("extract_limit_cycle: trajectory too short");
  const double dt = traj.times[1] - traj.times[0];
  const long m = std::lround(tau / dt);
  if (m < 64)
    throw std::invalid_argument("extract_limit_cycle: need >= 64 samples per period");
  if (std::abs(m * dt - tau) > 1e-9 * tau)
    throw std::invalid_argument("extract_limit_cycle: sample grid incommensurate with period");
  if (N < static_cast<size_t>(2 * m + 1))
    throw std::invalid_argument("extract_limit_cycle: trajectory must cover two periods");

  // Tail-to-previous-period mismatch, relative per-component scale.
  double residual = 0.0;
  for (size_t i = N - m; i < N; ++i) {
    const ClassicalState& s1 = traj.states[i];
    const ClassicalState& s0 = traj.states[i - m];
    residual = std::max(residual, std::abs(s1.q - s0.q) / std::max(1.0, std::abs(s1.q)));
    residual = std::max(residual, std::abs(s1.p - s0.p) / std::max(1.0, std::abs(s1.p)));
    residual = std::max(residual, std::abs(s1.a - s0.a) / std::max(1.0, std::abs(s1.a)));
  }
  if (residual > tol)
    throw NotConvergedError("extract_limit_cycle: trajectory not periodic", residual);

  LimitCycle cycle;
  cycle.Omega = Omega;
  cycle.n_max = n_max;
  cycle.residual = residual;
  const size_t dim = static_cast<size_t>(2 * n_max + 1);
  cycle.q_coeffs.assign(dim, 0.0);
  cycle.p_coeffs.assign(dim, 0.0);
  cycle.a_coeffs.assign(dim, 0.0);
  for (int n = -n_max; n <= n_max; ++n) {
    Complex cq = 0.0, cp = 0.0, ca = 0.0;
    for (size_t i = N - m; i < N; ++i) {
      const Complex ph = std::exp(Complex(0.0, -n * Omega * traj.times[i]));
      cq += traj.states[i].q * ph;
      cp += traj.states[i].p * ph;
      ca += traj.states[i].a * ph;
    }
    const size_t idx = static_cast<size_t>(n + n_max);
    cycle.q_coeffs[idx] = cq / double(m);
    cycle.p_coeffs[idx] = cp / double(m);
    cycle.a_coeffs[idx] = ca / double(m);
  }
  return cycle;
}

ClassicalState zeroth_order_state(const SystemParams& params, const DriveSpec& drive) {
  Complex e0 = 0.0;
  if (auto it = drive.harmonics.find(0); it != drive.harmonics.end()) e0 = it->second;
  return {0.0, 0.0, e0 / (params.kappa + Complex(0.0, params.delta))};
}

namespace {

Eigen::Vector4d pack(const ClassicalState& s) {
  return {s.q, s.p, s.a.real(), s.a.imag()};
}

ClassicalState unpack(const Eigen::Vector4d& v) {
  return {v[0], v[1], Complex(v[2], v[3])};
}

// Newton shooting for the fixed point of the period map. The mechanical
// transient decays only on the 1/gamma_m timescale, so relaxation alone
// cannot reach the cycle; the shooting solve removes it exactly.
ClassicalState refine_periodic_orbit(const SystemParams& params, const DriveSpec& drive,
                                     ClassicalState guess, long steps, double dt) {
  Eigen::Vector4d x = pack(guess);
  for (int iter = 0; iter < 12; ++iter) {
    const Eigen::Vector4d px = pack(advance(unpack(x), 0.0, steps, dt, params, drive));
    const Eigen::Vector4d G = px - x;
    const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    if (G.cwiseAbs().maxCoeff() < 1e-12 * scale) break;
    Eigen::Matrix4d J;
    for (int i = 0; i < 4; ++i) {
      const double eps = 1e-7 * std::max(1.0, std::abs(x[i]));
      Eigen::Vector4d xe = x;
      xe[i] += eps;
      const Eigen::Vector4d pe = pack(advance(unpack(xe), 0.0, steps, dt, params, drive));
      J.col(i) = (pe - px) / eps;
    }
    const Eigen::Matrix4d M = J - Eigen::Matrix4d::Identity();
    x -= M.fullPivLu().solve(G);
  }
  return unpack(x);
}

}  // namespace

LimitCycle find_limit_cycle(const SystemParams& params, const DriveSpec& drive,
                            const LimitCycleOptions& opt) {
  const double tau = drive.period();
  const long spp = opt.steps_per_period;
  const double dt = tau / double(spp);
  const double t_relax = opt.t_relax >= 0.0 ? opt.t_relax : 200.0 / params.kappa;
  const long n_periods = std::max<long>(1, std::lround(std::ceil(t_relax / tau)));

  ClassicalState x = advance(zeroth_order_state(params, drive), 0.0, n_periods * spp, dt,
                             params, drive);
  if (opt.newton_refine) x = refine_periodic_orbit(params, drive, x, spp, dt);

  const Trajectory tail = integrate_classical(params, drive, x, 2.0 * tau, dt);
  return extract_limit_cycle(tail, drive.Omega, opt.n_max, opt.tol);
}

}  // namespace omod
