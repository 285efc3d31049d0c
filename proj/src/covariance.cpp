#include "omod/covariance.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "omod/errors.hpp"

namespace omod {

namespace {

constexpr int kSymDim = 10;  // independent entries of a symmetric 4x4

// (row, col) pairs, upper triangle.
constexpr int kSymRow[kSymDim] = {0, 0, 0, 0, 1, 1, 1, 2, 2, 3};
constexpr int kSymCol[kSymDim] = {0, 1, 2, 3, 1, 2, 3, 2, 3, 3};

Eigen::Matrix<double, kSymDim, 1> sym_to_vec(const Mat4& S) {
  Eigen::Matrix<double, kSymDim, 1> v;
  for (int k = 0; k < kSymDim; ++k) v[k] = S(kSymRow[k], kSymCol[k]);
  return v;
}

Mat4 vec_to_sym(const Eigen::Matrix<double, kSymDim, 1>& v) {
  Mat4 S;
  for (int k = 0; k < kSymDim; ++k) {
    S(kSymRow[k], kSymCol[k]) = v[k];
    S(kSymCol[k], kSymRow[k]) = v[k];
  }
  return S;
}

Mat4 sym_basis(int k) {
  Mat4 E = Mat4::Zero();
  E(kSymRow[k], kSymCol[k]) = 1.0;
  E(kSymCol[k], kSymRow[k]) = 1.0;
  return E;
}

Mat4 drift_at(const CouplingSchedule& schedule, const SystemParams& params, double t) {
  const auto [g_eff, delta_eff] = schedule(t);
  return drift_matrix(g_eff, delta_eff, params);
}

}  // namespace

CouplingSchedule CouplingSchedule::prescribed(const EffectiveCouplingSpec& spec) {
  return CouplingSchedule(
      [spec](double t) { return std::make_pair(spec.coupling(t), spec.delta_eff); },
      spec.period());
}

CouplingSchedule CouplingSchedule::derived(const LimitCycle& cycle,
                                           const SystemParams& params) {
  return CouplingSchedule(
      [cycle, params](double t) {
        const ClassicalState s = cycle.reconstruct(t);
        return std::make_pair(effective_coupling(params, s.a),
                              effective_detuning(params, s.q));
      },
      cycle.period());
}

CouplingSchedule CouplingSchedule::derived(const PerturbativeSolution& sol,
                                           const SystemParams& params) {
  return CouplingSchedule(
      [sol, params](double t) {
        const ClassicalState s = evaluate(sol, t);
        return std::make_pair(effective_coupling(params, s.a),
                              effective_detuning(params, s.q));
      },
      sol.period());
}

Mat4 symplectic_form() {
  Mat4 sigma = Mat4::Zero();
  sigma(0, 1) = 1.0;
  sigma(1, 0) = -1.0;
  sigma(2, 3) = 1.0;
  sigma(3, 2) = -1.0;
  return sigma;
}

double physicality_margin(const Mat4& V) {
  Eigen::Matrix4cd H = V.cast<Complex>() + Complex(0.0, 0.5) * symplectic_form().cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CovarianceSeries integrate_covariance(const CouplingSchedule& schedule,
                                      const SystemParams& params, const Mat4& V0,
                                      double t_end, double dt, long stride,
                                      bool check_physical) {
  if (!(dt > 0.0) || !(t_end > 0.0))
    throw std::invalid_argument("integrate_covariance: dt and t_end must be > 0");
  if (dt > schedule.period() / 1000.0)
    throw std::invalid_argument("integrate_covariance: dt must be <= tau/1000");

  const Mat4 D = diffusion_matrix(params);
  auto rhs = [&](const Mat4& V, double t) -> Mat4 {
    const Mat4 A = drift_at(schedule, params, t);
    return A * V + V * A.transpose() + D;
  };

  const long n = std::lround(t_end / dt);
  CovarianceSeries series;
  series.times.reserve(n / stride + 2);
  series.V.reserve(n / stride + 2);
  Mat4 V = 0.5 * (V0 + V0.transpose());
  series.times.push_back(0.0);
  series.V.push_back(V);
  for (long i = 0; i < n; ++i) {
    const double t = i * dt;
    const Mat4 k1 = rhs(V, t);
    const Mat4 k2 = rhs(V + 0.5 * dt * k1, t + 0.5 * dt);
    const Mat4 k3 = rhs(V + 0.5 * dt * k2, t + 0.5 * dt);
    const Mat4 k4 = rhs(V + dt * k3, t + dt);
    V += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    V = 0.5 * (V + V.transpose()).eval();
    if (!V.allFinite() || V.norm() > 1e12)
      throw DivergedError("covariance integration diverged", (i + 1) * dt);
    if (check_physical && (i + 1) % 256 == 0 &&
        physicality_margin(V) < -1e-6 * std::max(1.0, V.lpNorm<Eigen::Infinity>()))
      throw UnphysicalError("integrate_covariance: physicality violated");
    if ((i + 1) % stride == 0 || i + 1 == n) {
      series.times.push_back((i + 1) * dt);
      series.V.push_back(V);
    }
  }
  return series;
}

MonodromyMatrix monodromy(const CouplingSchedule& schedule, const SystemParams& params,
                          long steps_per_period) {
  const double tau = schedule.period();
  const double dt = tau / double(steps_per_period);
  auto rhs = [&](const Mat4& U, double t) -> Mat4 {
    return drift_at(schedule, params, t) * U;
  };
  Mat4 U = Mat4::Identity();
  for (long i = 0; i < steps_per_period; ++i) {
    const double t = i * dt;
    const Mat4 k1 = rhs(U, t);
    const Mat4 k2 = rhs(U + 0.5 * dt * k1, t + 0.5 * dt);
    const Mat4 k3 = rhs(U + 0.5 * dt * k2, t + 0.5 * dt);
    const Mat4 k4 = rhs(U + dt * k3, t + dt);
    U += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!U.allFinite() || U.norm() > 1e12)
      throw DivergedError("monodromy integration diverged", (i + 1) * dt);
  }
  MonodromyMatrix result;
  result.phi = U;
  Eigen::EigenSolver<Mat4> es(U, false);
  result.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  return result;
}

StabilityResult is_stable(const MonodromyMatrix& phi) {
  StabilityResult r;
  r.margin = 1.0 - phi.spectral_radius;
  r.stable = phi.spectral_radius < 1.0 - 1e-9;
  return r;
}

Mat4 steady_state_lyapunov(const Mat4& A, const Mat4& D) {
  Eigen::Matrix<double, kSymDim, kSymDim> M;
  for (int k = 0; k < kSymDim; ++k) {
    const Mat4 E = sym_basis(k);
    M.col(k) = sym_to_vec(A * E + E * A.transpose());
  }
  Eigen::FullPivLU<Eigen::Matrix<double, kSymDim, kSymDim>> lu(M);
  if (!lu.isInvertible())
    throw SolveFailedError("steady_state_lyapunov: singular Lyapunov operator");
  return vec_to_sym(lu.solve(-sym_to_vec(D)));
}

CovarianceSeries periodic_steady_state(const CouplingSchedule& schedule,
                                       const SystemParams& params, int samples_per_period,
                                       long steps_per_period) {
  if (steps_per_period % samples_per_period != 0)
    throw std::invalid_argument(
        "periodic_steady_state: steps_per_period must be a multiple of samples_per_period");
  const double tau = schedule.period();
  const double dt = tau / double(steps_per_period);

  const MonodromyMatrix phi = monodromy(schedule, params, steps_per_period);
  if (!is_stable(phi).stable)
    throw UnstableError("periodic_steady_state: monodromy spectral radius >= 1");

  // One-period inhomogeneous contribution from V = 0.
  const CovarianceSeries qrun = integrate_covariance(schedule, params, Mat4::Zero(), tau,
                                                     dt, steps_per_period,
                                                     /*check_physical=*/false);
  const Mat4 Q = qrun.V.back();

  // Discrete fixed point V* = Phi V* Phi^T + Q in the 10 independent entries.
  Eigen::Matrix<double, kSymDim, kSymDim> P;
  for (int k = 0; k < kSymDim; ++k)
    P.col(k) = sym_to_vec(phi.phi * sym_basis(k) * phi.phi.transpose());
  Eigen::Matrix<double, kSymDim, kSymDim> M =
      Eigen::Matrix<double, kSymDim, kSymDim>::Identity() - P;
  Eigen::FullPivLU<Eigen::Matrix<double, kSymDim, kSymDim>> lu(M);
  if (!lu.isInvertible())
    throw SolveFailedError("periodic_steady_state: fixed-point system singular");
  const Mat4 Vstar = vec_to_sym(lu.solve(sym_to_vec(Q)));

  CovarianceSeries series = integrate_covariance(schedule, params, Vstar, tau, dt,
                                                 steps_per_period / samples_per_period);
  const double closure = (series.V.back() - series.V.front()).norm() /
                         std::max(1.0, series.V.front().norm());
  if (closure > 1e-8)
    throw NotConvergedError("periodic_steady_state: propagated solution not periodic",
                            closure);
  series.times.pop_back();  // keep t in [0, tau)
  series.V.pop_back();
  return series;
}

}  // namespace omod
