#include "omod/model.hpp"

#include <cmath>
#include <stdexcept>

namespace omod {

void SystemParams::validate() const {
  if (!(omega_m > 0.0)) throw std::invalid_argument("omega_m must be > 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
  if (!(gamma_m >= 0.0)) throw std::invalid_argument("gamma_m must be >= 0");
  if (!(g >= 0.0)) throw std::invalid_argument("g must be >= 0");
  if (!(n_m >= 0.0)) throw std::invalid_argument("n_m must be >= 0");
  if (!(n_a >= 0.0)) throw std::invalid_argument("n_a must be >= 0");
  if (!std::isfinite(delta)) throw std::invalid_argument("delta must be finite");
}

void DriveSpec::validate() const {
  if (!(Omega > 0.0)) throw std::invalid_argument("drive Omega must be > 0");
}

void EffectiveCouplingSpec::validate() const {
  if (!(Omega > 0.0)) throw std::invalid_argument("coupling Omega must be > 0");
  if (!std::isfinite(delta_eff)) throw std::invalid_argument("delta_eff must be finite");
}

double thermal_occupation(double omega, double T, double hbar_over_kB) {
  if (!(omega > 0.0)) throw std::invalid_argument("thermal_occupation: omega must be > 0");
  if (!(T >= 0.0)) throw std::invalid_argument("thermal_occupation: T must be >= 0");
  if (T == 0.0) return 0.0;
  return 1.0 / std::expm1(hbar_over_kB * omega / T);
}

double effective_detuning(const SystemParams& params, double q_mean) {
  return params.delta - params.g * q_mean;
}

Complex effective_coupling(const SystemParams& params, Complex a_mean) {
  return std::sqrt(2.0) * params.g * a_mean;
}

Mat4 drift_matrix(Complex g_eff, double delta_eff, const SystemParams& params) {
  const double gr = g_eff.real();
  const double gi = g_eff.imag();
  Mat4 A;
  A << 0.0, params.omega_m, 0.0, 0.0,
      -params.omega_m, -params.gamma_m, gr, gi,
      -gi, 0.0, -params.kappa, delta_eff,
      gr, 0.0, -delta_eff, -params.kappa;
  return A;
}

Mat4 diffusion_matrix(const SystemParams& params) {
  Eigen::Vector4d d;
  d << 0.0, params.gamma_m * (2.0 * params.n_m + 1.0),
      params.kappa * (2.0 * params.n_a + 1.0),
      params.kappa * (2.0 * params.n_a + 1.0);
  return d.asDiagonal();
}

}  // namespace omod
