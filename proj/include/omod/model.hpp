#ifndef OMOD_MODEL_HPP
#define OMOD_MODEL_HPP

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <numbers>

namespace omod {

using Complex = std::complex<double>;
using Mat4 = Eigen::Matrix4d;

/// Sparse Fourier series with integer harmonic indices: f(t) = sum_n c_n e^{i n W t}.
using HarmonicMap = std::map<int, Complex>;

inline Complex eval_harmonics(const HarmonicMap& h, double Omega, double t) {
  Complex acc = 0.0;
  for (const auto& [n, c] : h)
    acc += c * std::exp(Complex(0.0, n * Omega * t));
  return acc;
}

/// Physical constants of the coupled cavity/resonator system.
/// All rates and frequencies are in units of the mechanical frequency;
/// omega_m is carried explicitly but defaults to 1.
struct SystemParams {
  double omega_m = 1.0;  // mechanical angular frequency
  double kappa = 0.0;    // cavity amplitude decay rate
  double gamma_m = 0.0;  // mechanical damping rate
  double delta = 0.0;    // laser detuning omega_a - omega_l
  double g = 0.0;        // single-photon radiation-pressure coupling
  double n_m = 0.0;      // mechanical bath mean occupation
  double n_a = 0.0;      // optical/microwave bath mean occupation

  void validate() const;  // throws std::invalid_argument on a bad field
};

/// Periodic drive amplitude E(t) = sum_n E_n e^{i n Omega t}.
struct DriveSpec {
  double Omega = 0.0;
  HarmonicMap harmonics;

  double period() const { return 2.0 * std::numbers::pi / Omega; }
  Complex amplitude(double t) const { return eval_harmonics(harmonics, Omega, t); }
  void validate() const;
};

/// Directly prescribed periodic effective coupling with constant effective detuning.
struct EffectiveCouplingSpec {
  double Omega = 0.0;
  HarmonicMap g_harmonics;
  double delta_eff = 0.0;

  double period() const { return 2.0 * std::numbers::pi / Omega; }
  Complex coupling(double t) const { return eval_harmonics(g_harmonics, Omega, t); }
  void validate() const;
};

/// Mean bath occupation 1/(exp(hbar w / kB T) - 1); exactly 0 at T = 0.
double thermal_occupation(double omega, double T, double hbar_over_kB);

/// Effective detuning Delta - g <q>.
double effective_detuning(const SystemParams& params, double q_mean);

/// Effective coupling sqrt(2) g <a>.
Complex effective_coupling(const SystemParams& params, Complex a_mean);

/// Drift matrix of the linearized fluctuation dynamics in the
/// quadrature order (dq, dp, dx, dy).
Mat4 drift_matrix(Complex g_eff, double delta_eff, const SystemParams& params);

/// Constant diffusion matrix diag(0, gamma_m(2 n_m+1), kappa(2 n_a+1), kappa(2 n_a+1)).
Mat4 diffusion_matrix(const SystemParams& params);

}  // namespace omod

#endif
