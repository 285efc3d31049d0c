#include "omod/perturbative.hpp"

#include <cmath>

#include "omod/errors.hpp"

namespace omod {

PerturbativeSolution perturbative_coefficients(const SystemParams& params,
                                               const DriveSpec& drive, int j_max,
                                               int n_max) {
  if (j_max < 0) throw std::invalid_argument("perturbative_coefficients: j_max < 0");
  for (const auto& [n, c] : drive.harmonics)
    if (std::abs(n) > n_max && std::abs(c) > 0.0)
      throw std::invalid_argument("perturbative_coefficients: n_max below drive harmonics");

  PerturbativeSolution sol;
  sol.Omega = drive.Omega;
  sol.j_max = j_max;
  sol.n_max = n_max;
  sol.g = params.g;
  const size_t dim = static_cast<size_t>(2 * n_max + 1);
  sol.q_table.assign(j_max + 1, std::vector<Complex>(dim, 0.0));
  sol.p_table = sol.q_table;
  sol.a_table = sol.q_table;

  const double wm = params.omega_m;
  const double W = drive.Omega;
  auto cavity_den = [&](int n) {
    return params.kappa + Complex(0.0, params.delta + n * W);
  };
  auto mech_den = [&](int n) {
    return Complex(wm * wm - (n * W) * (n * W), params.gamma_m * n * W);
  };

  for (int n = -n_max; n <= n_max; ++n) {
    Complex en = 0.0;
    if (auto it = drive.harmonics.find(n); it != drive.harmonics.end()) en = it->second;
    sol.a_table[0][static_cast<size_t>(n + n_max)] = en / cavity_den(n);
  }

  for (int j = 1; j <= j_max; ++j) {
    for (int n = -n_max; n <= n_max; ++n) {
      const Complex md = mech_den(n);
      if (std::abs(md) < 1e-12)
        throw ResonantDenominatorError(
            "perturbative_coefficients: undamped mechanical resonance at n = " +
            std::to_string(n));
      // q is forced by the |a|^2 convolution one coupling order below.
      Complex acc = 0.0;
      for (int k = 0; k <= j - 1; ++k)
        for (int m = -n_max; m <= n_max; ++m)
          if (std::abs(n + m) <= n_max)
            acc += std::conj(sol.a_coeff(m, k)) * sol.a_coeff(n + m, j - 1 - k);
      const Complex qnj = wm * acc / md;
      sol.q_table[j][static_cast<size_t>(n + n_max)] = qnj;
      sol.p_table[j][static_cast<size_t>(n + n_max)] = Complex(0.0, n * W / wm) * qnj;
    }
    for (int n = -n_max; n <= n_max; ++n) {
      Complex acc = 0.0;
      for (int k = 0; k <= j - 1; ++k)
        for (int m = -n_max; m <= n_max; ++m)
          if (std::abs(n - m) <= n_max)
            acc += sol.a_coeff(m, k) * sol.q_coeff(n - m, j - 1 - k);
      sol.a_table[j][static_cast<size_t>(n + n_max)] = Complex(0.0, 1.0) * acc / cavity_den(n);
    }
  }
  return sol;
}

ClassicalState evaluate(const PerturbativeSolution& sol, double t) {
  Complex q = 0.0, p = 0.0, a = 0.0;
  double gj = 1.0;
  for (int j = 0; j <= sol.j_max; ++j) {
    for (int n = -sol.n_max; n <= sol.n_max; ++n) {
      const Complex ph = std::exp(Complex(0.0, n * sol.Omega * t));
      q += gj * sol.q_coeff(n, j) * ph;
      p += gj * sol.p_coeff(n, j) * ph;
      a += gj * sol.a_coeff(n, j) * ph;
    }
    gj *= sol.g;
  }
  if (std::abs(q.imag()) > 1e-9 * std::max(1.0, std::abs(q)) ||
      std::abs(p.imag()) > 1e-9 * std::max(1.0, std::abs(p)))
    throw RealityViolationError("evaluate: imaginary residue in q or p");
  return {q.real(), p.real(), a};
}

double compare_with_numerical(const PerturbativeSolution& sol, const LimitCycle& cycle) {
  if (std::abs(sol.Omega - cycle.Omega) > 1e-9 * std::abs(cycle.Omega))
    throw FrequencyMismatchError("compare_with_numerical: different fundamental frequencies");

  const int samples = 512;
  const double tau = cycle.period();
  double max_dev = 0.0, max_ref = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = tau * i / samples;
    const ClassicalState sa = evaluate(sol, t);
    const ClassicalState sn = cycle.reconstruct(t);
    const double dev = std::hypot(std::hypot(sa.q - sn.q, sa.p - sn.p), std::abs(sa.a - sn.a));
    const double ref = std::hypot(std::hypot(sn.q, sn.p), std::abs(sn.a));
    max_dev = std::max(max_dev, dev);
    max_ref = std::max(max_ref, ref);
  }
  return max_ref > 0.0 ? max_dev / max_ref : max_dev;
}

}  // namespace omod
