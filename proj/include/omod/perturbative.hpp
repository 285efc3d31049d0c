#ifndef OMOD_PERTURBATIVE_HPP
#define OMOD_PERTURBATIVE_HPP

#include "omod/classical.hpp"
#include "omod/model.hpp"

namespace omod {

/// Double expansion of the classical limit cycle in powers of the coupling
/// and in Fourier harmonics. Coefficient (n, j) is stored at
/// table[j][n + n_max].
struct PerturbativeSolution {
  double Omega = 0.0;
  int j_max = 0;
  int n_max = 0;
  double g = 0.0;
  std::vector<std::vector<Complex>> q_table, p_table, a_table;

  double period() const { return 2.0 * std::numbers::pi / Omega; }
  Complex q_coeff(int n, int j) const { return q_table[j][static_cast<size_t>(n + n_max)]; }
  Complex p_coeff(int n, int j) const { return p_table[j][static_cast<size_t>(n + n_max)]; }
  Complex a_coeff(int n, int j) const { return a_table[j][static_cast<size_t>(n + n_max)]; }
};

/// Builds the coefficient tables by the recursive order-by-order solve.
/// Throws ResonantDenominatorError on an (essentially) undamped mechanical
/// resonance n Omega = omega_m.
PerturbativeSolution perturbative_coefficients(const SystemParams& params,
                                               const DriveSpec& drive, int j_max,
                                               int n_max);

/// Sums the double series at time t. Throws RealityViolationError if the
/// imaginary residue of q or p exceeds 1e-9 relative.
ClassicalState evaluate(const PerturbativeSolution& sol, double t);

/// Max relative deviation between the analytic series and the numerically
/// extracted cycle over one period (>= 256 sample points).
double compare_with_numerical(const PerturbativeSolution& sol, const LimitCycle& cycle);

}  // namespace omod

#endif
