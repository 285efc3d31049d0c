#include "omod/entanglement.hpp"

#include <algorithm>
#include <cmath>

#include "omod/errors.hpp"

namespace omod {

std::pair<double, double> symplectic_eigenvalues_pt(const Mat4& V) {
  const Eigen::Matrix2d A = V.topLeftCorner<2, 2>();
  const Eigen::Matrix2d B = V.bottomRightCorner<2, 2>();
  const Eigen::Matrix2d C = V.topRightCorner<2, 2>();
  const double sigma_tilde = A.determinant() + B.determinant() - 2.0 * C.determinant();
  const double detV = V.determinant();
  double disc = sigma_tilde * sigma_tilde - 4.0 * detV;
  if (disc < -1e-12)
    throw NumericalDomainError("symplectic_eigenvalues_pt: negative discriminant");
  disc = std::max(disc, 0.0);
  double lo = 0.5 * (sigma_tilde - std::sqrt(disc));
  double hi = 0.5 * (sigma_tilde + std::sqrt(disc));
  if (lo < -1e-12 || hi < -1e-12)
    throw NumericalDomainError("symplectic_eigenvalues_pt: negative squared eigenvalue");
  lo = std::max(lo, 0.0);
  hi = std::max(hi, 0.0);
  return {std::sqrt(lo), std::sqrt(hi)};
}

double log_negativity(const Mat4& V) {
  const double nu_minus = symplectic_eigenvalues_pt(V).first;
  return std::max(0.0, -std::log(2.0 * nu_minus));
}

EntanglementTrace max_entanglement_over_period(
    const CovarianceSeries& V_star, const std::function<Mat4(double)>& eval_at) {
  if (V_star.times.size() < 64)
    throw std::invalid_argument(
        "max_entanglement_over_period: need >= 64 samples per period");

  EntanglementTrace trace;
  trace.times = V_star.times;
  trace.E_N.reserve(V_star.V.size());
  size_t argmax = 0;
  for (size_t i = 0; i < V_star.V.size(); ++i) {
    trace.E_N.push_back(log_negativity(V_star.V[i]));
    if (trace.E_N[i] > trace.E_N[argmax]) argmax = i;
  }
  trace.E_N_max = trace.E_N[argmax];
  trace.argmax_time = trace.times[argmax];

  if (eval_at) {
    // One-shot 8x refinement spanning the two intervals around the argmax.
    const double h = V_star.times[1] - V_star.times[0];
    const double t0 = trace.argmax_time - h;
    for (int k = 0; k <= 16; ++k) {
      const double t = t0 + k * h / 8.0;
      const double en = log_negativity(eval_at(t));
      if (en > trace.E_N_max) {
        trace.E_N_max = en;
        trace.argmax_time = t;
      }
    }
  }
  return trace;
}

std::pair<double, double> predict_resonances(double g_0_eff, double omega_m) {
  if (!(g_0_eff >= 0.0))
    throw std::invalid_argument("predict_resonances: g_0_eff must be >= 0");
  return {2.0 * omega_m - g_0_eff, 2.0 * omega_m + g_0_eff};
}

}  // namespace omod
