#ifndef OMOD_ENTANGLEMENT_HPP
#define OMOD_ENTANGLEMENT_HPP

#include <functional>
#include <utility>
#include <vector>

#include "omod/covariance.hpp"
#include "omod/model.hpp"

namespace omod {

/// Logarithmic negativity over one modulation period.
struct EntanglementTrace {
  std::vector<double> times;
  std::vector<double> E_N;
  double E_N_max = 0.0;
  double argmax_time = 0.0;
};

/// Symplectic eigenvalues of the partially transposed covariance matrix,
/// returned as (nu_minus, nu_plus) with nu_minus <= nu_plus.
std::pair<double, double> symplectic_eigenvalues_pt(const Mat4& V);

/// E_N = max(0, -ln(2 nu_minus)), natural log, vacuum variance 1/2.
double log_negativity(const Mat4& V);

/// Evaluates E_N on a sampled periodic covariance series. When a pointwise
/// evaluator is supplied, the grid around the sampled argmax is refined 8x
/// once to localize the peak.
EntanglementTrace max_entanglement_over_period(
    const CovarianceSeries& V_star,
    const std::function<Mat4(double)>& eval_at = {});

/// Resonant modulation frequencies (2 w_m - g0, 2 w_m + g0) of the
/// hybridized two-mode squeezing interaction.
std::pair<double, double> predict_resonances(double g_0_eff, double omega_m);

}  // namespace omod

#endif
