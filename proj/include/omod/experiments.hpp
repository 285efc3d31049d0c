#ifndef OMOD_EXPERIMENTS_HPP
#define OMOD_EXPERIMENTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "omod/classical.hpp"
#include "omod/covariance.hpp"
#include "omod/entanglement.hpp"
#include "omod/model.hpp"
#include "omod/perturbative.hpp"

namespace omod {

struct SweepAxis {
  std::string variable;  // "Omega" or "g_Omega"
  double start = 0.0;
  double stop = 0.0;
  int steps = 0;

  double value(int i) const { return start + (stop - start) * i / (steps - 1); }
};

struct NumericsOptions {
  int classical_steps_per_period = 2048;
  int covariance_steps_per_period = 4096;
  int samples_per_period = 256;
  double limit_cycle_tol = 1e-6;
  double t_relax = -1.0;  // classical relaxation horizon; < 0 means 200/kappa
  int n_max = 4;          // limit-cycle extraction cutoff
  int j_max = 3;          // perturbative coupling-power cutoff
  int pert_n_max = 2;     // perturbative harmonic cutoff
  int trace_transient_periods = 60;
  int threads = 0;        // 0 selects hardware concurrency
};

enum class ExperimentMode { PrescribedCoupling, PhysicalDrive };

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::PrescribedCoupling;
  SystemParams params;
  std::optional<DriveSpec> drive;                  // physical-drive mode
  std::optional<EffectiveCouplingSpec> coupling;   // prescribed-coupling mode
  std::optional<SweepAxis> sweep;
  NumericsOptions numerics;
  std::string output_path;
  std::string digest;  // FNV-1a of the canonical config JSON

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  void validate() const;
};

struct TraceResult {
  // Transient block followed by the settled block starting at steady_begin.
  // Prescribed-coupling traces settle onto the periodic fixed point and the
  // block is one period; physical-drive traces record two drive periods so
  // that a period-doubled classical response is still captured whole.
  std::vector<double> t, E_N, g_re, g_im, q_mean, p_mean, a_abs;
  size_t steady_begin = 0;
  double E_N_max = 0.0;  // over the settled block
  // sup |E_N(t + tau) - E_N(t)| over one drive period of the settled block;
  // zero for prescribed-coupling traces (periodic by construction), large when
  // the settled response is not tau-periodic (e.g. period doubling).
  double periodicity_residual = 0.0;
};

struct SweepResult {
  std::vector<double> axis;
  std::vector<std::optional<double>> E_N_max;  // null at unstable points
  std::vector<bool> stable;
  std::vector<std::optional<double>> argmax_phase;
};

struct Peak {
  double location = 0.0;
  double height = 0.0;
  double prominence = 0.0;
};

TraceResult run_time_trace(const ExperimentConfig& config);
SweepResult sweep_modulation_frequency(const ExperimentConfig& config);
SweepResult sweep_modulation_amplitude(const ExperimentConfig& config);
std::vector<Peak> find_peaks(const SweepResult& result);

std::string trace_csv(const ExperimentConfig& config, const TraceResult& result);
std::string sweep_csv(const ExperimentConfig& config, const SweepResult& result);
void write_file(const std::string& path, const std::string& content);

/// Schedule for the configured system: prescribed directly, or derived from
/// the classical limit cycle in physical-drive mode.
CouplingSchedule build_schedule(const ExperimentConfig& config);

/// Maximum steady-state log negativity for one prescribed-coupling point.
std::optional<double> point_max_entanglement(const EffectiveCouplingSpec& spec,
                                             const SystemParams& params,
                                             const NumericsOptions& numerics,
                                             double* argmax_phase = nullptr);

}  // namespace omod

#endif
