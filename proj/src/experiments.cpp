#include "omod/experiments.hpp"

#include <atomic>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "omod/errors.hpp"

namespace omod {

namespace {

using nlohmann::json;

std::string fnv1a_digest(const std::string& text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

HarmonicMap parse_harmonics(const json& j) {
  HarmonicMap h;
  for (const auto& [key, val] : j.items()) {
    const int n = std::stoi(key);
    if (!val.is_array() || val.size() != 2)
      throw ConfigError("harmonic amplitude must be a [re, im] pair");
    h[n] = Complex(val[0].get<double>(), val[1].get<double>());
  }
  return h;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& t : pool) t.join();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

Mat4 thermal_covariance(const SystemParams& p) {
  Eigen::Vector4d d;
  d << p.n_m + 0.5, p.n_m + 0.5, p.n_a + 0.5, p.n_a + 0.5;
  return d.asDiagonal();
}

// Short RK4 hop used by the peak-refinement evaluator.
Mat4 propagate_cov(const CouplingSchedule& schedule, const SystemParams& params, Mat4 V,
                   double t0, double t1, int steps) {
  const Mat4 D = diffusion_matrix(params);
  auto rhs = [&](const Mat4& V, double t) -> Mat4 {
    const auto [g_eff, delta_eff] = schedule(t);
    const Mat4 A = drift_matrix(g_eff, delta_eff, params);
    return A * V + V * A.transpose() + D;
  };
  const double dt = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * dt;
    const Mat4 k1 = rhs(V, t);
    const Mat4 k2 = rhs(V + 0.5 * dt * k1, t + 0.5 * dt);
    const Mat4 k3 = rhs(V + 0.5 * dt * k2, t + 0.5 * dt);
    const Mat4 k4 = rhs(V + dt * k3, t + dt);
    V += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    V = 0.5 * (V + V.transpose()).eval();
  }
  return V;
}

std::function<Mat4(double)> make_refiner(const CouplingSchedule& schedule,
                                         const SystemParams& params,
                                         const CovarianceSeries& series) {
  const double tau = schedule.period();
  return [schedule, params, series, tau](double t) -> Mat4 {
    double s = std::fmod(t, tau);
    if (s < 0.0) s += tau;
    const double h = series.times[1] - series.times[0];
    size_t i = std::min(series.times.size() - 1, static_cast<size_t>(s / h));
    if (series.times[i] > s && i > 0) --i;
    if (s - series.times[i] < 1e-14) return series.V[i];
    return propagate_cov(schedule, params, series.V[i], series.times[i], s, 64);
  };
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.contains("units") || j["units"] != "omega_m")
    throw ConfigError("config must declare \"units\": \"omega_m\"");

  ExperimentConfig c;
  const std::string mode = j.value("mode", "");
  if (mode == "prescribed-coupling")
    c.mode = ExperimentMode::PrescribedCoupling;
  else if (mode == "physical-drive")
    c.mode = ExperimentMode::PhysicalDrive;
  else
    throw ConfigError("mode must be prescribed-coupling or physical-drive");

  if (!j.contains("params")) throw ConfigError("missing params");
  const json& p = j["params"];
  c.params.omega_m = p.value("omega_m", 1.0);
  c.params.kappa = p.value("kappa", 0.0);
  c.params.gamma_m = p.value("gamma_m", 0.0);
  c.params.delta = p.value("delta", 0.0);
  c.params.g = p.value("g", 0.0);
  c.params.n_m = p.value("n_m", 0.0);
  c.params.n_a = p.value("n_a", 0.0);

  if (j.contains("drive")) {
    DriveSpec d;
    d.Omega = j["drive"].value("Omega", 0.0);
    d.harmonics = parse_harmonics(j["drive"].value("harmonics", json::object()));
    c.drive = d;
  }
  if (j.contains("coupling")) {
    EffectiveCouplingSpec s;
    s.Omega = j["coupling"].value("Omega", 0.0);
    s.delta_eff = j["coupling"].value("delta_eff", 0.0);
    s.g_harmonics = parse_harmonics(j["coupling"].value("harmonics", json::object()));
    c.coupling = s;
  }
  if (j.contains("sweep")) {
    SweepAxis a;
    a.variable = j["sweep"].value("variable", "");
    a.start = j["sweep"].value("start", 0.0);
    a.stop = j["sweep"].value("stop", 0.0);
    a.steps = j["sweep"].value("steps", 0);
    c.sweep = a;
  }
  if (j.contains("numerics")) {
    const json& n = j["numerics"];
    NumericsOptions& o = c.numerics;
    o.classical_steps_per_period = n.value("classical_steps_per_period", o.classical_steps_per_period);
    o.covariance_steps_per_period = n.value("covariance_steps_per_period", o.covariance_steps_per_period);
    o.samples_per_period = n.value("samples_per_period", o.samples_per_period);
    o.limit_cycle_tol = n.value("limit_cycle_tol", o.limit_cycle_tol);
    o.t_relax = n.value("t_relax", o.t_relax);
    o.n_max = n.value("n_max", o.n_max);
    o.j_max = n.value("j_max", o.j_max);
    o.pert_n_max = n.value("pert_n_max", o.pert_n_max);
    o.trace_transient_periods = n.value("trace_transient_periods", o.trace_transient_periods);
    o.threads = n.value("threads", o.threads);
  }
  if (j.contains("output")) c.output_path = j["output"].value("path", "");

  c.digest = fnv1a_digest(j.dump());
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void ExperimentConfig::validate() const {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid params: ") + e.what());
  }
  if (drive.has_value() == coupling.has_value())
    throw ConfigError("exactly one of drive/coupling must be present");
  if (mode == ExperimentMode::PrescribedCoupling && !coupling)
    throw ConfigError("prescribed-coupling mode requires a coupling block");
  if (mode == ExperimentMode::PhysicalDrive && !drive)
    throw ConfigError("physical-drive mode requires a drive block");
  try {
    if (drive) drive->validate();
    if (coupling) coupling->validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid schedule: ") + e.what());
  }
  if (sweep) {
    if (sweep->steps < 2) throw ConfigError("sweep steps must be >= 2");
    if (!std::isfinite(sweep->start) || !std::isfinite(sweep->stop))
      throw ConfigError("sweep bounds must be finite");
    if (sweep->variable != "Omega" && sweep->variable != "g_Omega")
      throw ConfigError("sweep variable must be Omega or g_Omega");
  }
}

CouplingSchedule build_schedule(const ExperimentConfig& config) {
  if (config.mode == ExperimentMode::PrescribedCoupling)
    return CouplingSchedule::prescribed(*config.coupling);
  LimitCycleOptions opt;
  opt.steps_per_period = config.numerics.classical_steps_per_period;
  opt.n_max = config.numerics.n_max;
  opt.tol = config.numerics.limit_cycle_tol;
  opt.t_relax = config.numerics.t_relax;
  const LimitCycle cycle = find_limit_cycle(config.params, *config.drive, opt);
  return CouplingSchedule::derived(cycle, config.params);
}

namespace {

// Joint first-moment/covariance state for physical-drive traces.
struct JointState {
  ClassicalState cl;
  Mat4 V;
};

JointState joint_rk4_step(const JointState& x, double t, double dt,
                          const SystemParams& params, const DriveSpec& drive,
                          const Mat4& D) {
  auto rhs = [&](const JointState& s, double tt) -> JointState {
    const Mat4 A = drift_matrix(effective_coupling(params, s.cl.a),
                                effective_detuning(params, s.cl.q), params);
    return {classical_rhs(s.cl, tt, params, drive), A * s.V + s.V * A.transpose() + D};
  };
  auto axpy = [](const JointState& s, double c, const JointState& k) -> JointState {
    return {s.cl + c * k.cl, s.V + c * k.V};
  };
  const JointState k1 = rhs(x, t);
  const JointState k2 = rhs(axpy(x, 0.5 * dt, k1), t + 0.5 * dt);
  const JointState k3 = rhs(axpy(x, 0.5 * dt, k2), t + 0.5 * dt);
  const JointState k4 = rhs(axpy(x, dt, k3), t + dt);
  JointState out = x;
  out.cl += (dt / 6.0) * (k1.cl + 2.0 * k2.cl + 2.0 * k3.cl + k4.cl);
  out.V += (dt / 6.0) * (k1.V + 2.0 * k2.V + 2.0 * k3.V + k4.V);
  out.V = 0.5 * (out.V + out.V.transpose()).eval();
  return out;
}

// Trace along the actual transient classical solution. The covariance is
// evaluated on the trajectory the system really follows up to the
// t > 200/kappa settling horizon, not on the idealized asymptotic cycle; for
// some drives the cycle-linearized flow is Floquet-unstable while the
// finite-time state stays bounded.
TraceResult run_physical_trace(const ExperimentConfig& config) {
  const SystemParams& params = config.params;
  const DriveSpec& drive = *config.drive;
  const double tau = drive.period();
  const int spp = config.numerics.samples_per_period;
  const long steps = config.numerics.covariance_steps_per_period;
  const double dt = tau / double(steps);

  const double t_settle = config.numerics.t_relax >= 0.0 ? config.numerics.t_relax
                                                         : 200.0 / params.kappa;
  const long n_settle = std::max<long>(1, std::lround(std::ceil(t_settle / tau)));
  const int n_show = std::min<long>(config.numerics.trace_transient_periods, n_settle);

  const Mat4 D = diffusion_matrix(params);
  JointState x{zeroth_order_state(params, drive), thermal_covariance(params)};

  TraceResult result;
  auto push_row = [&](double t, const JointState& s) {
    result.t.push_back(t);
    result.E_N.push_back(log_negativity(s.V));
    const Complex g_eff = effective_coupling(params, s.cl.a);
    result.g_re.push_back(g_eff.real());
    result.g_im.push_back(g_eff.imag());
    result.q_mean.push_back(s.cl.q);
    result.p_mean.push_back(s.cl.p);
    result.a_abs.push_back(std::abs(s.cl.a));
  };

  // Transient block: the first n_show periods, coarsely sampled.
  const long show_stride = std::max<long>(1, steps / 16);
  push_row(0.0, x);
  for (long i = 0; i < n_settle * steps; ++i) {
    const double t = i * dt;
    x = joint_rk4_step(x, t, dt, params, drive, D);
    if (!x.V.allFinite() || x.V.norm() > 1e12 || std::abs(x.cl.a) > 1e12)
      throw DivergedError("trace integration diverged", t + dt);
    const long step = i + 1;
    if (step <= n_show * steps && step % show_stride == 0) push_row(step * dt, x);
  }

  // Two further periods recorded as the settled block. Two periods make the
  // block invariant under a period-doubled classical response, where a single
  // drive period would alias to one of its two halves.
  result.steady_begin = result.t.size();
  push_row(n_settle * tau, x);
  for (long i = 0; i < 2 * steps; ++i) {
    const double t = (n_settle * steps + i) * dt;
    x = joint_rk4_step(x, t, dt, params, drive, D);
    if ((i + 1) % (steps / spp) == 0) push_row(t + dt, x);
  }
  double e_max = 0.0, mismatch = 0.0;
  for (size_t i = result.steady_begin; i < result.E_N.size(); ++i)
    e_max = std::max(e_max, result.E_N[i]);
  for (int i = 0; i <= spp; ++i)
    mismatch = std::max(mismatch, std::abs(result.E_N[result.steady_begin + i + spp] -
                                           result.E_N[result.steady_begin + i]));
  result.E_N_max = e_max;
  result.periodicity_residual = mismatch;
  return result;
}

}  // namespace

TraceResult run_time_trace(const ExperimentConfig& config) {
  if (config.mode == ExperimentMode::PhysicalDrive) return run_physical_trace(config);

  const SystemParams& params = config.params;
  const CouplingSchedule schedule = CouplingSchedule::prescribed(*config.coupling);
  const double tau = schedule.period();
  const int spp = config.numerics.samples_per_period;
  const long steps = config.numerics.covariance_steps_per_period;
  const double dt = tau / double(steps);

  TraceResult result;
  auto push_row = [&](double t, double en) {
    const auto [g_eff, delta_eff] = schedule(t);
    (void)delta_eff;
    result.t.push_back(t);
    result.E_N.push_back(en);
    result.g_re.push_back(g_eff.real());
    result.g_im.push_back(g_eff.imag());
    result.q_mean.push_back(0.0);
    result.p_mean.push_back(0.0);
    result.a_abs.push_back(0.0);
  };

  // Transient from the local thermal state.
  const int n_periods = config.numerics.trace_transient_periods;
  const CovarianceSeries transient = integrate_covariance(
      schedule, params, thermal_covariance(params), n_periods * tau, dt, steps / spp);
  for (size_t i = 0; i < transient.V.size(); ++i)
    push_row(transient.times[i], log_negativity(transient.V[i]));

  // One steady-state period appended after the transient window.
  result.steady_begin = result.t.size();
  const CovarianceSeries steady = periodic_steady_state(schedule, params, spp, steps);
  const EntanglementTrace trace =
      max_entanglement_over_period(steady, make_refiner(schedule, params, steady));
  for (size_t i = 0; i < steady.V.size(); ++i)
    push_row(n_periods * tau + steady.times[i], trace.E_N[i]);
  result.E_N_max = trace.E_N_max;
  return result;
}

std::optional<double> point_max_entanglement(const EffectiveCouplingSpec& spec,
                                             const SystemParams& params,
                                             const NumericsOptions& numerics,
                                             double* argmax_phase) {
  const CouplingSchedule schedule = CouplingSchedule::prescribed(spec);
  const MonodromyMatrix phi =
      monodromy(schedule, params, numerics.covariance_steps_per_period);
  if (!is_stable(phi).stable) return std::nullopt;
  const CovarianceSeries steady = periodic_steady_state(
      schedule, params, numerics.samples_per_period, numerics.covariance_steps_per_period);
  const EntanglementTrace trace =
      max_entanglement_over_period(steady, make_refiner(schedule, params, steady));
  if (argmax_phase) *argmax_phase = trace.argmax_time;
  return trace.E_N_max;
}

SweepResult sweep_modulation_frequency(const ExperimentConfig& config) {
  if (config.mode != ExperimentMode::PrescribedCoupling || !config.sweep ||
      config.sweep->variable != "Omega")
    throw ConfigError("sweep_modulation_frequency needs prescribed-coupling mode and an Omega axis");

  const SweepAxis& axis = *config.sweep;
  SweepResult result;
  result.axis.resize(axis.steps);
  result.E_N_max.resize(axis.steps);
  result.stable.resize(axis.steps);
  result.argmax_phase.resize(axis.steps);

  parallel_for(axis.steps, config.numerics.threads, [&](int i) {
    EffectiveCouplingSpec spec = *config.coupling;
    spec.Omega = axis.value(i);
    result.axis[i] = spec.Omega;
    double phase = 0.0;
    std::optional<double> en;
    try {
      en = point_max_entanglement(spec, config.params, config.numerics, &phase);
    } catch (const std::exception&) {
      en = std::nullopt;  // per-point failure; sweep continues
    }
    result.stable[i] = en.has_value();
    result.E_N_max[i] = en;
    result.argmax_phase[i] = en ? std::optional<double>(phase) : std::nullopt;
  });
  return result;
}

SweepResult sweep_modulation_amplitude(const ExperimentConfig& config) {
  if (config.mode != ExperimentMode::PrescribedCoupling || !config.sweep ||
      config.sweep->variable != "g_Omega")
    throw ConfigError("sweep_modulation_amplitude needs prescribed-coupling mode and a g_Omega axis");

  const SweepAxis& axis = *config.sweep;
  EffectiveCouplingSpec base = *config.coupling;
  Complex g0 = 0.0;
  if (auto it = base.g_harmonics.find(0); it != base.g_harmonics.end()) g0 = it->second;
  base.Omega = 2.0 * config.params.omega_m - std::abs(g0);

  SweepResult result;
  result.axis.resize(axis.steps);
  result.E_N_max.assign(axis.steps, std::nullopt);
  result.stable.assign(axis.steps, false);
  result.argmax_phase.assign(axis.steps, std::nullopt);

  // Scan for the first unstable amplitude; points beyond it are marked
  // unstable without integration.
  int n_stable = axis.steps;
  for (int i = 0; i < axis.steps; ++i) {
    result.axis[i] = axis.value(i);
    EffectiveCouplingSpec spec = base;
    spec.g_harmonics[-1] = axis.value(i);
    const MonodromyMatrix phi =
        monodromy(CouplingSchedule::prescribed(spec), config.params,
                  config.numerics.covariance_steps_per_period);
    if (!is_stable(phi).stable) {
      n_stable = i;
      break;
    }
    result.stable[i] = true;
  }
  for (int i = n_stable; i < axis.steps; ++i) result.axis[i] = axis.value(i);

  parallel_for(n_stable, config.numerics.threads, [&](int i) {
    EffectiveCouplingSpec spec = base;
    spec.g_harmonics[-1] = axis.value(i);
    double phase = 0.0;
    std::optional<double> en;
    try {
      en = point_max_entanglement(spec, config.params, config.numerics, &phase);
    } catch (const std::exception&) {
      en = std::nullopt;
    }
    result.E_N_max[i] = en;
    result.stable[i] = en.has_value();
    result.argmax_phase[i] = en ? std::optional<double>(phase) : std::nullopt;
  });
  return result;
}

std::vector<Peak> find_peaks(const SweepResult& result) {
  const size_t n = result.axis.size();
  if (n < 5) throw std::invalid_argument("find_peaks: need >= 5 axis points");
  auto val = [&](size_t i) -> std::optional<double> { return result.E_N_max[i]; };

  std::vector<Peak> peaks;
  for (size_t i = 1; i + 1 < n; ++i) {
    if (!val(i - 1) || !val(i) || !val(i + 1)) continue;
    const double vm = *val(i - 1), v0 = *val(i), vp = *val(i + 1);
    // Ties break toward the lower axis value.
    if (!(v0 > vm && v0 >= vp)) continue;
    if (v0 == vp) {
      // plateau start counts as the peak
    }
    Peak peak;
    const double h = result.axis[i + 1] - result.axis[i];
    const double denom = vm - 2.0 * v0 + vp;
    if (denom < 0.0) {
      const double shift = 0.5 * (vm - vp) / denom;
      peak.location = result.axis[i] + shift * h;
      peak.height = v0 - 0.25 * (vm - vp) * shift;
    } else {
      peak.location = result.axis[i];
      peak.height = v0;
    }
    // Prominence relative to the neighboring minima.
    double min_left = v0, min_right = v0;
    for (size_t k = i; k-- > 0;) {
      if (!val(k)) break;
      if (*val(k) > v0) break;
      min_left = std::min(min_left, *val(k));
    }
    for (size_t k = i + 1; k < n; ++k) {
      if (!val(k)) break;
      if (*val(k) > v0) break;
      min_right = std::min(min_right, *val(k));
    }
    peak.prominence = v0 - std::max(min_left, min_right);
    peaks.push_back(peak);
  }
  return peaks;
}

std::string trace_csv(const ExperimentConfig& config, const TraceResult& result) {
  std::ostringstream out;
  out << "# omod trace\n";
  out << "# config-digest: " << config.digest << "\n";
  out << "# units: omega_m\n";
  out << "# steady_begin: " << result.steady_begin << "\n";
  out << "# E_N_max: " << fmt(result.E_N_max) << "\n";
  out << "# periodicity_residual: " << fmt(result.periodicity_residual) << "\n";
  out << "t,E_N,g_eff_re,g_eff_im,q_mean,p_mean,a_abs\n";
  for (size_t i = 0; i < result.t.size(); ++i)
    out << fmt(result.t[i]) << ',' << fmt(result.E_N[i]) << ',' << fmt(result.g_re[i])
        << ',' << fmt(result.g_im[i]) << ',' << fmt(result.q_mean[i]) << ','
        << fmt(result.p_mean[i]) << ',' << fmt(result.a_abs[i]) << "\n";
  return out.str();
}

std::string sweep_csv(const ExperimentConfig& config, const SweepResult& result) {
  std::ostringstream out;
  out << "# omod sweep\n";
  out << "# config-digest: " << config.digest << "\n";
  out << "# units: omega_m\n";
  out << "axis,E_N_max,stable,argmax_phase\n";
  for (size_t i = 0; i < result.axis.size(); ++i) {
    out << fmt(result.axis[i]) << ',';
    if (result.E_N_max[i]) out << fmt(*result.E_N_max[i]);
    out << ',' << (result.stable[i] ? 1 : 0) << ',';
    if (result.argmax_phase[i]) out << fmt(*result.argmax_phase[i]);
    out << "\n";
  }
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
}

}  // namespace omod
