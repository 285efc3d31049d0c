// Acceptance gate: one line per criterion, nonzero exit if any fail.
// Tolerances are pinned here and are not tuned to make runs pass.

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "omod/errors.hpp"
#include "omod/experiments.hpp"

using namespace omod;
using nlohmann::json;

namespace {

constexpr double kPeakProminence = 0.02;   // "prominent" peak threshold
constexpr double kPeakLocationTol = 0.05;  // in units of omega_m
constexpr double kMonotonicityTol = 1e-6;  // allowed decrease between grid points
constexpr double kPeriodicityTol = 1e-6;   // sup |E_N(t+tau) - E_N(t)| in steady state
constexpr double kPerturbativeTol = 0.05;  // max relative cycle error
constexpr double kOracleTolTight = 1e-8;
constexpr double kOracleTolRelax = 1e-6;
constexpr double kLogNegTol = 1e-10;
constexpr double kPhysicalityFloor = -1e-8;

std::string g_configs_dir;

std::string read_file(const std::string& name) {
  std::ifstream in(g_configs_dir + "/" + name);
  if (!in) throw std::runtime_error("cannot open " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig config_with(const std::string& name,
                             const std::function<void(json&)>& edit) {
  json j = json::parse(read_file(name));
  if (edit) edit(j);
  return ExperimentConfig::from_json_text(j.dump());
}

struct Criterion {
  int id;
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& note) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "    ok   " : "    FAIL ") + note);
  }
  void report() const {
    std::printf("criterion %d: %s\n", id, pass ? "PASS" : "FAIL");
    for (const std::string& n : notes) std::printf("%s\n", n.c_str());
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

const double kG0[] = {0.2, 0.4, 0.6, 0.8};

// ---------------------------------------------------------------- criterion 1
Criterion criterion1() {
  Criterion c{1};
  for (double g0 : kG0) {
    const ExperimentConfig cfg = config_with("fig1.json", [&](json& j) {
      j["coupling"]["harmonics"]["0"] = {g0, 0.0};
    });
    const SweepResult sweep = sweep_modulation_frequency(cfg);
    std::vector<Peak> peaks;
    for (const Peak& p : find_peaks(sweep))
      if (p.prominence >= kPeakProminence) peaks.push_back(p);

    std::string where;
    for (const Peak& p : peaks) where += " " + fmt(p.location) + "(h=" + fmt(p.height) + ")";
    c.check(peaks.size() == 2,
            "g0=" + fmt(g0) + ": " + std::to_string(peaks.size()) + " prominent peaks:" + where);
    if (peaks.size() == 2) {
      c.check(std::abs(peaks[0].location - (2.0 - g0)) <= kPeakLocationTol,
              "g0=" + fmt(g0) + ": lower peak " + fmt(peaks[0].location) + " within " +
                  fmt(kPeakLocationTol) + " of " + fmt(2.0 - g0));
      c.check(std::abs(peaks[1].location - (2.0 + g0)) <= kPeakLocationTol,
              "g0=" + fmt(g0) + ": upper peak " + fmt(peaks[1].location) + " within " +
                  fmt(kPeakLocationTol) + " of " + fmt(2.0 + g0));
      c.check(peaks[0].height > peaks[1].height,
              "g0=" + fmt(g0) + ": lower peak strictly higher (" + fmt(peaks[0].height) +
                  " vs " + fmt(peaks[1].height) + ")");
    }
  }
  return c;
}

// ---------------------------------------------------------------- criterion 2
Criterion criterion2() {
  Criterion c{2};
  for (double g0 : kG0) {
    const ExperimentConfig cfg = config_with("fig2.json", [&](json& j) {
      j["coupling"]["harmonics"]["0"] = {g0, 0.0};
    });
    const SweepResult sweep = sweep_modulation_amplitude(cfg);
    int first_unstable = -1;
    for (size_t i = 0; i < sweep.stable.size(); ++i)
      if (!sweep.stable[i]) {
        first_unstable = static_cast<int>(i);
        break;
      }
    c.check(first_unstable >= 0, "g0=" + fmt(g0) + ": instability threshold " +
                                     (first_unstable >= 0
                                          ? "at g_Omega=" + fmt(sweep.axis[first_unstable])
                                          : "absent below g_Omega=1"));
    double worst = 0.0;
    double at = 0.0;
    const int n_stable = first_unstable >= 0 ? first_unstable
                                             : static_cast<int>(sweep.axis.size());
    for (int i = 0; i + 1 < n_stable; ++i) {
      if (!sweep.E_N_max[i] || !sweep.E_N_max[i + 1]) continue;
      const double drop = *sweep.E_N_max[i] - *sweep.E_N_max[i + 1];
      if (drop > worst) {
        worst = drop;
        at = sweep.axis[i + 1];
      }
    }
    c.check(worst <= kMonotonicityTol,
            "g0=" + fmt(g0) + ": max decrease " + fmt(worst) +
                (worst > kMonotonicityTol ? " at g_Omega=" + fmt(at) : "") +
                " (tol " + fmt(kMonotonicityTol) + ")");
  }
  return c;
}

// ---------------------------------------------------------------- criterion 3
Criterion criterion3() {
  Criterion c{3};
  for (const std::string name : {"fig3.json", "fig4.json"}) {
    const ExperimentConfig mod = config_with(name, nullptr);
    const ExperimentConfig unmod = config_with(name, [](json& j) {
      j["drive"]["harmonics"]["-1"] = {0.0, 0.0};
    });
    const TraceResult rm = run_time_trace(mod);
    const TraceResult ru = run_time_trace(unmod);
    c.check(rm.E_N_max > ru.E_N_max,
            name + ": modulated E_N_max " + fmt(rm.E_N_max) + " > unmodulated " +
                fmt(ru.E_N_max));
    c.check(rm.periodicity_residual <= kPeriodicityTol,
            name + ": steady-state E_N(t) tau-periodicity residual " +
                fmt(rm.periodicity_residual) + " (tol " + fmt(kPeriodicityTol) + ")");
  }
  return c;
}

// ---------------------------------------------------------------- criterion 4
Criterion criterion4() {
  Criterion c{4};
  for (const std::string name : {"fig3.json", "fig4.json"}) {
    const ExperimentConfig cfg = config_with(name, nullptr);
    LimitCycleOptions opt;
    opt.steps_per_period = cfg.numerics.classical_steps_per_period;
    opt.n_max = cfg.numerics.n_max;
    opt.tol = cfg.numerics.limit_cycle_tol;
    const LimitCycle cycle = find_limit_cycle(cfg.params, *cfg.drive, opt);
    const PerturbativeSolution sol =
        perturbative_coefficients(cfg.params, *cfg.drive, 3, 2);
    const double err = compare_with_numerical(sol, cycle);
    c.check(err <= kPerturbativeTol,
            name + ": perturbative vs numerical cycle max relative error " + fmt(err) +
                " (tol " + fmt(kPerturbativeTol) + ")");
  }
  return c;
}

// ---------------------------------------------------------------- criterion 5
Mat4 thermal(const SystemParams& p) {
  Eigen::Vector4d d;
  d << p.n_m + 0.5, p.n_m + 0.5, p.n_a + 0.5, p.n_a + 0.5;
  return d.asDiagonal();
}

Mat4 two_mode_squeezed(double r) {
  const double ch = 0.5 * std::cosh(2.0 * r);
  const double sh = 0.5 * std::sinh(2.0 * r);
  Mat4 V = Mat4::Zero();
  V(0, 0) = V(1, 1) = V(2, 2) = V(3, 3) = ch;
  V(0, 2) = V(2, 0) = sh;
  V(1, 3) = V(3, 1) = -sh;
  return V;
}

Criterion criterion5() {
  Criterion c{5};
  double worst_margin = 0.0;  // most negative physicality margin over accepted samples
  auto track = [&](const CovarianceSeries& s) {
    for (const Mat4& V : s.V) worst_margin = std::min(worst_margin, physicality_margin(V));
  };
  auto liouville = [&](const CouplingSchedule& sched, const SystemParams& p) {
    const MonodromyMatrix phi = monodromy(sched, p, 4096);
    return std::abs(phi.phi.determinant() -
                    std::exp(-(p.gamma_m + 2.0 * p.kappa) * sched.period()));
  };
  double worst_liouville = 0.0;

  // a) uncoupled limit lands on the local thermal state. The deviation is
  // measured relative to the thermal scale: the uncoupled mechanical block
  // contracts only by exp(-gamma_m tau) per period, so the fixed-point solve
  // amplifies machine roundoff by ~1/(gamma_m tau), which at n_m = 200 puts an
  // absolute 1e-8 below the double-precision floor of any one-period solver.
  for (const std::string name : {"fig4.json", "fig1.json"}) {
    const ExperimentConfig cfg = config_with(name, nullptr);
    EffectiveCouplingSpec zero;
    zero.Omega = 1.3;
    zero.delta_eff = 1.0;
    const CouplingSchedule sched = CouplingSchedule::prescribed(zero);
    const CovarianceSeries pss = periodic_steady_state(sched, cfg.params, 64, 4096);
    track(pss);
    worst_liouville = std::max(worst_liouville, liouville(sched, cfg.params));
    const Mat4 th = thermal(cfg.params);
    const double scale = std::max(1.0, th.lpNorm<Eigen::Infinity>());
    double dev = 0.0;
    for (const Mat4& V : pss.V)
      dev = std::max(dev, (V - th).lpNorm<Eigen::Infinity>() / scale);
    c.check(dev <= kOracleTolTight,
            name + ": uncoupled steady state relative deviation " + fmt(dev));
  }

  // b) constant coupling: fixed point vs algebraic solve, monodromy vs expm
  {
    const ExperimentConfig fig1 = config_with("fig1.json", nullptr);
    EffectiveCouplingSpec spec;
    spec.Omega = 2.0;
    spec.delta_eff = 1.0;
    spec.g_harmonics[0] = 0.4;
    const CouplingSchedule sched = CouplingSchedule::prescribed(spec);
    const Mat4 A = drift_matrix(0.4, 1.0, fig1.params);
    const Mat4 V_alg = steady_state_lyapunov(A, diffusion_matrix(fig1.params));
    const CovarianceSeries pss = periodic_steady_state(sched, fig1.params, 64, 4096);
    track(pss);
    double dev = 0.0;
    for (const Mat4& V : pss.V)
      dev = std::max(dev, (V - V_alg).lpNorm<Eigen::Infinity>());
    c.check(dev <= kOracleTolTight, "constant-coupling fixed point deviation " + fmt(dev));
    const Mat4 phi = monodromy(sched, fig1.params, 4096).phi;
    const double mdev = (phi - Mat4((A * sched.period()).exp())).lpNorm<Eigen::Infinity>();
    c.check(mdev <= kOracleTolTight, "monodromy vs matrix exponential deviation " + fmt(mdev));
    worst_liouville = std::max(worst_liouville, liouville(sched, fig1.params));
  }

  // c) fixed point vs long-time relaxation at the frequency-sweep parameter points
  {
    const ExperimentConfig fig1 = config_with("fig1.json", nullptr);
    double dev = 0.0;
    for (double g0 : kG0) {
      for (double Omega : {2.0 - g0, 2.0 + g0}) {
        EffectiveCouplingSpec spec = *fig1.coupling;
        spec.g_harmonics[0] = g0;
        spec.Omega = Omega;
        const CouplingSchedule sched = CouplingSchedule::prescribed(spec);
        const double tau = sched.period();
        const long steps = 4096;
        const long n_periods = std::lround(std::ceil(200.0 / fig1.params.kappa / tau));
        const CovarianceSeries relax =
            integrate_covariance(sched, fig1.params, thermal(fig1.params),
                                 n_periods * tau, tau / steps, steps / 64);
        const CovarianceSeries pss = periodic_steady_state(sched, fig1.params, 64, steps);
        track(relax);
        track(pss);
        worst_liouville = std::max(worst_liouville, liouville(sched, fig1.params));
        const size_t offset = relax.V.size() - 1 - 64;
        for (size_t i = 0; i < 64; ++i)
          dev = std::max(dev, (relax.V[offset + i] - pss.V[i]).lpNorm<Eigen::Infinity>());
      }
    }
    c.check(dev <= kOracleTolRelax,
            "fixed point vs relaxation, worst pointwise deviation " + fmt(dev));
  }

  // d) analytic log-negativity values
  {
    double dev = 0.0;
    for (double r : {0.25, 0.5, 1.0})
      dev = std::max(dev, std::abs(log_negativity(two_mode_squeezed(r)) - 2.0 * r));
    c.check(dev <= kLogNegTol, "two-mode squeezed E_N=2r deviation " + fmt(dev));
    bool zeros = log_negativity(0.5 * Mat4::Identity()) == 0.0;
    for (double nm : {0.5, 2.0, 200.0})
      for (double na : {0.0, 0.03, 1.0}) {
        SystemParams p;
        p.kappa = 1.0;
        p.n_m = nm;
        p.n_a = na;
        zeros = zeros && log_negativity(thermal(p)) == 0.0;
      }
    c.check(zeros, "vacuum and uncoupled thermal states give exactly 0");
  }

  // e) physicality of every accepted covariance sample above
  c.check(worst_margin >= kPhysicalityFloor,
          "worst physicality margin " + fmt(worst_margin));

  // f) Liouville identity over all tested schedules
  c.check(worst_liouville <= kOracleTolTight,
          "worst Liouville identity deviation " + fmt(worst_liouville));
  return c;
}

// ---------------------------------------------------------------- criterion 6
Criterion criterion6() {
  Criterion c{6};
  auto sweep_run = [&](int threads) {
    ExperimentConfig cfg = config_with("fig1.json", nullptr);
    cfg.numerics.threads = threads;
    return sweep_csv(cfg, sweep_modulation_frequency(cfg));
  };
  const std::string s1 = sweep_run(0);
  const std::string s2 = sweep_run(0);
  const std::string s3 = sweep_run(1);
  c.check(s1 == s2, "frequency sweep rerun is byte-identical");
  c.check(s1 == s3, "frequency sweep independent of thread count");

  auto trace_run = [&] {
    const ExperimentConfig cfg = config_with("fig3.json", nullptr);
    return trace_csv(cfg, run_time_trace(cfg));
  };
  c.check(trace_run() == trace_run(), "time-trace rerun is byte-identical");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <configs-dir>\n";
    return 64;
  }
  g_configs_dir = argv[1];

  int failures = 0;
  for (auto* fn : {criterion1, criterion2, criterion3, criterion4, criterion5, criterion6}) {
    try {
      const Criterion c = fn();
      c.report();
      if (!c.pass) ++failures;
    } catch (const std::exception& e) {
      std::printf("criterion ?: FAIL (exception: %s)\n", e.what());
      ++failures;
    }
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
