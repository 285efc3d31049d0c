#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "omod/errors.hpp"
#include "omod/experiments.hpp"

namespace {

using nlohmann::json;

// Applies --set key=value overrides with dotted paths into the raw JSON.
json load_config_json(const std::string& path, const std::vector<std::string>& sets) {
  std::ifstream in(path);
  if (!in) throw omod::ConfigError("cannot open config file: " + path);
  json j = json::parse(in, nullptr, true);
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw omod::ConfigError("--set expects key=value, got: " + kv);
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;  // bare strings are allowed
    }
    json* node = &j;
    size_t pos = 0;
    while (true) {
      const size_t dot = key.find('.', pos);
      const std::string part = key.substr(pos, dot - pos);
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      pos = dot + 1;
    }
  }
  return j;
}

omod::ExperimentConfig make_config(const std::string& path,
                                   const std::vector<std::string>& sets,
                                   const std::string& output_override) {
  omod::ExperimentConfig config =
      omod::ExperimentConfig::from_json_text(load_config_json(path, sets).dump());
  if (!output_override.empty()) config.output_path = output_override;
  return config;
}

void emit(const omod::ExperimentConfig& config, const std::string& csv) {
  if (config.output_path.empty())
    std::cout << csv;
  else
    omod::write_file(config.output_path, csv);
}

int sweep_exit_code(const omod::SweepResult& result, bool instability_expected) {
  if (instability_expected) return 0;  // amplitude threshold is a result, not a failure
  for (bool s : result.stable)
    if (!s) return 2;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modulated optomechanics simulator: limit cycles, Floquet stability, "
               "covariance dynamics and logarithmic negativity"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, output_path;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--set", sets, "override config values, dotted key=value");
  app.add_option("--output", output_path, "output CSV path (default from config, else stdout)");

  auto* trace = app.add_subcommand("trace", "time trace of E_N and the effective coupling");
  auto* sweep_omega = app.add_subcommand("sweep-omega", "max E_N vs modulation frequency");
  auto* sweep_amp = app.add_subcommand("sweep-amplitude", "max E_N vs modulation amplitude");
  auto* limit_cycle = app.add_subcommand("limit-cycle", "classical limit cycle Fourier coefficients");
  auto* stability = app.add_subcommand("stability", "Floquet monodromy spectral radius");

  CLI11_PARSE(app, argc, argv);

  omod::ExperimentConfig config;
  try {
    config = make_config(config_path, sets, output_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (trace->parsed()) {
      emit(config, omod::trace_csv(config, omod::run_time_trace(config)));
    } else if (sweep_omega->parsed()) {
      const omod::SweepResult result = omod::sweep_modulation_frequency(config);
      emit(config, omod::sweep_csv(config, result));
      return sweep_exit_code(result, false);
    } else if (sweep_amp->parsed()) {
      const omod::SweepResult result = omod::sweep_modulation_amplitude(config);
      emit(config, omod::sweep_csv(config, result));
      return sweep_exit_code(result, true);
    } else if (limit_cycle->parsed()) {
      if (!config.drive) throw omod::ConfigError("limit-cycle requires physical-drive mode");
      omod::LimitCycleOptions opt;
      opt.steps_per_period = config.numerics.classical_steps_per_period;
      opt.n_max = config.numerics.n_max;
      opt.tol = config.numerics.limit_cycle_tol;
      opt.t_relax = config.numerics.t_relax;
      const omod::LimitCycle cycle = omod::find_limit_cycle(config.params, *config.drive, opt);
      const omod::PerturbativeSolution sol = omod::perturbative_coefficients(
          config.params, *config.drive, config.numerics.j_max, config.numerics.pert_n_max);
      std::ostringstream out;
      out << "# omod limit-cycle\n";
      out << "# config-digest: " << config.digest << "\n";
      out << "# units: omega_m\n";
      out << "# residual: " << cycle.residual << "\n";
      out << "# perturbative_max_rel_error: " << omod::compare_with_numerical(sol, cycle) << "\n";
      out << "n,q_re,q_im,p_re,p_im,a_re,a_im\n";
      for (int n = -cycle.n_max; n <= cycle.n_max; ++n)
        out << n << ',' << cycle.q_coeff(n).real() << ',' << cycle.q_coeff(n).imag() << ','
            << cycle.p_coeff(n).real() << ',' << cycle.p_coeff(n).imag() << ','
            << cycle.a_coeff(n).real() << ',' << cycle.a_coeff(n).imag() << "\n";
      emit(config, out.str());
    } else if (stability->parsed()) {
      const omod::CouplingSchedule schedule = omod::build_schedule(config);
      const omod::MonodromyMatrix phi = omod::monodromy(
          schedule, config.params, config.numerics.covariance_steps_per_period);
      const omod::StabilityResult stab = omod::is_stable(phi);
      std::ostringstream out;
      out << "# omod stability\n";
      out << "# config-digest: " << config.digest << "\n";
      out << "spectral_radius,stable,margin\n";
      out << phi.spectral_radius << ',' << (stab.stable ? 1 : 0) << ',' << stab.margin << "\n";
      emit(config, out.str());
    }
  } catch (const omod::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
