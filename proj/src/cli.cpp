#include "vid/cli.hpp"

#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "vid/config.hpp"
#include "vid/csv.hpp"
#include "vid/decay.hpp"

namespace vid {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCertification = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

void print_model(std::ostream& out, const DerivedModel& m) {
  const double c_inst = m.instantaneous.value();
  const double c_eq =
      equilibrium_tensor(m.instantaneous, KernelSpec{m.kernel}).value();
  out << "# C_inst=" << format_double(c_inst) << " C_eq=" << format_double(c_eq)
      << "\n";
  out << "amplitude,rate\n";
  for (const auto& term : m.kernel.terms)
    out << format_double(term.amplitude.value()) << ","
        << format_double(term.rate) << "\n";
}

int cmd_simulate(const std::string& path, std::ostream& out, std::ostream& err) {
  const ScenarioConfig cfg = load_config(path);
  const MaterialField1D mat = cfg.material();
  if (!mat.unit_density())
    err << "warning: rho != 1, the monitored functionals assume unit density\n";

  MonitorParams params = cfg.monitor_params(mat);
  RunResult result = [&] {
    try {
      return run_simulation(cfg.mesh, mat, cfg.sim, cfg.initial(), params);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError(path + ": " + e.what());
    }
  }();
  result.trace.kernel_id = cfg.kernel_id();
  result.trace.config_hash = config_hash(cfg);

  if (!cfg.trace_path.empty())
    write_trace_csv(cfg.trace_path, result.trace, cfg.sim.probes);
  if (!cfg.snapshot_path.empty() && !result.snapshots.empty())
    write_snapshots_csv(cfg.snapshot_path, result.snapshots, cfg.mesh);

  const EnergySample& last = result.trace.samples.back();
  out << "config_hash=" << result.trace.config_hash
      << " samples=" << result.trace.samples.size()
      << " N1=" << result.trace.params.n1 << " N3=" << result.trace.params.n3
      << "\n";
  out << "final t=" << format_double(last.t) << " E=" << format_double(last.E)
      << "\n";

  if (cfg.fit_column) {
    const std::vector<double> t = result.trace.column("t");
    const std::vector<double> y = result.trace.column(*cfg.fit_column);
    const DecayFit fit = fit_decay(t, y, cfg.fit_model);
    out << "fit column=" << *cfg.fit_column
        << (fit.model == DecayModel::power
                ? " exponent=" + format_double(fit.exponent)
                : " rate=" + format_double(fit.rate))
        << " r2=" << format_double(fit.r_squared) << "\n";
  }
  return kExitOk;
}

int cmd_derive_kernel(const std::string& variant,
                      const std::vector<double>& params, std::ostream& out) {
  auto need = [&](size_t n) {
    if (params.size() != n)
      throw ConfigError("derive-kernel " + variant + " expects " +
                        std::to_string(n) + " parameters");
  };
  DerivedModel m;
  if (variant == "maxwell") {
    need(2);
    m = derive_maxwell(params[0], params[1]);
    out << "# maxwell Cs=" << format_double(params[0])
        << " eta=" << format_double(params[1]) << "\n";
  } else if (variant == "sls") {
    need(3);
    m = derive_sls(params[0], params[1], params[2]);
    out << "# sls C1=" << format_double(params[0])
        << " C2=" << format_double(params[1])
        << " eta2=" << format_double(params[2]) << "\n";
  } else if (variant == "burgers") {
    need(4);
    const BurgersConstants bc =
        burgers_constants(params[0], params[1], params[2], params[3]);
    m = derive_burgers(params[0], params[1], params[2], params[3]);
    out << "# burgers r1=" << format_double(bc.r1)
        << " r2=" << format_double(bc.r2) << " b1=" << format_double(bc.b1)
        << " b2=" << format_double(bc.b2) << "\n";
  } else {
    throw ConfigError("derive-kernel variant must be maxwell, sls or burgers");
  }
  print_model(out, m);
  return kExitOk;
}

int cmd_validate_kernel(const std::string& path, std::ostream& out) {
  const ScenarioConfig cfg = load_config(path);
  const MaterialField1D mat = cfg.material();
  const VoigtTensor c = VoigtTensor::scalar(mat.modulus.minCoeff());

  AssumptionReport rep;
  if (const auto* pk = std::get_if<PronyKernel>(&mat.kernel))
    rep = validate_exponential(c, *pk);
  else
    rep = validate_polynomial(c, std::get<PolynomialKernel>(mat.kernel));

  out << "satisfied=" << (rep.satisfied ? "true" : "false")
      << " kappa1=" << format_double(rep.kappa1)
      << " kappa2=" << format_double(rep.kappa2)
      << " kappa3=" << format_double(rep.kappa3)
      << " kappa4=" << format_double(rep.kappa4);
  if (rep.kappa4_tilde > 0)
    out << " kappa4_tilde=" << format_double(rep.kappa4_tilde);
  if (rep.p > 0) out << " p=" << format_double(rep.p);
  out << " mu0=" << format_double(rep.equilibrium.alpha0)
      << " nu0=" << format_double(rep.equilibrium.beta0);
  if (rep.empty_kernel) out << " empty_kernel=true";
  if (rep.envelope_only) out << " envelope_only=true";
  if (rep.witness_t >= 0) out << " witness_t=" << format_double(rep.witness_t);
  out << "\n";
  return rep.satisfied ? kExitOk : kExitCertification;
}

int cmd_fit_decay(const std::string& path, const std::string& column,
                  const std::string& model, double window_lo, double window_hi,
                  std::ostream& out) {
  const CsvTable table = read_csv(path);
  DecayModel dm;
  if (model == "power")
    dm = DecayModel::power;
  else if (model == "exp")
    dm = DecayModel::exponential;
  else
    throw ConfigError("fit model must be 'power' or 'exp'");
  const DecayFit fit = fit_decay(table.column("t"), table.column(column), dm,
                                 window_lo, window_hi);
  out << "column,model,value,intercept,r_squared,t_lo,t_hi,n_used,n_trimmed\n";
  out << column << "," << model << ","
      << format_double(dm == DecayModel::power ? fit.exponent : fit.rate) << ","
      << format_double(fit.intercept) << "," << format_double(fit.r_squared)
      << "," << format_double(fit.t_lo) << "," << format_double(fit.t_hi) << ","
      << fit.n_used << "," << fit.n_trimmed << "\n";
  return kExitOk;
}

int cmd_check_lemma(double y0, double m2, double m3, double q,
                    std::ostream& out, std::ostream& err) {
  PolyBoundParams p{y0, m2, m3, q};
  if (q <= 2)
    err << "note: the source statement assumes q > 2; the envelope is still "
           "well defined for q >= 1\n";
  const double dt = 1e-3 * std::max(1.0, 1.0 / m2);
  const LemmaReport rep = verify_lemma_bound(p, 50.0, dt);
  out << "y0=" << format_double(y0) << " M2=" << format_double(m2)
      << " M3=" << format_double(m3) << " q=" << format_double(q)
      << " worst_margin=" << format_double(rep.worst_margin)
      << " worst_t=" << format_double(rep.worst_t)
      << (rep.degenerate_forcing ? " degenerate_forcing=true" : "") << " "
      << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep.pass ? kExitOk : kExitCertification;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"1D viscoelastic wave laboratory"};
  app.require_subcommand(1);

  std::string cfg_path;
  CLI::App* simulate = app.add_subcommand("simulate", "run a scenario config");
  simulate->add_option("config", cfg_path, "scenario JSON file")->required();

  std::string variant;
  std::vector<double> model_params;
  CLI::App* derive =
      app.add_subcommand("derive-kernel", "derive a spring-dashpot kernel");
  derive->add_option("variant", variant, "maxwell|sls|burgers")->required();
  derive->add_option("params", model_params, "model constants")->required();

  std::string validate_path;
  CLI::App* validate =
      app.add_subcommand("validate-kernel", "certify a scenario's kernel");
  validate->add_option("config", validate_path, "scenario JSON file")->required();

  std::string trace_path, column, fit_model;
  std::vector<double> window;
  CLI::App* fit = app.add_subcommand("fit-decay", "fit a decay law to a trace column");
  fit->add_option("trace", trace_path, "trace CSV file")->required();
  fit->add_option("column", column, "column name")->required();
  fit->add_option("model", fit_model, "power|exp")->required();
  fit->add_option("--window", window, "fit window t0 t1")->expected(2);

  std::vector<double> lemma_params;
  CLI::App* lemma =
      app.add_subcommand("check-lemma", "verify the comparison bound");
  lemma->add_option("params", lemma_params, "y0 M2 M3 q")->expected(4)->required();

  try {
    std::vector<const char*> argv;
    argv.push_back("vidlab");
    for (const std::string& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());

    if (simulate->parsed()) return cmd_simulate(cfg_path, out, err);
    if (derive->parsed()) return cmd_derive_kernel(variant, model_params, out);
    if (validate->parsed()) return cmd_validate_kernel(validate_path, out);
    if (fit->parsed())
      return cmd_fit_decay(trace_path, column, fit_model,
                           window.size() == 2 ? window[0] : -1,
                           window.size() == 2 ? window[1] : -1, out);
    if (lemma->parsed())
      return cmd_check_lemma(lemma_params[0], lemma_params[1], lemma_params[2],
                             lemma_params[3], out, err);
    err << "no subcommand given\n";
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help / --version exit through here.
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace vid
