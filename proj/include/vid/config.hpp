#ifndef VID_CONFIG_HPP
#define VID_CONFIG_HPP

#include <optional>
#include <string>

#include "vid/decay.hpp"
#include "vid/energy.hpp"

namespace vid {

/// Named initial profiles evaluated at the mesh nodes. All vanish at x = 0.
///  zero          0
///  quarter_sine  amplitude * sin(pi x / (2 L))        (fixed-free mode 1)
///  sine_mode     amplitude * sin((2k-1) pi x / (2 L)) (fixed-free mode k)
///  parabola      amplitude * x (2L - x) / L^2
///  ramp          amplitude * x / L
///  mode_mix      amplitude * (sin(pi x/(2L)) + mix * sin(3 pi x/(2L)))
struct ProfileSpec {
  std::string type = "zero";
  double amplitude = 1.0;
  int mode = 1;
  double mix = 0.3;
};

Eigen::VectorXd build_profile(const ProfileSpec& p, const Mesh1D& mesh);

/// Parsed, validated scenario. Exactly one of `kernel`/`model` is set in the
/// source document; `material()` resolves either into a MaterialField1D.
struct ScenarioConfig {
  int schema = 1;
  Mesh1D mesh;
  double rho = 1.0;
  std::optional<double> modulus;       ///< C (with `kernel`)
  std::optional<KernelSpec> kernel;    ///< explicit kernel
  std::optional<ExtendedSpec> model;   ///< spring-dashpot derivation
  SimConfig sim;
  MonitorMode monitor_mode = MonitorMode::exponential;
  std::optional<MonitorParams> monitor_overrides;
  ProfileSpec f1, f2;
  std::string trace_path;
  std::string snapshot_path;
  std::optional<std::string> fit_column;  ///< summary fit after simulate
  DecayModel fit_model = DecayModel::exponential;

  MaterialField1D material() const;
  InitialData initial() const;
  MonitorParams monitor_params(const MaterialField1D& mat) const;
  std::string kernel_id() const;
};

/// Parses and validates a config document; error messages carry `origin`
/// (normally the file path). Throws ConfigError.
ScenarioConfig parse_config(const std::string& json_text,
                            const std::string& origin);
ScenarioConfig load_config(const std::string& path);

/// Canonical re-serialization of a parsed config; parsing it again yields an
/// equivalent config. Also the input of the config hash.
std::string normalized_config(const ScenarioConfig& cfg);
std::string config_hash(const ScenarioConfig& cfg);

}  // namespace vid

#endif
