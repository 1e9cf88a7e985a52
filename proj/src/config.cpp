#include "vid/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace vid {

using nlohmann::json;

Eigen::VectorXd build_profile(const ProfileSpec& p, const Mesh1D& mesh) {
  const double pi = std::numbers::pi;
  const double L = mesh.length;
  Eigen::VectorXd u(mesh.nodes());
  for (int i = 0; i < mesh.nodes(); ++i) {
    const double x = mesh.node_x(i);
    double v = 0;
    if (p.type == "zero") {
      v = 0;
    } else if (p.type == "quarter_sine") {
      v = std::sin(pi * x / (2.0 * L));
    } else if (p.type == "sine_mode") {
      v = std::sin((2.0 * p.mode - 1.0) * pi * x / (2.0 * L));
    } else if (p.type == "parabola") {
      v = x * (2.0 * L - x) / (L * L);
    } else if (p.type == "ramp") {
      v = x / L;
    } else if (p.type == "mode_mix") {
      v = std::sin(pi * x / (2.0 * L)) + p.mix * std::sin(3.0 * pi * x / (2.0 * L));
    } else {
      throw ConfigError("unknown initial profile type '" + p.type + "'");
    }
    u[i] = p.amplitude * v;
  }
  return u;
}

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw ConfigError(origin + ": " + what);
}

double get_num(const json& j, const std::string& key, const std::string& origin,
               std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(origin, "missing numeric field '" + key + "'");
  }
  if (!j[key].is_number()) fail(origin, "field '" + key + "' must be a number");
  return j[key].get<double>();
}

KernelSpec parse_kernel(const json& j, const std::string& origin) {
  const std::string type = j.value("type", "");
  if (type == "none") return PronyKernel{};
  if (type == "prony") {
    PronyKernel k;
    if (!j.contains("terms") || !j["terms"].is_array())
      fail(origin, "prony kernel needs a 'terms' array");
    for (const json& term : j["terms"]) {
      const double amp = get_num(term, "amplitude", origin);
      const double rate = get_num(term, "rate", origin);
      k.terms.push_back({VoigtTensor::scalar(amp), rate});
    }
    return k;
  }
  if (type == "polynomial") {
    PolynomialKernel k;
    k.scale = get_num(j, "scale", origin, 1.0);
    k.a = get_num(j, "a", origin);
    k.p = get_num(j, "p", origin);
    k.amplitude = VoigtTensor::scalar(get_num(j, "amplitude", origin, 1.0));
    return k;
  }
  fail(origin, "kernel type must be 'none', 'prony' or 'polynomial'");
}

UnitSpec parse_unit(const json& j, const std::string& origin) {
  const std::string type = j.value("type", "");
  if (type == "maxwell")
    return MaxwellSpec{get_num(j, "Cs", origin), get_num(j, "eta", origin)};
  if (type == "sls")
    return SlsSpec{get_num(j, "C1", origin), get_num(j, "C2", origin),
                   get_num(j, "eta2", origin)};
  if (type == "burgers")
    return BurgersSpec{get_num(j, "c1", origin), get_num(j, "c2", origin),
                       get_num(j, "eta2", origin), get_num(j, "eta3", origin)};
  fail(origin, "spring-dashpot unit type must be 'maxwell', 'sls' or 'burgers'");
}

ExtendedSpec parse_model(const json& j, const std::string& origin) {
  ExtendedSpec spec;
  spec.equilibrium_spring = get_num(j, "C0", origin, 0.0);
  const std::string type = j.value("type", "");
  if (type == "extended") {
    if (!j.contains("units") || !j["units"].is_array())
      fail(origin, "extended model needs a 'units' array");
    for (const json& u : j["units"]) spec.units.push_back(parse_unit(u, origin));
  } else {
    spec.units.push_back(parse_unit(j, origin));
  }
  return spec;
}

ProfileSpec parse_profile(const json& j, const std::string& origin) {
  ProfileSpec p;
  if (j.is_null()) return p;
  if (j.is_string()) {
    p.type = j.get<std::string>();
    return p;
  }
  p.type = j.value("type", "zero");
  p.amplitude = get_num(j, "amplitude", origin, 1.0);
  p.mode = static_cast<int>(get_num(j, "mode", origin, 1.0));
  p.mix = get_num(j, "mix", origin, 0.3);
  return p;
}

json profile_json(const ProfileSpec& p) {
  json j;
  j["type"] = p.type;
  j["amplitude"] = p.amplitude;
  if (p.type == "sine_mode") j["mode"] = p.mode;
  if (p.type == "mode_mix") j["mix"] = p.mix;
  return j;
}

json kernel_json(const KernelSpec& k) {
  json j;
  if (const auto* pk = std::get_if<PronyKernel>(&k)) {
    if (pk->terms.empty()) {
      j["type"] = "none";
      return j;
    }
    j["type"] = "prony";
    j["terms"] = json::array();
    for (const auto& term : pk->terms)
      j["terms"].push_back(
          {{"amplitude", term.amplitude.value()}, {"rate", term.rate}});
    return j;
  }
  const auto& q = std::get<PolynomialKernel>(k);
  j["type"] = "polynomial";
  j["scale"] = q.scale;
  j["a"] = q.a;
  j["p"] = q.p;
  j["amplitude"] = q.amplitude.value();
  return j;
}

json unit_json(const UnitSpec& u) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MaxwellSpec>)
          return {{"type", "maxwell"}, {"Cs", s.spring}, {"eta", s.viscosity}};
        else if constexpr (std::is_same_v<T, SlsSpec>)
          return {{"type", "sls"},
                  {"C1", s.spring_parallel},
                  {"C2", s.spring_series},
                  {"eta2", s.viscosity}};
        else
          return {{"type", "burgers"},
                  {"c1", s.spring1},
                  {"c2", s.spring2},
                  {"eta2", s.viscosity2},
                  {"eta3", s.viscosity3}};
      },
      u);
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text,
                            const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(origin, std::string("not valid JSON (") + e.what() + ")");
  }
  ScenarioConfig cfg;
  cfg.schema = static_cast<int>(get_num(doc, "schema", origin, 1.0));
  if (cfg.schema != 1) fail(origin, "unsupported schema version");

  if (!doc.contains("mesh")) fail(origin, "missing 'mesh' section");
  cfg.mesh.length = get_num(doc["mesh"], "L", origin);
  cfg.mesh.cells = static_cast<int>(get_num(doc["mesh"], "N", origin));

  if (!doc.contains("material")) fail(origin, "missing 'material' section");
  const json& mj = doc["material"];
  cfg.rho = get_num(mj, "rho", origin, 1.0);
  const bool has_kernel = mj.contains("kernel");
  const bool has_model = mj.contains("model");
  if (has_kernel == has_model)
    fail(origin, "material needs exactly one of 'kernel' or 'model'");
  if (has_kernel) {
    cfg.modulus = get_num(mj, "C", origin);
    cfg.kernel = parse_kernel(mj["kernel"], origin);
  } else {
    if (mj.contains("C"))
      fail(origin, "a spring-dashpot model fixes C; drop the explicit value");
    cfg.model = parse_model(mj["model"], origin);
  }

  if (!doc.contains("sim")) fail(origin, "missing 'sim' section");
  const json& sj = doc["sim"];
  cfg.sim.dt = get_num(sj, "dt", origin, 0.0);
  cfg.sim.cfl = get_num(sj, "cfl", origin, 0.9);
  cfg.sim.t_end = get_num(sj, "T_end", origin);
  cfg.sim.boundary_damping = get_num(sj, "s", origin, 0.0);
  const std::string backend = sj.value("backend", "prony");
  if (backend == "prony")
    cfg.sim.backend = MemoryBackend::prony;
  else if (backend == "dense")
    cfg.sim.backend = MemoryBackend::dense;
  else
    fail(origin, "backend must be 'prony' or 'dense'");
  cfg.sim.stride = static_cast<int>(get_num(sj, "stride", origin, 10.0));
  if (sj.contains("probes"))
    for (const json& p : sj["probes"])
      cfg.sim.probes.push_back(p.get<int>());

  if (doc.contains("monitor")) {
    const json& mo = doc["monitor"];
    const std::string mode = mo.value("mode", "exponential");
    if (mode == "polynomial")
      cfg.monitor_mode = MonitorMode::polynomial;
    else if (mode == "exponential")
      cfg.monitor_mode = MonitorMode::exponential;
    else
      fail(origin, "monitor mode must be 'polynomial' or 'exponential'");
    if (mo.contains("overrides")) {
      const json& ov = mo["overrides"];
      MonitorParams mp;
      mp.mode = cfg.monitor_mode;
      mp.gamma = get_num(ov, "gamma", origin, 0.0);
      mp.theta = get_num(ov, "theta", origin, 0.0);
      mp.omega = get_num(ov, "omega", origin, 0.0);
      mp.n1 = get_num(ov, "N1", origin, 16.0);
      mp.n3 = get_num(ov, "N3", origin, 16.0);
      mp.delta = get_num(ov, "delta", origin, 0.0);
      mp.c_delta = get_num(ov, "c_delta", origin, 0.0);
      mp.p = get_num(ov, "p", origin, 0.0);
      mp.kappa4_tilde = get_num(ov, "kappa4_tilde", origin, 0.0);
      mp.auto_tune = ov.value("auto_tune", false);
      cfg.monitor_overrides = mp;
    }
  }

  if (doc.contains("initial")) {
    const json& ij = doc["initial"];
    if (ij.contains("f1")) cfg.f1 = parse_profile(ij["f1"], origin);
    if (ij.contains("f2")) cfg.f2 = parse_profile(ij["f2"], origin);
  }

  if (doc.contains("outputs")) {
    const json& oj = doc["outputs"];
    cfg.trace_path = oj.value("trace", "");
    cfg.snapshot_path = oj.value("snapshots", "");
    cfg.sim.snapshot_stride =
        static_cast<int>(get_num(oj, "snapshot_stride", origin, 0.0));
    if (oj.contains("fit_column")) {
      cfg.fit_column = oj["fit_column"].get<std::string>();
      const std::string fm = oj.value("fit_model", "exp");
      cfg.fit_model = fm == "power" ? DecayModel::power : DecayModel::exponential;
    }
  }

  // Validate eagerly so simulate fails before any allocation work.
  cfg.mesh.check_valid();
  const MaterialField1D mat = cfg.material();
  mat.check_valid(cfg.mesh);
  if (cfg.sim.backend == MemoryBackend::prony &&
      std::holds_alternative<PolynomialKernel>(mat.kernel))
    fail(origin,
         "the recursive backend requires a Prony kernel; set backend=dense");
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

MaterialField1D ScenarioConfig::material() const {
  if (model) {
    const DerivedModel dm = extend(*model);
    return MaterialField1D::uniform(mesh, dm.instantaneous.value(),
                                    KernelSpec{dm.kernel}, rho);
  }
  return MaterialField1D::uniform(mesh, *modulus, *kernel, rho);
}

InitialData ScenarioConfig::initial() const {
  return {build_profile(f1, mesh), build_profile(f2, mesh)};
}

MonitorParams ScenarioConfig::monitor_params(const MaterialField1D& mat) const {
  MonitorParams mp = default_monitor_params(mesh, mat, monitor_mode);
  if (monitor_overrides) {
    const MonitorParams& ov = *monitor_overrides;
    if (ov.gamma > 0) mp.gamma = ov.gamma;
    if (ov.theta > 0) mp.theta = ov.theta;
    if (ov.omega > 0) mp.omega = ov.omega;
    if (ov.delta > 0) mp.delta = ov.delta;
    if (ov.c_delta > 0) mp.c_delta = ov.c_delta;
    if (ov.p > 0) mp.p = ov.p;
    if (ov.kappa4_tilde > 0) mp.kappa4_tilde = ov.kappa4_tilde;
    mp.n1 = ov.n1;
    mp.n3 = ov.n3;
    mp.auto_tune = ov.auto_tune;
  }
  return mp;
}

std::string ScenarioConfig::kernel_id() const {
  if (model) {
    std::string id = "model";
    for (const UnitSpec& u : model->units) id += ":" + unit_json(u)["type"].get<std::string>();
    return id;
  }
  return kernel_json(*kernel)["type"].get<std::string>();
}

std::string normalized_config(const ScenarioConfig& cfg) {
  json doc;
  doc["schema"] = cfg.schema;
  doc["mesh"] = {{"L", cfg.mesh.length}, {"N", cfg.mesh.cells}};
  json mj;
  mj["rho"] = cfg.rho;
  if (cfg.model) {
    json model;
    model["type"] = "extended";
    model["C0"] = cfg.model->equilibrium_spring;
    model["units"] = json::array();
    for (const UnitSpec& u : cfg.model->units) model["units"].push_back(unit_json(u));
    mj["model"] = model;
  } else {
    mj["C"] = *cfg.modulus;
    mj["kernel"] = kernel_json(*cfg.kernel);
  }
  doc["material"] = mj;
  doc["sim"] = {{"dt", cfg.sim.dt},
                {"cfl", cfg.sim.cfl},
                {"T_end", cfg.sim.t_end},
                {"s", cfg.sim.boundary_damping},
                {"backend",
                 cfg.sim.backend == MemoryBackend::prony ? "prony" : "dense"},
                {"stride", cfg.sim.stride},
                {"probes", cfg.sim.probes}};
  doc["monitor"] = {
      {"mode", cfg.monitor_mode == MonitorMode::polynomial ? "polynomial"
                                                           : "exponential"}};
  doc["initial"] = {{"f1", profile_json(cfg.f1)}, {"f2", profile_json(cfg.f2)}};
  doc["outputs"] = {{"trace", cfg.trace_path},
                    {"snapshots", cfg.snapshot_path},
                    {"snapshot_stride", cfg.sim.snapshot_stride}};
  if (cfg.fit_column) {
    doc["outputs"]["fit_column"] = *cfg.fit_column;
    doc["outputs"]["fit_model"] =
        cfg.fit_model == DecayModel::power ? "power" : "exp";
  }
  return doc.dump(2);
}

std::string config_hash(const ScenarioConfig& cfg) {
  const std::string text = normalized_config(cfg);
  // FNV-1a, 64 bit.
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace vid
