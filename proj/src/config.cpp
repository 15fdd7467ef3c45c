#include "pgal/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace pgal {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(Errc::ConfigError, msg); }

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail("unknown key '" + where + "." + k + "'");
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where + " must be finite");
  return v;
}

double positive(const json& j, const std::string& where) {
  const double v = number(j, where);
  if (!(v > 0.0)) fail(where + " must be positive");
  return v;
}

long integer(const json& j, const std::string& where, long lo) {
  if (!j.is_number_integer()) fail(where + " must be an integer");
  const long v = j.get<long>();
  if (v < lo) fail(where + " must be at least " + std::to_string(lo));
  return v;
}

std::string string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where + " must be a string");
  return j.get<std::string>();
}

bool boolean(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where + " must be a boolean");
  return j.get<bool>();
}

std::uint64_t seed_value(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    fail(where + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

template <class F>
void optional_key(const json& j, const char* key, F f) {
  if (j.contains(key)) f(j.at(key));
}

void parse_manifold(const json& j, ManifoldConfig& m) {
  allow_keys(j, "manifold", {"kind", "resolution"});
  m.kind = string(j.at("kind"), "manifold.kind");
  manifold_kind_from_string(m.kind);
  optional_key(j, "resolution", [&](const json& r) {
    if (!r.is_array() || r.empty() || r.size() > 2) fail("manifold.resolution must be an array of 1 or 2 integers");
    m.resolution[0] = int(integer(r[0], "manifold.resolution[0]", 1));
    m.resolution[1] = r.size() > 1 ? int(integer(r[1], "manifold.resolution[1]", 1)) : 1;
  });
  if (m.kind == "torus1") m.resolution[1] = 1;
}

void parse_model(const json& j, ModelConfig& m) {
  allow_keys(j, "model", {"name", "parameters", "lambda_range", "truncate", "density"});
  m.name = string(j.at("name"), "model.name");
  optional_key(j, "parameters", [&](const json& p) {
    if (!p.is_object()) fail("model.parameters must be an object");
    for (const auto& [k, v] : p.items()) m.parameters[k] = number(v, "model.parameters." + k);
  });
  optional_key(j, "lambda_range", [&](const json& r) {
    if (!r.is_array() || r.size() != 2) fail("model.lambda_range must be [lo, hi]");
    LambdaRange lr{number(r[0], "model.lambda_range[0]"), number(r[1], "model.lambda_range[1]")};
    if (!(lr.lo < lr.hi)) fail("model.lambda_range must satisfy lo < hi");
    m.lambda_range = lr;
  });
  optional_key(j, "truncate", [&](const json& v) { m.truncate = boolean(v, "model.truncate"); });
  optional_key(j, "density", [&](const json& v) { m.density = string(v, "model.density"); });
  if (m.name == "standard_form" && m.density.empty()) fail("model.density is required for standard_form");
  if (m.name != "standard_form" && !m.density.empty()) fail("model.density applies only to standard_form");
}

void parse_initial(const json& j, InitialConfig& c) {
  allow_keys(j, "initial", {"type", "data"});
  c.type = string(j.at("type"), "initial.type");
  const json& d = j.at("data");
  if (c.type == "modes") {
    if (!d.is_array()) fail("initial.data must be an array of {mode, value}");
    for (const auto& e : d) {
      allow_keys(e, "initial.data[]", {"mode", "value"});
      c.modes.push_back({int(integer(e.at("mode"), "initial.data[].mode", 0)), number(e.at("value"), "initial.data[].value")});
    }
  } else if (c.type == "function_preset") {
    allow_keys(d, "initial.data", {"name", "amplitude", "offset"});
    c.preset = string(d.at("name"), "initial.data.name");
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), c.preset) == names.end())
      fail("unknown preset '" + c.preset + "'");
    optional_key(d, "amplitude", [&](const json& v) { c.amplitude = number(v, "initial.data.amplitude"); });
    optional_key(d, "offset", [&](const json& v) { c.offset = number(v, "initial.data.offset"); });
  } else {
    fail("initial.type must be 'modes' or 'function_preset'");
  }
}

void parse_solver(const json& j, SolverSection& s) {
  allow_keys(j, "solver", {"n", "dt", "T", "scheme", "epsilon", "output_stride", "energy_tolerance"});
  s.n = int(integer(j.at("n"), "solver.n", 1));
  s.dt = positive(j.at("dt"), "solver.dt");
  s.T = positive(j.at("T"), "solver.T");
  optional_key(j, "scheme", [&](const json& v) {
    s.scheme = string(v, "solver.scheme");
    scheme_from_string(s.scheme);
  });
  optional_key(j, "epsilon", [&](const json& v) {
    s.epsilon = number(v, "solver.epsilon");
    if (s.epsilon < 0.0) fail("solver.epsilon must be non-negative");
  });
  optional_key(j, "output_stride", [&](const json& v) { s.output_stride = int(integer(v, "solver.output_stride", 1)); });
  optional_key(j, "energy_tolerance",
               [&](const json& v) { s.energy_tolerance = positive(v, "solver.energy_tolerance"); });
}

void parse_stochastic(const json& j, StochasticConfig& s) {
  allow_keys(j, "stochastic", {"enabled", "M", "seed", "phi_name", "sigma", "lags"});
  optional_key(j, "enabled", [&](const json& v) { s.enabled = boolean(v, "stochastic.enabled"); });
  optional_key(j, "M", [&](const json& v) { s.M = integer(v, "stochastic.M", 1); });
  optional_key(j, "seed", [&](const json& v) { s.seed = seed_value(v, "stochastic.seed"); });
  optional_key(j, "phi_name", [&](const json& v) {
    s.phi_name = string(v, "stochastic.phi_name");
    const auto names = noise_names();
    if (!s.phi_name.empty() && std::find(names.begin(), names.end(), s.phi_name) == names.end())
      fail("unknown noise '" + s.phi_name + "'");
  });
  optional_key(j, "sigma", [&](const json& v) {
    s.sigma = number(v, "stochastic.sigma");
    if (s.sigma < 0.0) fail("stochastic.sigma must be non-negative");
  });
  optional_key(j, "lags", [&](const json& v) {
    if (!v.is_array() || v.empty()) fail("stochastic.lags must be a non-empty array");
    s.lags.clear();
    for (const auto& l : v) s.lags.push_back(int(integer(l, "stochastic.lags[]", 1)));
  });
}

void parse_output(const json& j, OutputConfig& o) {
  allow_keys(j, "output", {"directory", "formats"});
  optional_key(j, "directory", [&](const json& v) { o.directory = string(v, "output.directory"); });
  optional_key(j, "formats", [&](const json& v) {
    if (!v.is_array()) fail("output.formats must be an array");
    o.formats.clear();
    for (const auto& f : v) {
      const auto s = string(f, "output.formats[]");
      if (s != "csv" && s != "json") fail("output.formats entries must be 'csv' or 'json'");
      o.formats.push_back(s);
    }
  });
}

void parse_verify(const json& j, VerifyConfig& v) {
  allow_keys(j, "verify", {"trials", "seed", "require_compat"});
  optional_key(j, "trials", [&](const json& x) { v.trials = int(integer(x, "verify.trials", 1)); });
  optional_key(j, "seed", [&](const json& x) { v.seed = seed_value(x, "verify.seed"); });
  optional_key(j, "require_compat", [&](const json& x) { v.require_compat = boolean(x, "verify.require_compat"); });
}

void parse_convergence(const json& j, ConvergenceConfig& c) {
  allow_keys(j, "convergence", {"n_list", "dt_list"});
  optional_key(j, "n_list", [&](const json& v) {
    if (!v.is_array()) fail("convergence.n_list must be an array");
    for (const auto& n : v) c.n_list.push_back(int(integer(n, "convergence.n_list[]", 1)));
  });
  optional_key(j, "dt_list", [&](const json& v) {
    if (!v.is_array()) fail("convergence.dt_list must be an array");
    for (const auto& d : v) c.dt_list.push_back(positive(d, "convergence.dt_list[]"));
  });
}

/// Preset profile g(x); u = offset + amplitude·g.
double preset_value(const std::string& name, ManifoldKind kind, const Point& p) {
  const double x = p[0], y = p[1];
  const bool sphere = kind == ManifoldKind::Sphere2;
  if (name == "sine") return sphere ? std::cos(x) : std::sin(x);
  if (name == "cosine_product") {
    if (sphere) return std::sin(x) * std::cos(y);
    return kind == ManifoldKind::Torus1 ? std::cos(x) : std::cos(x) * std::cos(y);
  }
  if (name == "burgers") return sphere ? std::cos(x) : 0.5 * std::sin(x) + 0.2 * std::cos(2.0 * x);
  if (name == "bump") {
    if (sphere) return std::exp(std::cos(x) - 1.0);
    return kind == ManifoldKind::Torus1 ? std::exp(std::cos(x) - 1.0) : std::exp(std::cos(x) + std::cos(y) - 2.0);
  }
  fail("unknown preset '" + name + "'");
}

}  // namespace

std::vector<std::string> preset_names() { return {"sine", "cosine_product", "burgers", "bump"}; }

RunConfig parse_config(const json& j) {
  allow_keys(j, "config",
             {"schema_version", "manifold", "model", "initial", "solver", "stochastic", "output", "verify", "convergence"});
  RunConfig c;
  if (!j.contains("schema_version")) fail("schema_version is required");
  c.schema_version = int(integer(j.at("schema_version"), "schema_version", 0));
  if (c.schema_version != kSchemaVersion)
    fail("unsupported schema_version " + std::to_string(c.schema_version));
  for (const char* k : {"manifold", "model", "solver"})
    if (!j.contains(k)) fail(std::string(k) + " section is required");
  try {
    parse_manifold(j.at("manifold"), c.manifold);
    parse_model(j.at("model"), c.model);
    optional_key(j, "initial", [&](const json& v) { parse_initial(v, c.initial); });
    parse_solver(j.at("solver"), c.solver);
    optional_key(j, "stochastic", [&](const json& v) { parse_stochastic(v, c.stochastic); });
    optional_key(j, "output", [&](const json& v) { parse_output(v, c.output); });
    optional_key(j, "verify", [&](const json& v) { parse_verify(v, c.verify); });
    optional_key(j, "convergence", [&](const json& v) { parse_convergence(v, c.convergence); });
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("malformed config: ") + e.what());
  }
  if (c.stochastic.enabled && c.stochastic.phi_name.empty() && c.stochastic.sigma > 0.0)
    fail("stochastic.phi_name is required when sigma > 0");
  // model construction validates names and parameters
  model_of(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["manifold"] = {{"kind", c.manifold.kind}, {"resolution", {c.manifold.resolution[0], c.manifold.resolution[1]}}};
  json model = {{"name", c.model.name}, {"parameters", json::object()}, {"truncate", c.model.truncate}};
  for (const auto& [k, v] : c.model.parameters) model["parameters"][k] = v;
  if (c.model.lambda_range) model["lambda_range"] = {c.model.lambda_range->lo, c.model.lambda_range->hi};
  if (!c.model.density.empty()) model["density"] = c.model.density;
  j["model"] = model;
  json initial = {{"type", c.initial.type}};
  if (c.initial.type == "modes") {
    initial["data"] = json::array();
    for (const auto& m : c.initial.modes) initial["data"].push_back({{"mode", m.mode}, {"value", m.value}});
  } else {
    initial["data"] = {{"name", c.initial.preset}, {"amplitude", c.initial.amplitude}, {"offset", c.initial.offset}};
  }
  j["initial"] = initial;
  const auto& s = c.solver;
  j["solver"] = {{"n", s.n},           {"dt", s.dt},         {"T", s.T},
                 {"scheme", s.scheme}, {"epsilon", s.epsilon}, {"output_stride", s.output_stride},
                 {"energy_tolerance", s.energy_tolerance}};
  const auto& st = c.stochastic;
  j["stochastic"] = {{"enabled", st.enabled}, {"M", st.M},         {"seed", st.seed},
                     {"phi_name", st.phi_name}, {"sigma", st.sigma}, {"lags", st.lags}};
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  j["verify"] = {{"trials", c.verify.trials}, {"seed", c.verify.seed}, {"require_compat", c.verify.require_compat}};
  j["convergence"] = {{"n_list", c.convergence.n_list}, {"dt_list", c.convergence.dt_list}};
  return j;
}

ManifoldSpec manifold_of(const RunConfig& c) {
  switch (manifold_kind_from_string(c.manifold.kind)) {
    case ManifoldKind::Torus1: return ManifoldSpec::torus1();
    case ManifoldKind::Torus2: return ManifoldSpec::torus2();
    case ManifoldKind::Sphere2: return ManifoldSpec::sphere2();
  }
  fail("unknown manifold");
}

ModelPtr model_of(const RunConfig& c) {
  const auto spec = manifold_of(c);
  ModelPtr m;
  if (c.model.name == "standard_form") {
    if (!c.model.parameters.empty()) fail("standard_form takes no parameters");
    m = from_standard_form(make_density(c.model.density, spec), spec);
  } else {
    m = make_model(c.model.name, spec, c.model.parameters, c.model.lambda_range);
  }
  return c.model.truncate ? truncate(m) : m;
}

NoisePtr noise_of(const RunConfig& c) {
  if (c.stochastic.phi_name.empty() || c.stochastic.sigma == 0.0) return nullptr;
  return make_noise(c.stochastic.phi_name, manifold_of(c), c.stochastic.sigma);
}

AssemblyWorkspace workspace_of(const RunConfig& c, int n) {
  const auto spec = manifold_of(c);
  auto grid = build_grid(spec, c.manifold.resolution);
  auto basis = build_basis(spec, grid, n < 0 ? c.solver.n : n);
  return AssemblyWorkspace(std::move(grid), std::move(basis), model_of(c), c.solver.epsilon, noise_of(c));
}

SpectralVector initial_state(const RunConfig& c, const AssemblyWorkspace& ws) {
  if (c.initial.type == "modes") {
    SpectralVector v = zero_vector(ws.basis());
    for (const auto& m : c.initial.modes) {
      if (m.mode >= ws.n()) fail("initial mode " + std::to_string(m.mode) + " exceeds basis size");
      v.coeffs[m.mode] += m.value;
    }
    return v;
  }
  const auto& grid = ws.grid();
  std::vector<double> u(grid.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = c.initial.offset + c.initial.amplitude * preset_value(c.initial.preset, manifold_of(c).kind, grid.nodes[i]);
  return project(grid, ws.basis(), u);
}

SolverConfig solver_config_of(const RunConfig& c) {
  SolverConfig s;
  s.dt = c.solver.dt;
  s.T = c.solver.T;
  s.scheme = scheme_from_string(c.solver.scheme);
  s.output_stride = c.solver.output_stride;
  s.energy_tolerance = c.solver.energy_tolerance;
  return s;
}

}  // namespace pgal
