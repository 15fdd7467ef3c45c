#include "pgal/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <Eigen/Core>

#include "pgal/checks.hpp"
#include "pgal/identities.hpp"

namespace pgal {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";
constexpr double kIdentityTolerance = 1e-8;
constexpr double kGramTolerance = 1e-10;
constexpr double kVolumeTolerance = 1e-12;

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

struct Context {
  RunConfig config;
  fs::path out;
  int threads = 1;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

Context load(const CommandOptions& opts) {
  Context ctx;
  ctx.config = load_config(opts.config_path);
  if (opts.seed) {
    ctx.config.stochastic.seed = *opts.seed;
    ctx.config.verify.seed = *opts.seed;
  }
  if (opts.threads < 1) throw Error(Errc::ConfigError, "--threads must be at least 1");
  ctx.threads = opts.threads;
  ctx.out = opts.out_dir.empty() ? fs::path(ctx.config.output.directory) : fs::path(opts.out_dir);
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw Error(Errc::ConfigError, "cannot create output directory '" + ctx.out.string() + "'");
  return ctx;
}

bool wants(const RunConfig& c, const std::string& format) {
  return std::find(c.output.formats.begin(), c.output.formats.end(), format) != c.output.formats.end();
}

json header(const Context& ctx, const std::string& command) {
  json j;
  j["command"] = command;
  j["config"] = to_json(ctx.config);
  j["versions"] = {{"pgal", kVersion},
                   {"schema_version", kSchemaVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)}};
  j["threads"] = ctx.threads;
  return j;
}

json basis_json(const EigenBasis& b, const QuadratureGrid& grid) {
  json labels = json::array(), mu = json::array();
  for (int k = 0; k < b.n; ++k) {
    labels.push_back({b.labels[k].a, b.labels[k].b});
    mu.push_back(b.mu[k]);
  }
  return {{"n", b.n},
          {"id", b.id},
          {"manifold", to_string(grid.spec.kind)},
          {"resolution", {grid.resolution[0], grid.resolution[1]}},
          {"nodes", grid.size()},
          {"labels", labels},
          {"mu", mu}};
}

void write_json(const Context& ctx, const std::string& name, json j) {
  j["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  std::ofstream f(ctx.out / name);
  f << j.dump(2) << '\n';
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& columns) : f_(path) {
    for (std::size_t i = 0; i < columns.size(); ++i) f_ << (i ? "," : "") << columns[i];
    f_ << '\n';
  }
  Csv& operator<<(double v) {
    f_ << (first_ ? "" : ",") << format_double(v);
    first_ = false;
    return *this;
  }
  Csv& integer(long v) {
    f_ << (first_ ? "" : ",") << v;
    first_ = false;
    return *this;
  }
  void end() {
    f_ << '\n';
    first_ = true;
  }

 private:
  std::ofstream f_;
  bool first_ = true;
};

json error_json(const Error& e) {
  json j = {{"code", errc_name(e.code())}, {"message", e.what()}};
  if (const auto* b = dynamic_cast<const BlowupError*>(&e)) {
    j["time"] = num(b->time());
    j["sample_index"] = b->sample_index();
  }
  return j;
}

json checks_summary(const CoefficientModel& model, const QuadratureGrid& grid) {
  const auto lambdas = default_lambda_samples(model.info());
  const auto par = check_parabolicity(model, grid, lambdas);
  const auto gro = check_growth(model, grid, lambdas);
  return {{"parabolicity", {{"pass", par.pass}, {"min_eigenvalue", num(par.min_eigenvalue)}, {"c", num(par.c)}}},
          {"growth",
           {{"pass", gro.pass}, {"empirical_C", num(gro.empirical_C)}, {"declared_C", num(gro.declared_C)}}}};
}

SpectralVector truncated(const SpectralVector& v, int n, std::uint64_t id) {
  SpectralVector w;
  w.coeffs = v.coeffs.head(std::min<Eigen::Index>(n, v.size()));
  w.basis_id = id;
  return w;
}

double max_gram_deviation(const QuadratureGrid& grid, const EigenBasis& b) {
  const Eigen::Map<const Eigen::VectorXd> w(grid.weights.data(), Eigen::Index(grid.weights.size()));
  const Eigen::MatrixXd gram = b.value.transpose() * w.asDiagonal() * b.value;
  return (gram - Eigen::MatrixXd::Identity(b.n, b.n)).cwiseAbs().maxCoeff();
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

int cmd_verify(const CommandOptions& opts) {
  const Context ctx = load(opts);
  const auto& c = ctx.config;
  const auto spec = manifold_of(c);
  const auto grid = build_grid(spec, c.manifold.resolution);
  const auto model = model_of(c);
  const auto lambdas = default_lambda_samples(model->info());

  json checks;
  bool all = true;
  auto record = [&](const std::string& name, bool pass, bool required, json details) {
    details["pass"] = pass;
    details["required"] = required;
    checks[name] = details;
    if (required && !pass) all = false;
  };

  double volume = 0.0;
  for (double w : grid.weights) volume += w;
  const double vol_err = std::abs(volume - spec.analytic_volume()) / spec.analytic_volume();
  record("volume", vol_err <= kVolumeTolerance, true,
         {{"relative_error", num(vol_err)}, {"tolerance", kVolumeTolerance}});

  const auto basis = build_basis(spec, grid, c.solver.n);
  const double gram = max_gram_deviation(grid, basis);
  record("orthonormality", gram <= kGramTolerance, true, {{"max_deviation", num(gram)}, {"tolerance", kGramTolerance}});

  const auto id = run_identity_suite(spec, c.manifold.resolution, c.verify.trials, c.verify.seed);
  auto identity = [&](const char* name, double r) {
    record(name, r <= kIdentityTolerance, true, {{"residual", num(r)}, {"tolerance", kIdentityTolerance}});
  };
  identity("integration_by_parts", id.integration_by_parts);
  identity("trace_identity", id.trace_identity);
  identity("laplace_reduction", id.laplace_reduction);
  identity("stokes", id.stokes);
  identity("transpose_symmetry", id.transpose_symmetry);

  const auto par = check_parabolicity(*model, grid, lambdas);
  record("parabolicity", par.pass, c.solver.epsilon == 0.0,
         {{"min_eigenvalue", num(par.min_eigenvalue)},
          {"c", num(par.c)},
          {"symmetry_residual", num(par.symmetry_residual)}});

  const auto gro = check_growth(*model, grid, lambdas);
  json probed = json::array();
  for (double l : gro.probed_lambdas) probed.push_back(num(l));
  record("growth", gro.pass, true,
         {{"empirical_C", num(gro.empirical_C)},
          {"declared_C", num(gro.declared_C)},
          {"outer_doubling_ratio", num(gro.outer_doubling_ratio)},
          {"probed_lambdas", probed}});

  const auto cmp = check_geometry_compat(*model, grid, lambdas);
  record("geometry_compat", cmp.pass, c.verify.require_compat,
         {{"max_residual", num(cmp.max_residual)}, {"worst_lambda", num(cmp.worst_lambda)}});

  json j = header(ctx, "verify");
  j["basis"] = basis_json(basis, grid);
  j["checks"] = checks;
  j["pass"] = all;
  write_json(ctx, "verify.json", j);
  return all ? kExitOk : kExitFailure;
}

int cmd_solve(const CommandOptions& opts) {
  const Context ctx = load(opts);
  const auto& c = ctx.config;
  const auto ws = workspace_of(c);
  const auto u0 = initial_state(c, ws);
  const auto sc = solver_config_of(c);

  json j = header(ctx, "solve");
  j["basis"] = basis_json(ws.basis(), ws.grid());
  j["checks"] = checks_summary(ws.model(), ws.grid());
  SolverRun run;
  try {
    run = solve(ws, u0, sc);
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    j["status"] = "failed";
    j["error"] = error_json(e);
    write_json(ctx, "run.json", j);
    std::cerr << e.what() << '\n';
    return kExitFailure;
  }

  if (wants(c, "csv")) {
    Csv mon(ctx.out / "monitors.csv", {"t", "L2", "H1", "Hm1_dt", "energy_residual", "min_u", "max_u", "dissipation",
                                       "flux_work", "gronwall_margin"});
    for (const auto& m : run.monitors) {
      mon << m.t << m.l2 << m.h1 << m.hm1_dt << m.energy_residual << m.min_u << m.max_u << m.dissipation
          << m.flux_work << m.gronwall_margin;
      mon.end();
    }
    Csv snap(ctx.out / "snapshots.csv", {"t", "x1", "x2", "u"});
    const auto& grid = ws.grid();
    for (const auto& s : run.snapshots) {
      const auto syn = synthesize(ws.basis(), s.alpha, false);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        snap << s.t << grid.nodes[i][0] << grid.nodes[i][1] << syn.value[Eigen::Index(i)];
        snap.end();
      }
    }
  }

  j["status"] = "ok";
  j["scheme_used"] = to_string(run.scheme_used);
  j["steps"] = run.steps;
  j["substeps"] = run.substeps;
  j["summary"] = {{"max_energy_residual", num(run.max_energy_residual)},
                  {"hm1_dt_integral", num(run.hm1_dt_integral)},
                  {"hm1_dt_bound", num(run.hm1_dt_bound)},
                  {"hm1_dt_bound_satisfied", run.hm1_dt_integral <= run.hm1_dt_bound},
                  {"gronwall_margin", num(run.gronwall_margin)},
                  {"min_u", num(run.min_u)},
                  {"max_u", num(run.max_u)}};
  if (!run.snapshots.empty()) {
    json a = json::array();
    for (double v : run.snapshots.back().alpha) a.push_back(num(v));
    j["final_alpha"] = a;
  }
  write_json(ctx, "run.json", j);
  return kExitOk;
}

int cmd_solve_sde(const CommandOptions& opts) {
  const Context ctx = load(opts);
  const auto& c = ctx.config;
  if (!c.stochastic.enabled) throw Error(Errc::ConfigError, "solve-sde requires stochastic.enabled");
  const auto ws = workspace_of(c);
  const auto u0 = initial_state(c, ws);

  EnsembleConfig ec;
  ec.M = c.stochastic.M;
  ec.T = c.solver.T;
  ec.dt = c.solver.dt;
  ec.seed = c.stochastic.seed;
  ec.threads = ctx.threads;
  ec.output_stride = c.solver.output_stride;
  ec.lags = c.stochastic.lags;

  json j = header(ctx, "solve-sde");
  j["basis"] = basis_json(ws.basis(), ws.grid());
  EnsembleStats st;
  try {
    st = run_ensemble(ws, u0, ec);
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    j["status"] = "failed";
    j["error"] = error_json(e);
    write_json(ctx, "run.json", j);
    std::cerr << e.what() << '\n';
    return kExitFailure;
  }
  const auto holder = holder_half_check(st);

  if (wants(c, "csv")) {
    std::vector<std::string> cols{"t", "mean_L2sq", "stderr_L2sq", "mean_H1sq", "stderr_H1sq"};
    for (int k = 0; k < ws.n(); ++k) {
      const auto s = std::to_string(k);
      for (const char* p : {"mean_a", "stderr_a", "mean_a_sq", "stderr_a_sq"}) cols.push_back(p + s);
    }
    Csv ens(ctx.out / "ensemble.csv", cols);
    for (std::size_t t = 0; t < st.times.size(); ++t) {
      ens << st.times[t] << st.l2sq[t].mean << st.l2sq[t].stderr_of_mean() << st.h1sq[t].mean
          << st.h1sq[t].stderr_of_mean();
      for (int k = 0; k < ws.n(); ++k)
        ens << st.coeff[t][k].mean << st.coeff[t][k].stderr_of_mean() << st.coeff_sq[t][k].mean
            << st.coeff_sq[t][k].stderr_of_mean();
      ens.end();
    }
    Csv hol(ctx.out / "holder.csv", {"lag", "lag_time", "quotient", "stderr"});
    for (std::size_t i = 0; i < holder.quotient.size(); ++i) {
      hol.integer(st.lags[i]) << holder.lag_times[i] << holder.quotient[i] << holder.stderr_of_mean[i];
      hol.end();
    }
  }

  const double bound = stochastic_energy_bound(ws, u0, c.solver.T);
  double max_half_energy = 0.0;
  for (const auto& m : st.l2sq) max_half_energy = std::max(max_half_energy, 0.5 * m.mean);
  j["status"] = "ok";
  j["M"] = st.M;
  j["rng_sane"] = st.rng_sane;
  j["summary"] = {{"grad_integral_mean", num(st.grad_integral.mean)},
                  {"h2_integral_mean", num(st.h2_integral.mean)},
                  {"ito_term_mean", num(st.ito_term.mean)},
                  {"ito_term_stderr", num(st.ito_term.stderr_of_mean())},
                  {"max_half_energy_mean", num(max_half_energy)},
                  {"energy_bound", num(bound)},
                  {"energy_bound_satisfied", max_half_energy <= bound}};
  j["holder"] = {{"c_emp", num(holder.c_emp)},
                 {"spread", num(holder.spread)},
                 {"slope", num(holder.slope)},
                 {"pass", holder.pass}};
  write_json(ctx, "run.json", j);
  return kExitOk;
}

int cmd_convergence(const CommandOptions& opts) {
  const Context ctx = load(opts);
  const auto& c = ctx.config;
  std::vector<int> ns = c.convergence.n_list;
  std::vector<double> dts = c.convergence.dt_list;
  if (ns.empty()) ns = {c.solver.n};
  if (dts.empty()) dts = {c.solver.dt};
  const int n_max = *std::max_element(ns.begin(), ns.end());
  const double dt_min = *std::min_element(dts.begin(), dts.end());

  const auto ws_max = workspace_of(c, n_max);
  const auto u0_max = initial_state(c, ws_max);
  const bool analytic = c.model.name == "heat" && !c.model.truncate && c.initial.type == "modes";

  Eigen::VectorXd reference;
  std::string reference_kind;
  if (analytic) {
    const double kappa = ws_max.model().info().parameters.at("kappa");
    reference = u0_max.coeffs;
    for (int k = 0; k < n_max; ++k)
      reference[k] *= std::exp(-(kappa + c.solver.epsilon) * ws_max.basis().mu[k] * c.solver.T);
    reference_kind = "analytic";
  } else {
    auto sc = solver_config_of(c);
    sc.dt = dt_min;
    sc.output_stride = std::numeric_limits<int>::max();
    reference = solve(ws_max, u0_max, sc).snapshots.back().alpha;
    reference_kind = "numerical";
  }

  struct Row {
    int n;
    double dt;
    double l2 = 0.0, h1 = 0.0, rate = std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<Row> rows;
  for (int n : ns)
    for (double dt : dts) rows.push_back({n, dt});

  std::vector<std::exception_ptr> errors(rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < rows.size();) {
      try {
        auto& r = rows[i];
        const auto ws = workspace_of(c, r.n);
        auto sc = solver_config_of(c);
        sc.dt = r.dt;
        sc.output_stride = std::numeric_limits<int>::max();
        const auto a = solve(ws, truncated(u0_max, r.n, ws.basis().id), sc).snapshots.back().alpha;
        Eigen::VectorXd diff = reference;
        diff.head(r.n) -= a;
        r.l2 = diff.norm();
        double h1 = 0.0;
        for (int k = 0; k < n_max; ++k) h1 += (1.0 + ws_max.basis().mu[k]) * diff[k] * diff[k];
        r.h1 = std::sqrt(h1);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < ctx.threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json j = header(ctx, "convergence");
  j["reference"] = {{"kind", reference_kind}, {"n", n_max}, {"dt", analytic ? num(0.0) : num(dt_min)}};
  for (const auto& e : errors) {
    if (!e) continue;
    try {
      std::rethrow_exception(e);
    } catch (const Error& err) {
      if (err.code() == Errc::ConfigError) throw;
      j["status"] = "failed";
      j["error"] = error_json(err);
      write_json(ctx, "run.json", j);
      std::cerr << err.what() << '\n';
      return kExitFailure;
    }
  }

  // rates along dt for fixed n when several dt are given, otherwise along n
  const bool along_dt = dts.size() > 1;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& p = rows[i - 1];
    auto& r = rows[i];
    if (along_dt && p.n == r.n) r.rate = std::log(p.l2 / r.l2) / std::log(p.dt / r.dt);
    if (!along_dt) r.rate = std::log(p.l2 / r.l2) / std::log(double(r.n) / double(p.n));
  }
  if (wants(c, "csv")) {
    Csv out(ctx.out / "errors.csv", {"n", "dt", "L2_err", "H1_err", "observed_rate"});
    for (const auto& r : rows) {
      out.integer(r.n) << r.dt << r.l2 << r.h1 << r.rate;
      out.end();
    }
  }
  j["status"] = "ok";
  j["rows"] = rows.size();
  write_json(ctx, "run.json", j);
  return kExitOk;
}

int run_command(const std::string& name, const CommandOptions& opts) {
  try {
    if (name == "verify") return cmd_verify(opts);
    if (name == "solve") return cmd_solve(opts);
    if (name == "solve-sde") return cmd_solve_sde(opts);
    if (name == "convergence") return cmd_convergence(opts);
    throw Error(Errc::ConfigError, "unknown command '" + name + "'");
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return e.code() == Errc::ConfigError ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace pgal
