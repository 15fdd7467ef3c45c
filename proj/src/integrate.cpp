#include "pgal/integrate.hpp"

#include <cmath>
#include <cstdio>

namespace pgal {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

void require_finite(const GalerkinState& s) {
  if (!all_finite(s.alpha)) throw BlowupError(s.t, -1, "nonfinite coefficients");
}

/// Running time integrals of the ledger terms.
class LedgerAccumulator {
 public:
  LedgerAccumulator(const AssemblyWorkspace& ws, const EnergyTerms& e0, double t0)
      : ws_(ws), e0_(e0), prev_(e0), t0_(t0), tprev_(t0) {}

  void add(double t, const EnergyTerms& e) {
    const double h = t - tprev_;
    const double eps = ws_.epsilon();
    cum_rate_ += 0.5 * h * (rate(e) + rate(prev_));
    cum_grad_ += 0.5 * h * (e.grad_sq + prev_.grad_sq);
    hm1_ += 0.5 * h * (e.hm1_dt * e.hm1_dt + prev_.hm1_dt * prev_.hm1_dt);
    bound_ += 0.5 * h * 3.0 *
              (e.f_sq + e.div_a_sq + eps * eps * e.grad_sq + prev_.f_sq + prev_.div_a_sq +
               eps * eps * prev_.grad_sq);
    prev_ = e;
    tprev_ = t;
  }

  double residual(const EnergyTerms& e) const { return e.half_l2sq - e0_.half_l2sq + cum_rate_; }

  double gronwall_margin(double t, const EnergyTerms& e) const {
    const auto& info = ws_.model().info();
    const double s = t - t0_;
    const double rhs = (2.0 * e0_.half_l2sq + info.growth_C * s) * std::exp(info.growth_C * s);
    return 2.0 * e.half_l2sq + info.parabolicity_c * cum_grad_ - rhs;
  }

  double hm1() const { return hm1_; }
  double bound() const { return bound_; }

 private:
  static double rate(const EnergyTerms& e) { return e.dissipation + e.eps_dissipation - e.flux_work; }

  const AssemblyWorkspace& ws_;
  EnergyTerms e0_, prev_;
  double t0_, tprev_;
  double cum_rate_ = 0.0, cum_grad_ = 0.0, hm1_ = 0.0, bound_ = 0.0;
};

double trace_dissipation(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha) {
  Eigen::VectorXd d = rhs_deterministic(ws, alpha) - rhs_flux(ws, alpha);
  for (int k = 0; k < ws.n(); ++k) d[k] += ws.epsilon() * ws.basis().mu[k] * alpha[k];
  return -alpha.dot(d);
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::Auto: return "auto";
    case Scheme::RK4: return "RK4";
    case Scheme::ImexCNAB2: return "IMEX-CNAB2";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "auto") return Scheme::Auto;
  if (name == "RK4") return Scheme::RK4;
  if (name == "IMEX-CNAB2") return Scheme::ImexCNAB2;
  throw Error(Errc::ConfigError, "unknown scheme '" + name + "'");
}

GalerkinState step_rk4(const AssemblyWorkspace& ws, const GalerkinState& state, double dt) {
  const Eigen::VectorXd& a = state.alpha;
  const Eigen::VectorXd k1 = rhs_deterministic(ws, a);
  const Eigen::VectorXd k2 = rhs_deterministic(ws, Eigen::VectorXd(a + 0.5 * dt * k1));
  const Eigen::VectorXd k3 = rhs_deterministic(ws, Eigen::VectorXd(a + 0.5 * dt * k2));
  const Eigen::VectorXd k4 = rhs_deterministic(ws, Eigen::VectorXd(a + dt * k3));
  GalerkinState out{state.t + dt, a + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)};
  require_finite(out);
  return out;
}

double rk4_stable_dt(const AssemblyWorkspace& ws) {
  double mu_max = 0.0;
  for (double m : ws.basis().mu) mu_max = std::max(mu_max, m);
  const double stiff = mu_max * (ws.model().info().derivative_bound + ws.epsilon());
  if (!(stiff > 0.0) || !std::isfinite(stiff)) return std::numeric_limits<double>::infinity();
  return 0.9 / stiff;
}

ImexStepper::ImexStepper(const AssemblyWorkspace& ws, double dt) : ws_(&ws), dt_(dt) {
  l_ = linear_operator(ws);
  const Eigen::Index n = l_.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  explicit_ = id + 0.5 * dt * l_;
  lu_.compute(id - 0.5 * dt * l_);
  const double rc = lu_.rcond();
  if (!std::isfinite(rc) || rc < 1e-14) throw Error(Errc::SingularSystem, "I - dt/2 L is singular");
}

GalerkinState ImexStepper::step(const GalerkinState& state) {
  const Eigen::VectorXd flux = rhs_flux(*ws_, state.alpha);
  Eigen::VectorXd rhs = explicit_ * state.alpha;
  if (previous_flux_)
    rhs += dt_ * (1.5 * flux - 0.5 * *previous_flux_);
  else
    rhs += dt_ * flux;
  previous_flux_ = flux;
  GalerkinState out{state.t + dt_, lu_.solve(rhs)};
  require_finite(out);
  return out;
}

void ImexStepper::prime(const GalerkinState& previous) { previous_flux_ = rhs_flux(*ws_, previous.alpha); }

GalerkinState step_imex(const AssemblyWorkspace& ws, const GalerkinState& state, double dt) {
  ImexStepper s(ws, dt);
  return s.step(state);
}

SolverRun solve(const AssemblyWorkspace& ws, const SpectralVector& u0, const SolverConfig& config) {
  if (!(config.dt > 0.0) || !(config.T > 0.0) || config.output_stride < 1)
    throw Error(Errc::ConfigError, "dt, T and output_stride must be positive");
  if (u0.coeffs.size() != ws.n()) throw Error(Errc::ShapeMismatch, "initial coefficients differ from basis size");
  if (!u0.coeffs.allFinite()) throw Error(Errc::ConfigError, "initial state is not finite");

  SolverRun run;
  run.config = config;
  run.scheme_used = config.scheme;
  if (run.scheme_used == Scheme::Auto)
    run.scheme_used = ws.model().info().is_linear_diffusion ? Scheme::ImexCNAB2 : Scheme::RK4;

  const long nsteps = std::max(1LL, std::llround(config.T / config.dt));
  const double h = config.T / double(nsteps);
  run.steps = nsteps;

  std::optional<ImexStepper> imex;
  if (run.scheme_used == Scheme::ImexCNAB2) {
    imex.emplace(ws, h);
  } else {
    const double hmax = rk4_stable_dt(ws);
    if (std::isfinite(hmax) && h > hmax) run.substeps = int(std::ceil(h / hmax));
  }

  GalerkinState state{0.0, u0.coeffs};
  EnergyTerms e = energy_terms(ws, state.alpha);
  LedgerAccumulator acc(ws, e, 0.0);
  const double limit = config.energy_tolerance * (1.0 + u0.coeffs.squaredNorm());
  run.min_u = e.min_u;
  run.max_u = e.max_u;
  run.gronwall_margin = acc.gronwall_margin(0.0, e);

  auto record = [&](const GalerkinState& s, const EnergyTerms& terms, double residual, double margin) {
    run.snapshots.push_back(s);
    MonitorRow row;
    row.t = s.t;
    row.l2 = std::sqrt(2.0 * terms.half_l2sq);
    row.h1 = std::sqrt(terms.h1_sq);
    row.hm1_dt = terms.hm1_dt;
    row.energy_residual = residual;
    row.min_u = terms.min_u;
    row.max_u = terms.max_u;
    row.dissipation = terms.dissipation;
    row.dissipation_trace = trace_dissipation(ws, s.alpha);
    row.flux_work = terms.flux_work;
    row.gronwall_margin = margin;
    run.monitors.push_back(row);
  };
  record(state, e, 0.0, run.gronwall_margin);

  for (long k = 1; k <= nsteps; ++k) {
    const double t_next = config.T * double(k) / double(nsteps);
    if (imex) {
      state = imex->step(state);
    } else {
      const double hs = h / run.substeps;
      for (int s = 0; s < run.substeps; ++s) state = step_rk4(ws, state, hs);
    }
    state.t = t_next;
    e = energy_terms(ws, state.alpha);
    acc.add(state.t, e);
    const double residual = acc.residual(e);
    const double margin = acc.gronwall_margin(state.t, e);
    run.max_energy_residual = std::max(run.max_energy_residual, std::abs(residual));
    if (!std::isfinite(residual)) throw BlowupError(state.t, -1, "nonfinite energy ledger");
    run.gronwall_margin = std::max(run.gronwall_margin, margin);
    run.min_u = std::min(run.min_u, e.min_u);
    run.max_u = std::max(run.max_u, e.max_u);
    if (config.check_energy && std::abs(residual) > limit) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "ledger residual %.3e exceeds %.3e at t = %.6g", std::abs(residual), limit,
                    state.t);
      throw Error(Errc::EnergyViolation, buf);
    }
    if (k % config.output_stride == 0 || k == nsteps) record(state, e, residual, margin);
  }
  run.hm1_dt_integral = acc.hm1();
  run.hm1_dt_bound = acc.bound();
  return run;
}

}  // namespace pgal
