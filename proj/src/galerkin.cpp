#include "pgal/galerkin.hpp"

#include <cmath>

#include "pgal/checks.hpp"

namespace pgal {

namespace {

using Columns = std::array<Eigen::VectorXd, 2>;
using TensorColumns = std::array<std::array<Eigen::VectorXd, 2>, 2>;

void require_alpha(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha) {
  if (alpha.size() != ws.n()) throw Error(Errc::ShapeMismatch, "coefficient count differs from basis size");
}

/// Weighted f^i and A^a_b at the nodes for u = Vα.
void weighted_coefficients(const AssemblyWorkspace& ws, const Eigen::VectorXd& u, Columns& f,
                           TensorColumns& a) {
  const auto& grid = ws.grid();
  const Eigen::Index rows = u.size();
  for (int i = 0; i < 2; ++i) {
    f[i].resize(rows);
    for (int j = 0; j < 2; ++j) a[i][j].resize(rows);
  }
  for (Eigen::Index n = 0; n < rows; ++n) {
    const auto c = ws.model().evaluate(grid.nodes[n], u[n]);
    const double w = grid.weights[n];
    for (int i = 0; i < 2; ++i) {
      f[i][n] = w * c.flux[i];
      for (int j = 0; j < 2; ++j) a[i][j][n] = w * c.diffusion[i][j];
    }
  }
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) acc += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
  return acc;
}

}  // namespace

AssemblyWorkspace::AssemblyWorkspace(QuadratureGrid grid, EigenBasis basis, ModelPtr model, double epsilon,
                                     NoisePtr noise)
    : grid_(std::move(grid)),
      basis_(std::move(basis)),
      model_(std::move(model)),
      epsilon_(epsilon),
      noise_(std::move(noise)) {
  if (!model_) throw Error(Errc::ConfigError, "workspace needs a model");
  if (basis_.value.rows() != Eigen::Index(grid_.size()))
    throw Error(Errc::ShapeMismatch, "basis tables do not match the grid");
  if (!(epsilon_ >= 0.0)) throw Error(Errc::ConfigError, "epsilon must be non-negative");
  w_ = Eigen::Map<const Eigen::VectorXd>(grid_.weights.data(), Eigen::Index(grid_.weights.size()));
}

Eigen::VectorXd AssemblyWorkspace::pair(const Columns& flux, const TensorColumns& tensor) const {
  const int d = basis_.dim;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis_.n);
  for (int i = 0; i < d; ++i) out.noalias() += basis_.partial[i].transpose() * flux[i];
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) out.noalias() += basis_.hessian[b][a].transpose() * tensor[a][b];
  return out;
}

Eigen::VectorXd rhs_flux(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha) {
  require_alpha(ws, alpha);
  const Eigen::VectorXd u = ws.basis().value * alpha;
  Columns f;
  TensorColumns a;
  weighted_coefficients(ws, u, f, a);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ws.n());
  for (int i = 0; i < ws.dim(); ++i) out.noalias() += ws.basis().partial[i].transpose() * f[i];
  return out;
}

Eigen::VectorXd rhs_deterministic(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha) {
  require_alpha(ws, alpha);
  const Eigen::VectorXd u = ws.basis().value * alpha;
  Columns f;
  TensorColumns a;
  weighted_coefficients(ws, u, f, a);
  Eigen::VectorXd out = ws.pair(f, a);
  if (ws.epsilon() != 0.0)
    for (int k = 0; k < ws.n(); ++k) out[k] -= ws.epsilon() * ws.basis().mu[k] * alpha[k];
  return out;
}

Eigen::VectorXd rhs_deterministic(const AssemblyWorkspace& ws, const GalerkinState& state) {
  return rhs_deterministic(ws, state.alpha);
}

Eigen::VectorXd rhs_noise(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha) {
  require_alpha(ws, alpha);
  if (!ws.noise()) return Eigen::VectorXd::Zero(ws.n());
  const Eigen::VectorXd u = ws.basis().value * alpha;
  Eigen::VectorXd phi(u.size());
  for (Eigen::Index n = 0; n < u.size(); ++n)
    phi[n] = ws.weights()[n] * ws.noise()->phi(ws.grid().nodes[n], u[n]);
  return ws.basis().value.transpose() * phi;
}

Eigen::MatrixXd linear_operator(const AssemblyWorkspace& ws) {
  const auto& info = ws.model().info();
  if (!info.is_linear_diffusion) throw Error(Errc::NotLinearDiffusion, info.name);
  const auto& grid = ws.grid();
  const auto& basis = ws.basis();
  const int d = basis.dim;
  // A(x, λ) = λ·A(x, 1) for linear diffusion
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(Eigen::Index(grid.size()), basis.n);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto a1 = ws.model().evaluate(grid.nodes[n], 1.0).diffusion;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) c.row(Eigen::Index(n)) += grid.weights[n] * a1[a][b] * basis.hessian[b][a].row(Eigen::Index(n));
  }
  Eigen::MatrixXd l = c.transpose() * basis.value;
  for (int k = 0; k < basis.n; ++k) l(k, k) -= ws.epsilon() * basis.mu[k];
  return l;
}

Eigen::VectorXd strong_diffusion_pairing(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha) {
  require_alpha(ws, alpha);
  const auto syn = synthesize(ws.basis(), alpha, true);
  const auto samples = sample_along(ws.model(), ws.grid(), syn.jets());
  const auto dd = div_div(ws.grid(), samples.diffusion);
  Eigen::VectorXd v(Eigen::Index(ws.grid().size()));
  for (Eigen::Index n = 0; n < v.size(); ++n) v[n] = ws.weights()[n] * dd.at[n].v;
  return ws.basis().value.transpose() * v;
}

EnergyTerms energy_terms(const AssemblyWorkspace& ws, const Eigen::VectorXd& alpha) {
  require_alpha(ws, alpha);
  const auto& grid = ws.grid();
  const auto& basis = ws.basis();
  const auto syn = synthesize(basis, alpha, true);
  const auto samples = sample_along(ws.model(), grid, syn.jets());
  const auto div_a = div_tensor(grid, samples.diffusion);
  EnergyTerms e;
  e.half_l2sq = 0.5 * alpha.squaredNorm();
  e.h1_sq = std::pow(sobolev_norm(basis, alpha, 1.0), 2);
  double mu_sum = 0.0;
  for (int k = 0; k < basis.n; ++k) mu_sum += basis.mu[k] * alpha[k] * alpha[k];
  e.eps_dissipation = ws.epsilon() * mu_sum;
  e.min_u = std::numeric_limits<double>::infinity();
  e.max_u = -std::numeric_limits<double>::infinity();
  const int d = basis.dim;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const double w = grid.weights[n];
    const double u = syn.value[Eigen::Index(n)];
    e.min_u = std::min(e.min_u, u);
    e.max_u = std::max(e.max_u, u);
    const auto c = ws.model().evaluate(grid.nodes[n], u);
    const auto da = values_of(div_a.at[n]);
    std::array<double, 2> grad{}, du{};
    for (int i = 0; i < d; ++i) {
      grad[i] = syn.gradient[i][Eigen::Index(n)];
      du[i] = syn.partial[i][Eigen::Index(n)];
    }
    double diss = 0.0, work = 0.0, gsq = 0.0;
    for (int i = 0; i < d; ++i) {
      diss += da[i] * grad[i];
      work += c.flux[i] * du[i];
      gsq += du[i] * grad[i];
    }
    e.dissipation += w * diss;
    e.flux_work += w * work;
    e.grad_sq += w * gsq;
    std::array<double, 2> f = c.flux;
    if (d == 1) f[1] = 0.0;
    Mat2 g = grid.metric[n], gi = grid.inverse_metric[n];
    e.f_sq += w * std::pow(vector_norm(g, f), 2);
    std::array<double, 2> daw = da;
    if (d == 1) daw[1] = 0.0;
    e.div_a_sq += w * std::pow(oneform_norm(gi, daw), 2);
  }
  e.hm1_dt = hminus1_norm_of_functional(basis, rhs_deterministic(ws, alpha));
  return e;
}

double EnergyLedger::max_abs_residual() const {
  double m = 0.0;
  for (double r : residual) m = (std::isnan(r) || std::isnan(m)) ? std::nan("") : std::max(m, std::abs(r));
  return m;
}

EnergyLedger energy_ledger(const AssemblyWorkspace& ws, const std::vector<GalerkinState>& trajectory) {
  EnergyLedger led;
  if (trajectory.empty()) return led;
  const auto& info = ws.model().info();
  const double c = info.parabolicity_c, cbar = info.growth_C, eps = ws.epsilon();
  std::vector<double> rate, hm1sq, bound, gradsq;
  for (const auto& s : trajectory) {
    led.t.push_back(s.t);
    led.terms.push_back(energy_terms(ws, s.alpha));
    const auto& e = led.terms.back();
    rate.push_back(e.dissipation + e.eps_dissipation - e.flux_work);
    hm1sq.push_back(e.hm1_dt * e.hm1_dt);
    bound.push_back(3.0 * (e.f_sq + e.div_a_sq + eps * eps * e.grad_sq));
    gradsq.push_back(e.grad_sq);
  }
  const double e0 = led.terms.front().half_l2sq;
  const double t0 = led.t.front();
  double cum = 0.0, cum_grad = 0.0;
  led.gronwall_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < led.t.size(); ++k) {
    if (k > 0) {
      const double h = led.t[k] - led.t[k - 1];
      cum += 0.5 * h * (rate[k] + rate[k - 1]);
      cum_grad += 0.5 * h * (gradsq[k] + gradsq[k - 1]);
    }
    led.residual.push_back(led.terms[k].half_l2sq - e0 + cum);
    const double t = led.t[k] - t0;
    const double rhs = (2.0 * e0 + cbar * t) * std::exp(cbar * t);
    led.gronwall_margin = std::max(led.gronwall_margin, 2.0 * led.terms[k].half_l2sq + c * cum_grad - rhs);
  }
  led.hm1_dt_integral = trapezoid(led.t, hm1sq);
  led.hm1_dt_bound = trapezoid(led.t, bound);
  return led;
}

double weak_residual(const AssemblyWorkspace& ws, const std::vector<GalerkinState>& trajectory,
                     const SpaceTimeTest& phi) {
  if (trajectory.empty()) return 0.0;
  if (phi.psi.size() != ws.n()) throw Error(Errc::ShapeMismatch, "test function size differs from basis size");
  std::vector<double> t, inner;
  for (const auto& s : trajectory) {
    t.push_back(s.t);
    const Eigen::VectorXd r = rhs_deterministic(ws, s.alpha);
    inner.push_back(phi.theta_dot(s.t) * s.alpha.dot(phi.psi) + phi.theta(s.t) * r.dot(phi.psi));
  }
  const auto& s0 = trajectory.front();
  return std::abs(trapezoid(t, inner) + phi.theta(s0.t) * s0.alpha.dot(phi.psi));
}

EntropyReport entropy_residual(const AssemblyWorkspace& ws, const std::vector<GalerkinState>& trajectory,
                               const Entropy& entropy) {
  const auto& model = ws.model();
  const auto lambdas = default_lambda_samples(model.info());
  const auto compat = check_geometry_compat(model, ws.grid(), lambdas);
  if (!compat.pass) throw Error(Errc::NotCompatible, model.info().name);
  EntropyReport rep;
  if (trajectory.empty()) return rep;
  const auto& grid = ws.grid();
  const int d = ws.dim();
  std::vector<double> rate;
  for (const auto& s : trajectory) {
    const auto syn = synthesize(ws.basis(), s.alpha, true);
    double integral = 0.0, diss = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) {
      const Eigen::Index i = Eigen::Index(n);
      const double u = syn.value[i];
      const double w = grid.weights[n];
      integral += w * entropy.s(u);
      const double s2 = entropy.s2(u);
      if (s2 == 0.0) continue;
      const auto lj = model.lambda_jet(grid.nodes[n], u);
      double q = 0.0, gsq = 0.0;
      for (int a = 0; a < d; ++a) {
        gsq += syn.partial[a][i] * syn.gradient[a][i];
        for (int b = 0; b < d; ++b) q += lj.diffusion[a][b].d[0] * syn.gradient[b][i] * syn.partial[a][i];
      }
      diss += w * s2 * (q + ws.epsilon() * gsq);
    }
    rep.t.push_back(s.t);
    rep.integral.push_back(integral);
    rate.push_back(diss);
  }
  double cum = 0.0;
  rep.max_defect = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    if (k > 0) cum += 0.5 * (rep.t[k] - rep.t[k - 1]) * (rate[k] + rate[k - 1]);
    rep.defect.push_back(rep.integral[k] - rep.integral.front() + cum);
    rep.max_defect = std::max(rep.max_defect, rep.defect.back());
  }
  return rep;
}

}  // namespace pgal
