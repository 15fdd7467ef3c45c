#include <doctest.h>

#include <cmath>
#include <random>

#include "pgal/integrate.hpp"

using namespace pgal;

namespace {

AssemblyWorkspace workspace(const ManifoldSpec& spec, std::array<int, 2> res, int n, ModelPtr model,
                            double eps = 0.0) {
  auto grid = build_grid(spec, res);
  auto basis = build_basis(spec, grid, n);
  return AssemblyWorkspace(std::move(grid), std::move(basis), std::move(model), eps);
}

Eigen::VectorXd random_coeffs(int n, unsigned seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v[k] = scale * nd(rng) / (1.0 + k);
  return v;
}

/// u₀ = 0.5 sin x + 0.2 cos 2x on the circle, projected on n modes.
SpectralVector burgers_u0(const AssemblyWorkspace& ws) {
  std::vector<double> u(ws.grid().size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double x = ws.grid().nodes[i][0];
    u[i] = 0.5 * std::sin(x) + 0.2 * std::cos(2.0 * x);
  }
  return project(ws.grid(), ws.basis(), u);
}

class Inert : public ModelBase<Inert> {
 public:
  explicit Inert(const ManifoldSpec& spec) : ModelBase(spec) {
    info_.name = "inert";
    info_.is_linear_diffusion = true;
  }
  template <class S>
  Coefficients<S> compute(const ChartPoint<S>&, const S&) const {
    return {};
  }
};

}  // namespace

TEST_CASE("RK4 step on a single heat mode") {
  const auto spec = ManifoldSpec::torus1();
  const auto ws = workspace(spec, {32, 1}, 9, make_model("heat", spec));
  for (int k : {1, 3, 5}) {
    const double mu = ws.basis().mu[k];
    for (double dt : {0.01, 0.05, 0.1}) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(9);
      a[k] = 1.3;
      const auto s = step_rk4(ws, {0.0, a}, dt);
      const double z = mu * dt;
      CHECK(std::abs(s.alpha[k] - std::exp(-z) * a[k]) <= std::pow(z, 5) / 120.0 * a[k] + 1e-14);
      CHECK(s.t == doctest::Approx(dt));
    }
  }
  const auto z = step_rk4(ws, {0.0, Eigen::VectorXd::Zero(9)}, 0.1);
  CHECK(z.alpha.norm() == 0.0);
}

TEST_CASE("RK4 is linear for linear models") {
  const auto spec = ManifoldSpec::torus2();
  const auto ws = workspace(spec, {24, 24}, 21, make_model("aniso_linear", spec, {{"beta", 0.7}}));
  const Eigen::VectorXd a = random_coeffs(21, 1);
  const auto s1 = step_rk4(ws, {0.0, a}, 0.01);
  const auto s3 = step_rk4(ws, {0.0, Eigen::VectorXd(-2.5 * a)}, 0.01);
  CHECK((s3.alpha + 2.5 * s1.alpha).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("IMEX step matches the scalar Crank-Nicolson factor") {
  for (const auto& spec : {ManifoldSpec::torus1(), ManifoldSpec::sphere2()}) {
    const auto ws = spec.kind == ManifoldKind::Torus1 ? workspace(spec, {32, 1}, 9, make_model("heat", spec))
                                                      : workspace(spec, {16, 32}, 16, make_model("heat", spec));
    const Eigen::VectorXd a = random_coeffs(ws.n(), 2);
    const double dt = 0.05;
    const auto s = step_imex(ws, {0.0, a}, dt);
    for (int k = 0; k < ws.n(); ++k) {
      const double mu = ws.basis().mu[k];
      CHECK(std::abs(s.alpha[k] - (1.0 - 0.5 * dt * mu) / (1.0 + 0.5 * dt * mu) * a[k]) <= 1e-13);
    }
  }
}

TEST_CASE("IMEX with nothing to do is the identity") {
  const auto spec = ManifoldSpec::torus2();
  const auto ws = workspace(spec, {16, 16}, 13, std::make_shared<Inert>(spec));
  const Eigen::VectorXd a = random_coeffs(13, 3);
  CHECK((step_imex(ws, {0.0, a}, 0.3).alpha - a).norm() == 0.0);
}

TEST_CASE("IMEX local error against RK4 is third order") {
  const auto spec = ManifoldSpec::torus1();
  const auto ws = workspace(spec, {64, 1}, 15, make_model("burgers", spec, {{"nu", 0.2}}));
  const Eigen::VectorXd a = burgers_u0(ws).coeffs;
  std::vector<double> err;
  for (double dt : {0.02, 0.01, 0.005}) {
    ImexStepper imex(ws, dt);
    // history from the exact flow one step back
    imex.prime(step_rk4(ws, {0.0, a}, -dt));
    const auto si = imex.step({0.0, a});
    const auto sr = step_rk4(ws, {0.0, a}, dt);
    err.push_back((si.alpha - sr.alpha).norm());
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double ratio = err[i - 1] / err[i];
    CHECK(ratio > 7.0);
    CHECK(ratio < 9.0);
  }
}

TEST_CASE("IMEX rejects nonlinear diffusion") {
  const auto spec = ManifoldSpec::torus1();
  const auto ws = workspace(spec, {32, 1}, 9, make_model("bounded_nonlinear", spec));
  CHECK_THROWS_AS(ImexStepper(ws, 0.01), Error);
  SolverConfig cfg;
  cfg.scheme = Scheme::ImexCNAB2;
  CHECK_THROWS_AS(solve(ws, unit_vector(ws.basis(), 1), cfg), Error);
}

TEST_CASE("heat solve against the analytic solution") {
  for (const auto& spec : {ManifoldSpec::torus1(), ManifoldSpec::sphere2()}) {
    const auto ws = spec.kind == ManifoldKind::Torus1 ? workspace(spec, {64, 1}, 9, make_model("heat", spec))
                                                      : workspace(spec, {16, 32}, 16, make_model("heat", spec));
    const double mu = ws.basis().mu[1];
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.T = 1.0;
    cfg.output_stride = 100;
    const auto imex = solve(ws, unit_vector(ws.basis(), 1), cfg);
    CHECK(imex.scheme_used == Scheme::ImexCNAB2);
    CHECK(imex.snapshots.size() == 11);
    for (std::size_t i = 1; i < imex.snapshots.size(); ++i) CHECK(imex.snapshots[i].t > imex.snapshots[i - 1].t);
    // the discrete solution is exactly the Crank–Nicolson power
    const double r = (1.0 - 0.5e-3 * mu) / (1.0 + 0.5e-3 * mu);
    const auto& fin = imex.snapshots.back();
    CHECK(fin.t == 1.0);
    CHECK(std::abs(fin.alpha[1] - std::pow(r, 1000)) <= 1e-12);
    const double err = std::abs(fin.alpha[1] - std::exp(-mu));
    const double cn_err = std::exp(-mu) * 1000.0 * std::pow(1e-3 * mu, 3) / 12.0;
    CHECK(err == doctest::Approx(cn_err).epsilon(1e-3));
    CHECK(imex.max_energy_residual <= 1e-6);
    CHECK(imex.monitors.back().l2 == doctest::Approx(std::pow(r, 1000)).epsilon(1e-12));

    cfg.scheme = Scheme::RK4;
    const auto rk = solve(ws, unit_vector(ws.basis(), 1), cfg);
    CHECK(std::abs(rk.snapshots.back().alpha[1] - std::exp(-mu)) <= 1e-10);
  }
}

TEST_CASE("Burgers L2 norm is nonincreasing and the ledger closes") {
  const auto spec = ManifoldSpec::torus1();
  const auto ws = workspace(spec, {64, 1}, 15, make_model("burgers", spec, {{"nu", 0.1}}));
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 1.0;
  cfg.output_stride = 10;
  const auto run = solve(ws, burgers_u0(ws), cfg);
  for (std::size_t i = 1; i < run.monitors.size(); ++i) {
    CHECK(run.monitors[i].l2 <= run.monitors[i - 1].l2 + 1e-10);
    CHECK(std::abs(run.monitors[i].flux_work) <= 1e-12);
  }
  CHECK(run.max_energy_residual <= 1e-6);
  CHECK(run.hm1_dt_integral <= run.hm1_dt_bound);
  CHECK(run.gronwall_margin <= 0.0);
}

TEST_CASE("IMEX and RK4 agree to second order") {
  const auto spec = ManifoldSpec::torus1();
  const auto ws = workspace(spec, {64, 1}, 15, make_model("burgers", spec, {{"nu", 0.2}}));
  const auto u0 = burgers_u0(ws);
  SolverConfig ref;
  ref.dt = 1e-3;
  ref.T = 0.5;
  ref.scheme = Scheme::RK4;
  ref.check_energy = false;
  const Eigen::VectorXd exact = solve(ws, u0, ref).snapshots.back().alpha;
  std::vector<double> err;
  for (double dt : {0.02, 0.01, 0.005}) {
    SolverConfig c = ref;
    c.dt = dt;
    c.scheme = Scheme::ImexCNAB2;
    c.output_stride = 1000;
    err.push_back((solve(ws, u0, c).snapshots.back().alpha - exact).norm());
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    CHECK(err[i - 1] / err[i] > 3.5);
    CHECK(err[i - 1] / err[i] < 4.5);
  }
}

TEST_CASE("self-convergence in the number of modes") {
  const auto spec = ManifoldSpec::torus1();
  const auto model = make_model("burgers", spec, {{"nu", 0.2}});
  SolverConfig cfg;
  cfg.dt = 2e-3;
  cfg.T = 0.5;
  cfg.output_stride = 1000;
  auto run_n = [&](int n) {
    const auto ws = workspace(spec, {256, 1}, n, model);
    return std::pair{solve(ws, burgers_u0(ws), cfg).snapshots.back().alpha, ws.basis().labels};
  };
  const auto [ref, ref_labels] = run_n(65);
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {5, 9, 17}) {
    const auto [a, labels] = run_n(n);
    // modes are nested, so the error is the coefficient distance
    double e2 = 0.0;
    for (int k = 0; k < ref.size(); ++k) {
      const double ak = k < a.size() ? a[k] : 0.0;
      if (k < a.size()) CHECK(labels[k] == ref_labels[k]);
      e2 += (ak - ref[k]) * (ak - ref[k]);
    }
    CHECK(std::sqrt(e2) < prev);
    prev = std::sqrt(e2);
  }
}

TEST_CASE("maximum principle for a truncated compatible model") {
  const auto spec = ManifoldSpec::torus1();
  const auto ws = workspace(spec, {64, 1}, 21, truncate(make_model("compat_pair", spec)), 1e-2);
  std::vector<double> u(ws.grid().size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.5 * (1.0 + std::cos(ws.grid().nodes[i][0]));
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 0.2;
  cfg.output_stride = 20;
  const auto run = solve(ws, project(ws.grid(), ws.basis(), u), cfg);
  CHECK(run.scheme_used == Scheme::RK4);
  CHECK(run.min_u >= -1e-6);
  CHECK(run.max_u <= 1.0 + 1e-6);
}

TEST_CASE("solver errors") {
  const auto spec = ManifoldSpec::torus1();
  const auto heat = workspace(spec, {32, 1}, 11, make_model("heat", spec));
  SolverConfig bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(solve(heat, unit_vector(heat.basis(), 1), bad), Error);
  SolverConfig ok;
  CHECK_THROWS_AS(solve(heat, SpectralVector{Eigen::VectorXd::Zero(4), 0}, ok), Error);
  SpectralVector nan = unit_vector(heat.basis(), 1);
  nan.coeffs[2] = std::nan("");
  CHECK_THROWS_AS(solve(heat, nan, ok), Error);

  // an oscillating Crank–Nicolson mode breaks the trapezoid ledger
  SolverConfig coarse;
  coarse.dt = 0.5;
  coarse.T = 5.0;
  try {
    solve(heat, unit_vector(heat.basis(), 10), coarse);
    FAIL("expected EnergyViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EnergyViolation);
  }

  const auto burgers = workspace(spec, {32, 1}, 11, make_model("burgers", spec, {{"nu", 0.01}}));
  SolverConfig wild;
  wild.dt = 0.5;
  wild.T = 50.0;
  wild.scheme = Scheme::RK4;
  wild.check_energy = false;
  try {
    solve(burgers, SpectralVector{random_coeffs(11, 4, 50.0), burgers.basis().id}, wild);
    FAIL("expected Blowup");
  } catch (const BlowupError& e) {
    CHECK(e.code() == Errc::Blowup);
    CHECK(e.sample_index() == -1);
    CHECK(e.time() > 0.0);
  }
  CHECK(scheme_from_string("IMEX-CNAB2") == Scheme::ImexCNAB2);
  CHECK_THROWS_AS(scheme_from_string("euler"), Error);
}
