#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>

#include "pgal/galerkin.hpp"

using namespace pgal;
using std::numbers::pi;

namespace {

std::vector<std::pair<ManifoldSpec, std::array<int, 2>>> cases() {
  return {{ManifoldSpec::torus1(), {64, 1}}, {ManifoldSpec::torus2(), {32, 32}}, {ManifoldSpec::sphere2(), {24, 48}}};
}

int basis_size(const ManifoldSpec& s) { return s.kind == ManifoldKind::Torus1 ? 11 : s.kind == ManifoldKind::Torus2 ? 21 : 16; }

AssemblyWorkspace workspace(const ManifoldSpec& spec, std::array<int, 2> res, int n, ModelPtr model,
                            double eps = 0.0, NoisePtr noise = nullptr) {
  auto grid = build_grid(spec, res);
  auto basis = build_basis(spec, grid, n);
  return AssemblyWorkspace(std::move(grid), std::move(basis), std::move(model), eps, std::move(noise));
}

Eigen::VectorXd random_coeffs(int n, unsigned seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v[k] = scale * nd(rng) / (1.0 + k);
  return v;
}

std::vector<GalerkinState> rk4_trajectory(const AssemblyWorkspace& ws, Eigen::VectorXd a, double dt, int steps) {
  std::vector<GalerkinState> out{{0.0, a}};
  for (int s = 0; s < steps; ++s) {
    const Eigen::VectorXd k1 = rhs_deterministic(ws, a);
    const Eigen::VectorXd k2 = rhs_deterministic(ws, Eigen::VectorXd(a + 0.5 * dt * k1));
    const Eigen::VectorXd k3 = rhs_deterministic(ws, Eigen::VectorXd(a + 0.5 * dt * k2));
    const Eigen::VectorXd k4 = rhs_deterministic(ws, Eigen::VectorXd(a + dt * k3));
    a += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back({(s + 1) * dt, a});
  }
  return out;
}

std::vector<GalerkinState> exact_heat(int n, int k, double dt, int steps, double mu) {
  std::vector<GalerkinState> out;
  for (int s = 0; s <= steps; ++s) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    a[k] = std::exp(-mu * s * dt);
    out.push_back({s * dt, a});
  }
  return out;
}

}  // namespace

TEST_CASE("heat right-hand side is -mu alpha") {
  for (const auto& [spec, res] : cases()) {
    const auto ws = workspace(spec, res, basis_size(spec), make_model("heat", spec));
    const Eigen::VectorXd a = random_coeffs(ws.n(), 1);
    const Eigen::VectorXd r = rhs_deterministic(ws, a);
    for (int k = 0; k < ws.n(); ++k) CHECK(std::abs(r[k] + ws.basis().mu[k] * a[k]) <= 1e-10);
    CHECK(rhs_deterministic(ws, Eigen::VectorXd(Eigen::VectorXd::Zero(ws.n()))).norm() == 0.0);
    CHECK_THROWS_AS(rhs_deterministic(ws, Eigen::VectorXd(Eigen::VectorXd::Zero(ws.n() + 1))), Error);
  }
}

TEST_CASE("epsilon term is applied diagonally") {
  const auto spec = ManifoldSpec::sphere2();
  const auto ws0 = workspace(spec, {24, 48}, 16, make_model("bounded_nonlinear", spec));
  const auto ws1 = workspace(spec, {24, 48}, 16, make_model("bounded_nonlinear", spec), 0.25);
  const Eigen::VectorXd a = random_coeffs(16, 2);
  const Eigen::VectorXd d = rhs_deterministic(ws1, a) - rhs_deterministic(ws0, a);
  for (int k = 0; k < 16; ++k) CHECK(std::abs(d[k] + 0.25 * ws0.basis().mu[k] * a[k]) <= 1e-13);
}

TEST_CASE("Burgers on the circle against a pseudospectral convolution") {
  const auto spec = ManifoldSpec::torus1();
  const double nu = 0.1;
  const auto ws = workspace(spec, {64, 1}, 15, make_model("burgers", spec, {{"nu", nu}}));
  const Eigen::VectorXd a = random_coeffs(15, 3);
  const Eigen::VectorXd r = rhs_deterministic(ws, a);

  // complex Fourier coefficients c_k of u
  const int kmax = 7;
  std::map<int, std::complex<double>> c;
  const double s0 = 1.0 / std::sqrt(2.0 * pi), s1 = 1.0 / std::sqrt(pi);
  for (int j = 0; j < 15; ++j) {
    const int k = ws.basis().labels[j].a;
    if (k == 0) {
      c[0] += a[j] * s0;
    } else if (k > 0) {
      c[k] += 0.5 * a[j] * s1;
      c[-k] += 0.5 * a[j] * s1;
    } else {
      c[-k] += std::complex<double>(0.0, -0.5) * a[j] * s1;
      c[k] += std::complex<double>(0.0, 0.5) * a[j] * s1;
    }
  }
  std::map<int, std::complex<double>> w;  // coefficients of u²/2
  for (int p = -kmax; p <= kmax; ++p)
    for (int q = -kmax; q <= kmax; ++q) w[p + q] += 0.5 * c[p] * c[q];
  auto wc = [&](int m) { return w.count(m) ? w[m] : std::complex<double>(0.0); };
  for (int j = 0; j < 15; ++j) {
    const int k = ws.basis().labels[j].a;
    double flux = 0.0;
    // ∫ w ∂x e_j
    if (k > 0) {
      const std::complex<double> sin_int = std::complex<double>(0.0, pi) * (wc(k) - wc(-k));
      flux = -k * s1 * sin_int.real();
    } else if (k < 0) {
      const int m = -k;
      const double cos_int = (pi * (wc(m) + wc(-m))).real();
      flux = m * s1 * cos_int;
    }
    const double expect = flux - nu * k * k * a[j];
    CHECK(std::abs(r[j] - expect) <= 1e-8);
  }
}

TEST_CASE("trace route agrees with the strong route") {
  for (const auto& [spec, res] : cases()) {
    for (const char* name : {"heat", "aniso_linear", "bounded_nonlinear", "compat_pair"}) {
      const auto ws = workspace(spec, res, basis_size(spec), make_model(name, spec));
      const Eigen::VectorXd a = random_coeffs(ws.n(), 4, 0.4);
      const Eigen::VectorXd trace = rhs_deterministic(ws, a) - rhs_flux(ws, a);
      const Eigen::VectorXd strong = strong_diffusion_pairing(ws, a);
      INFO(name, " on ", to_string(spec.kind));
      CHECK((trace - strong).cwiseAbs().maxCoeff() <= 1e-7);
    }
  }
}

TEST_CASE("Galerkin orthogonality of the strong residual") {
  for (const auto& [spec, res] : cases()) {
    const double eps = 0.05;
    const auto ws = workspace(spec, res, basis_size(spec), make_model("compat_pair", spec), eps);
    const Eigen::VectorXd a = random_coeffs(ws.n(), 5, 0.4);
    const Eigen::VectorXd adot = rhs_deterministic(ws, a);
    const auto syn = synthesize(ws.basis(), a, true);
    const auto samples = sample_along(ws.model(), ws.grid(), syn.jets());
    const auto divf = div_vector(ws.grid(), samples.flux);
    const auto dd = div_div(ws.grid(), samples.diffusion);
    const auto lap = synthesize(ws.basis(), Eigen::VectorXd(-Eigen::Map<const Eigen::VectorXd>(
                                                ws.basis().mu.data(), ws.n()).cwiseProduct(a)),
                                false);
    Eigen::VectorXd strong(Eigen::Index(ws.grid().size()));
    for (Eigen::Index n = 0; n < strong.size(); ++n)
      strong[n] = ws.weights()[n] * (divf.at[n].v - dd.at[n].v - eps * lap.value[n]);
    const Eigen::VectorXd resid = adot + ws.basis().value.transpose() * strong;
    INFO(to_string(spec.kind));
    CHECK(resid.cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("standard form reproduces the divergence-form pairing") {
  for (const auto& [spec, res] : cases()) {
    const auto model = from_standard_form(make_density("arctan", spec), spec);
    const auto ws = workspace(spec, res, basis_size(spec), model);
    const Eigen::VectorXd a = random_coeffs(ws.n(), 6, 0.5);
    const Eigen::VectorXd r = rhs_deterministic(ws, a);
    const auto syn = synthesize(ws.basis(), a, true);
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(ws.n());
    for (std::size_t n = 0; n < ws.grid().size(); ++n) {
      const auto i = Eigen::Index(n);
      const double u = syn.value[i];
      const double coef = 1.0 / (1.0 + u * u);
      for (int k = 0; k < ws.n(); ++k)
        for (int c = 0; c < ws.dim(); ++c)
          expect[k] -= ws.weights()[i] * coef * syn.gradient[c][i] * ws.basis().partial[c](i, k);
    }
    INFO(to_string(spec.kind));
    CHECK((r - expect).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("truncation is invisible for states inside [0,1]") {
  for (const auto& [spec, res] : cases()) {
    const auto base = make_model("compat_pair", spec);
    const auto ws_b = workspace(spec, res, basis_size(spec), base);
    const auto ws_t = workspace(spec, res, basis_size(spec), truncate(base));
    Eigen::VectorXd a = random_coeffs(ws_b.n(), 7, 0.02);
    a[0] = 0.5 * std::sqrt(spec.analytic_volume());
    const auto u = synthesize(ws_b.basis(), a, false).value;
    REQUIRE(u.minCoeff() > 0.0);
    REQUIRE(u.maxCoeff() < 1.0);
    const Eigen::VectorXd rb = rhs_deterministic(ws_b, a), rt = rhs_deterministic(ws_t, a);
    for (int k = 0; k < ws_b.n(); ++k) CHECK(rb[k] == rt[k]);
  }
}

TEST_CASE("linear operator") {
  for (const auto& [spec, res] : cases()) {
    const int n = basis_size(spec);
    const auto heat = workspace(spec, res, n, make_model("heat", spec), 0.1);
    const Eigen::MatrixXd lh = linear_operator(heat);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) expect(k, k) = -1.1 * heat.basis().mu[k];
    CHECK((lh - expect).cwiseAbs().maxCoeff() <= 1e-10);

    const auto an = workspace(spec, res, n, make_model("aniso_linear", spec));
    const Eigen::VectorXd a = random_coeffs(n, 8);
    CHECK((linear_operator(an) * a - (rhs_deterministic(an, a) - rhs_flux(an, a))).cwiseAbs().maxCoeff() <= 1e-11);

    CHECK_THROWS_AS(linear_operator(workspace(spec, res, n, make_model("bounded_nonlinear", spec))), Error);
  }
}

TEST_CASE("noise pairings") {
  const auto spec = ManifoldSpec::torus1();
  const Eigen::VectorXd a = random_coeffs(11, 9, 0.5);
  const auto none = workspace(spec, {64, 1}, 11, make_model("heat", spec));
  CHECK(rhs_noise(none, a).norm() == 0.0);

  const auto add = workspace(spec, {64, 1}, 11, make_model("heat", spec), 0.0, make_noise("additive_mode", spec, 0.3));
  const Eigen::VectorXd b = rhs_noise(add, a);
  for (int k = 0; k < 11; ++k) CHECK(std::abs(b[k] - (k == 1 ? 0.3 : 0.0)) <= 1e-13);

  // multiplicative noise against a finer independent quadrature
  const auto noise = make_noise("multiplicative_bounded", spec, 0.7);
  const auto mul = workspace(spec, {64, 1}, 11, make_model("heat", spec), 0.0, noise);
  const Eigen::VectorXd bm = rhs_noise(mul, a);
  const auto fine = build_grid(spec, {512, 1});
  const auto fb = build_basis(spec, fine, 11);
  const Eigen::VectorXd u = fb.value * a;
  Eigen::VectorXd oracle = Eigen::VectorXd::Zero(11);
  for (std::size_t n = 0; n < fine.size(); ++n)
    for (int k = 0; k < 11; ++k)
      oracle[k] += fine.weights[n] * noise->phi(fine.nodes[n], u[Eigen::Index(n)]) * fb.value(Eigen::Index(n), k);
  CHECK((bm - oracle).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("energy ledger for the heat equation") {
  for (const auto& [spec, res] : cases()) {
    const int n = basis_size(spec);
    const auto ws = workspace(spec, res, n, make_model("heat", spec));
    const double mu = ws.basis().mu[1];
    const double dt = 1e-3;
    const auto traj = exact_heat(n, 1, dt, 1000, mu);
    const auto led = energy_ledger(ws, traj);
    for (std::size_t k = 0; k < led.t.size(); ++k) {
      CHECK(std::abs(led.terms[k].half_l2sq - 0.5 * std::exp(-2.0 * mu * led.t[k])) <= 1e-8);
      CHECK(std::abs(led.terms[k].dissipation - led.terms[k].grad_sq) <= 1e-9);
      CHECK(led.terms[k].dissipation >= 0.0);
    }
    CHECK(led.max_abs_residual() <= 1e-6);
    CHECK(std::isfinite(led.hm1_dt_integral));
    CHECK(led.hm1_dt_integral <= led.hm1_dt_bound);
    CHECK(led.gronwall_margin <= 0.0);

    const auto zero = energy_ledger(ws, {{0.0, Eigen::VectorXd::Zero(n)}, {1.0, Eigen::VectorXd::Zero(n)}});
    for (const auto& e : zero.terms) {
      CHECK(e.half_l2sq == 0.0);
      CHECK(e.dissipation == 0.0);
      CHECK(e.flux_work == 0.0);
      CHECK(e.h1_sq == 0.0);
      CHECK(e.hm1_dt == 0.0);
    }
  }
}

TEST_CASE("energy ledger along nonlinear trajectories") {
  const auto spec = ManifoldSpec::torus1();
  for (const char* name : {"burgers", "bounded_nonlinear", "compat_pair"}) {
    const auto ws = workspace(spec, {64, 1}, 11, make_model(name, spec), 0.01);
    const auto traj = rk4_trajectory(ws, random_coeffs(11, 10, 0.5), 1e-3, 500);
    const auto led = energy_ledger(ws, traj);
    INFO(name);
    CHECK(led.max_abs_residual() <= 1e-4 * (1.0 + traj.front().alpha.squaredNorm()));
    CHECK(led.hm1_dt_integral <= led.hm1_dt_bound);
    CHECK(led.gronwall_margin <= 0.0);
  }
}

TEST_CASE("weak residual") {
  const auto spec = ManifoldSpec::torus2();
  const int n = basis_size(spec);
  const auto ws = workspace(spec, {32, 32}, n, make_model("heat", spec));
  const double T = 1.0, dt = 1e-3;
  const auto traj = exact_heat(n, 1, dt, 1000, ws.basis().mu[1]);
  SpaceTimeTest phi{[&](double t) { return (T - t) * (T - t); }, [&](double t) { return -2.0 * (T - t); },
                    Eigen::VectorXd::Unit(n, 1)};
  const double r1 = weak_residual(ws, traj, phi);
  CHECK(r1 <= 1e-6);

  SpaceTimeTest zero{[](double) { return 0.0; }, [](double) { return 0.0; }, Eigen::VectorXd::Zero(n)};
  CHECK(weak_residual(ws, traj, zero) == 0.0);

  // a perturbed trajectory gives a residual linear in the test amplitude
  auto bad = traj;
  for (auto& s : bad) s.alpha[1] *= 1.0 + 0.1 * s.t;
  SpaceTimeTest phi3 = phi;
  phi3.psi *= 3.0;
  const double rb = weak_residual(ws, bad, phi), rb3 = weak_residual(ws, bad, phi3);
  CHECK(rb > 1e-3);
  CHECK(std::abs(rb3 - 3.0 * rb) <= 1e-12 * rb3);
}

TEST_CASE("entropy residual") {
  const auto spec = ManifoldSpec::sphere2();
  const auto heat = workspace(spec, {24, 48}, 16, make_model("heat", spec));
  const auto traj = exact_heat(16, 1, 1e-3, 500, heat.basis().mu[1]);
  const Entropy quad{[](double l) { return 0.5 * l * l; }, [](double) { return 1.0; }};
  const auto rep = entropy_residual(heat, traj, quad);
  CHECK(std::abs(rep.integral.back() - 0.5 * std::exp(-2.0 * 2.0 * 0.5)) <= 1e-8);
  for (double d : rep.defect) CHECK(std::abs(d) <= 1e-6);

  const auto comp = workspace(spec, {24, 48}, 16, make_model("compat_pair", spec), 0.01);
  const auto ctraj = rk4_trajectory(comp, random_coeffs(16, 11, 0.5), 1e-3, 200);
  const Entropy lin{[](double l) { return l; }, [](double) { return 0.0; }};
  const auto lrep = entropy_residual(comp, ctraj, lin);
  for (double d : lrep.defect) CHECK(std::abs(d) <= 1e-8);

  const auto t1 = ManifoldSpec::torus1();
  const auto badws = workspace(t1, {64, 1}, 11, make_model("compat_pair", t1, {{"beta", 0.0}, {"gamma", 1.0}}));
  CHECK_THROWS_AS(entropy_residual(badws, {{0.0, Eigen::VectorXd::Zero(11)}}, quad), Error);
}
