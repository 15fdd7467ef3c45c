#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pgal/checks.hpp"
#include "pgal/fields.hpp"
#include "pgal/identities.hpp"
#include "pgal/model.hpp"

using namespace pgal;
using std::numbers::pi;

namespace {

template <class F>
VectorSamples vector_field(const QuadratureGrid& g, F f) {
  VectorSamples v{std::vector<JetVector>(g.size()), 2};
  for (std::size_t n = 0; n < g.size(); ++n) v.at[n] = f(node_jets(g.nodes[n]));
  return v;
}

template <class F>
TensorSamples tensor_field(const QuadratureGrid& g, F f) {
  TensorSamples t{std::vector<JetTensor>(g.size()), 2};
  for (std::size_t n = 0; n < g.size(); ++n) t.at[n] = f(node_jets(g.nodes[n]));
  return t;
}

ScalarSamples mode_samples(const QuadratureGrid& g, const EigenBasis& b, int k) {
  ScalarSamples s{std::vector<Jet2>(g.size()), 2};
  for (std::size_t n = 0; n < g.size(); ++n) s.at[n] = b.jet(n, k);
  return s;
}

double max_abs_diff(const ScalarSamples& s, const QuadratureGrid& g, auto oracle) {
  double e = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) e = std::max(e, std::abs(s.at[n].v - oracle(g.nodes[n])));
  return e;
}

/// A′ = diag(1, −1) on T²: not parabolic.
class Saddle : public ModelBase<Saddle> {
 public:
  explicit Saddle(const ManifoldSpec& s) : ModelBase(s) {
    info_.name = "saddle";
    info_.parabolicity_c = 0.1;
  }
  template <class S>
  Coefficients<S> compute(const ChartPoint<S>&, const S& l) const {
    Coefficients<S> c;
    c.diffusion[0][0] = l;
    c.diffusion[1][1] = -l;
    return c;
  }
};

}  // namespace

TEST_CASE("div_vector") {
  const auto t1 = build_grid(ManifoldSpec::torus1(), {64, 0});
  auto d = div_vector(t1, vector_field(t1, [](auto x) { return JetVector{sin(x[0]), Jet2(0.0)}; }));
  CHECK(max_abs_diff(d, t1, [](auto p) { return std::cos(p[0]); }) < 1e-10);
  CHECK(d.order == 1);

  const auto s2 = build_grid(ManifoldSpec::sphere2(), {16, 32});
  d = div_vector(s2, vector_field(s2, [](auto) { return JetVector{Jet2(0.0), Jet2(1.0)}; }));
  CHECK(max_abs_diff(d, s2, [](auto) { return 0.0; }) < 1e-12);
  // Div ∇cosθ = −2cosθ
  d = div_vector(s2, vector_field(s2, [](auto x) { return JetVector{-sin(x[0]), Jet2(0.0)}; }));
  CHECK(max_abs_diff(d, s2, [](auto p) { return -2.0 * std::cos(p[0]); }) < 1e-12);

  const auto t2 = build_grid(ManifoldSpec::torus2(), {16, 16});
  d = div_vector(t2, vector_field(t2, [](auto x) { return JetVector{cos(x[1]), Jet2(2.0)}; }));
  CHECK(max_abs_diff(d, t2, [](auto) { return 0.0; }) < 1e-14);

  VectorSamples flat = vector_field(t1, [](auto x) { return JetVector{sin(x[0]), Jet2(0.0)}; });
  flat.order = 0;
  CHECK_THROWS_AS(div_vector(t1, flat), Error);
}

TEST_CASE("div_oneform") {
  const auto t1s = ManifoldSpec::torus1();
  const auto t1 = build_grid(t1s, {64, 0});
  auto d = div_oneform(t1, vector_field(t1, [](auto x) { return JetVector{cos(x[0]), Jet2(0.0)}; }));
  CHECK(max_abs_diff(d, t1, [](auto p) { return -std::sin(p[0]); }) < 1e-12);

  // sinθcosθ dθ = d(sin²θ/2), so Div = Δ(sin²θ/2) = 3cos²θ − 1
  const auto s2s = ManifoldSpec::sphere2();
  const auto s2 = build_grid(s2s, {16, 32});
  d = div_oneform(s2, vector_field(s2, [](auto x) { return JetVector{sin(x[0]) * cos(x[0]), Jet2(0.0)}; }));
  CHECK(max_abs_diff(d, s2, [](auto p) { return 3 * std::pow(std::cos(p[0]), 2) - 1; }) < 1e-12);

  const auto b = build_basis(s2s, s2, 16);
  double err = 0.0;
  for (int k = 0; k < b.n; ++k) {
    OneFormSamples w{std::vector<JetVector>(s2.size()), 1};
    for (std::size_t n = 0; n < s2.size(); ++n) {
      const Jet2 e = b.jet(n, k);
      w.at[n] = {partial(e, 0), partial(e, 1)};
    }
    const auto lap = div_oneform(s2, w);
    for (std::size_t n = 0; n < s2.size(); ++n)
      err = std::max(err, std::abs(lap.at[n].v + b.mu[k] * b.value(n, k)));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("div_tensor") {
  const auto s2s = ManifoldSpec::sphere2();
  const auto s2 = build_grid(s2s, {16, 32});
  // u δ → du with u = cosθ + sinθ sinφ
  auto t = tensor_field(s2, [](auto x) {
    const Jet2 u = cos(x[0]) + sin(x[0]) * sin(x[1]);
    JetTensor a{};
    a[0][0] = u;
    a[1][1] = u;
    return a;
  });
  auto d = div_tensor(s2, t);
  double err = 0.0;
  for (std::size_t n = 0; n < s2.size(); ++n) {
    const auto& p = s2.nodes[n];
    err = std::max(err, std::abs(d.at[n][0].v - (-std::sin(p[0]) + std::cos(p[0]) * std::sin(p[1]))));
    err = std::max(err, std::abs(d.at[n][1].v - std::sin(p[0]) * std::cos(p[1])));
  }
  CHECK(err < 1e-12);

  t = tensor_field(s2, [](auto) {
    JetTensor a{};
    a[0][0] = Jet2(1.0);
    a[1][1] = Jet2(1.0);
    return a;
  });
  d = div_tensor(s2, t);
  err = 0.0;
  for (const auto& v : d.at) err = std::max({err, std::abs(v[0].v), std::abs(v[1].v)});
  CHECK(err < 1e-14);

  const auto t2 = build_grid(ManifoldSpec::torus2(), {32, 32});
  t = tensor_field(t2, [](auto x) {
    JetTensor a{};
    a[0][0] = cos(x[0] + 2.0 * x[1]);
    a[0][1] = sin(x[0]);
    a[1][0] = cos(3.0 * x[1]);
    a[1][1] = sin(x[0] - x[1]);
    return a;
  });
  d = div_tensor(t2, t);
  err = 0.0;
  for (std::size_t n = 0; n < t2.size(); ++n) {
    const double x = t2.nodes[n][0], y = t2.nodes[n][1];
    err = std::max(err, std::abs(d.at[n][0].v - (-std::sin(x + 2 * y) - 3 * std::sin(3 * y))));
    err = std::max(err, std::abs(d.at[n][1].v - (std::cos(x) - std::cos(x - y))));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("div_div") {
  for (const auto& spec : {ManifoldSpec::torus1(), ManifoldSpec::torus2(), ManifoldSpec::sphere2()}) {
    const auto grid = build_grid(spec, {16, 32});
    const auto b = build_basis(spec, grid, 9);
    const auto heat = make_model("heat", spec);
    double err = 0.0;
    for (int k = 0; k < b.n; ++k) {
      const auto s = sample_along(*heat, grid, mode_samples(grid, b, k));
      const auto dd = div_div(grid, s.diffusion);
      for (std::size_t n = 0; n < grid.size(); ++n)
        err = std::max(err, std::abs(dd.at[n].v + b.mu[k] * b.value(n, k)));
    }
    CHECK(err < 1e-8);
  }

  const auto t2s = ManifoldSpec::torus2();
  const auto t2 = build_grid(t2s, {16, 16});
  const auto aniso = make_model("aniso_linear", t2s, {{"d1", 3.0}, {"d2", 1.5}, {"gamma", 0.0}});
  ScalarSamples u{std::vector<Jet2>(t2.size()), 2};
  for (std::size_t n = 0; n < t2.size(); ++n) u.at[n] = cos(node_jets(t2.nodes[n])[0]);
  auto dd = div_div(t2, sample_along(*aniso, t2, u).diffusion);
  CHECK(max_abs_diff(dd, t2, [](auto p) { return -3.0 * std::cos(p[0]); }) < 1e-12);

  auto c = tensor_field(t2, [](auto) {
    JetTensor a{};
    a[0][0] = Jet2(2.0);
    a[0][1] = Jet2(-1.0);
    a[1][1] = Jet2(0.5);
    return a;
  });
  CHECK(max_abs_diff(div_div(t2, c), t2, [](auto) { return 0.0; }) == 0.0);
  c.order = 1;
  CHECK_THROWS_AS(div_div(t2, c), Error);
}

TEST_CASE("tensor norm of the identity is sqrt(d)") {
  const auto s2 = build_grid(ManifoldSpec::sphere2(), {8, 16});
  CHECK(tensor_norm(s2.metric[3], s2.inverse_metric[3], Mat2::Identity()) == doctest::Approx(std::sqrt(2.0)));
  const auto t1 = build_grid(ManifoldSpec::torus1(), {8, 0});
  Mat2 d1 = Mat2::Zero();
  d1(0, 0) = 1.0;
  CHECK(tensor_norm(t1.metric[0], t1.inverse_metric[0], d1) == doctest::Approx(1.0));
}

TEST_CASE("parabolicity check") {
  const auto t2s = ManifoldSpec::torus2();
  const auto t2 = build_grid(t2s, {8, 8});
  const std::vector<double> ls{-2, -1, 0, 1, 2};
  auto r = check_parabolicity(*make_model("heat", t2s), t2, ls);
  CHECK(r.pass);
  CHECK(r.min_eigenvalue == doctest::Approx(1.0));
  r = check_parabolicity(*make_model("aniso_linear", t2s, {{"gamma", 0.0}}), t2, ls);
  CHECK(r.pass);
  CHECK(r.min_eigenvalue == doctest::Approx(1.0));
  r = check_parabolicity(*make_model("aniso_linear", t2s), t2, ls);
  CHECK(r.pass);
  CHECK(r.symmetry_residual < 1e-12);
  r = check_parabolicity(Saddle(t2s), t2, ls);
  CHECK_FALSE(r.pass);
  CHECK(r.min_eigenvalue == doctest::Approx(-1.0));

  const auto s2s = ManifoldSpec::sphere2();
  const auto s2 = build_grid(s2s, {8, 16});
  r = check_parabolicity(*make_model("aniso_linear", s2s), s2, ls);
  CHECK(r.pass);
  CHECK(r.min_eigenvalue == doctest::Approx(2.0));
  r = check_parabolicity(*make_model("bounded_nonlinear", s2s, {{"kappa", 0.5}}), s2, ls);
  CHECK(r.pass);
  CHECK(r.min_eigenvalue == doctest::Approx(0.5 * (1.0 + 0.5 / 5.0)));
}

TEST_CASE("growth check") {
  for (const auto& spec : {ManifoldSpec::torus1(), ManifoldSpec::torus2(), ManifoldSpec::sphere2()}) {
    const auto grid = build_grid(spec, {8, 16});
    auto heat = make_model("heat", spec, {{"kappa", 0.7}});
    auto ls = default_lambda_samples(heat->info());
    auto r = check_growth(*heat, grid, ls);
    CHECK(r.pass);
    CHECK(r.empirical_C < 2 * 0.7 * std::sqrt(double(spec.dimension())));
    CHECK(r.empirical_C > 0.9 * 2 * 0.7 * std::sqrt(double(spec.dimension())));

    for (const auto& name : {"aniso_linear", "bounded_nonlinear"}) {
      auto m = make_model(name, spec);
      CHECK_MESSAGE(check_growth(*m, grid, default_lambda_samples(m->info())).pass, name);
    }

    auto burgers = make_model("burgers", spec);
    r = check_growth(*burgers, grid, default_lambda_samples(burgers->info()));
    CHECK_FALSE(r.pass);
    CHECK(r.outer_doubling_ratio > 3.0);

    auto compat = make_model("compat_pair", spec);
    CHECK_FALSE(check_growth(*compat, grid, default_lambda_samples(compat->info())).pass);
    auto tr = truncate(compat);
    r = check_growth(*tr, grid, default_lambda_samples(tr->info()));
    CHECK(r.pass);
    CHECK(r.outer_doubling_ratio <= 1.0 + 1e-12);
  }
}

TEST_CASE("geometry compatibility") {
  const std::vector<double> ls{-2, -1, 0, 0.5, 1, 3};
  for (const auto& spec : {ManifoldSpec::torus1(), ManifoldSpec::torus2(), ManifoldSpec::sphere2()}) {
    const auto grid = build_grid(spec, {16, 32});
    CHECK(check_geometry_compat(*make_model("compat_pair", spec), grid, ls).pass);
    CHECK(check_geometry_compat(*make_model("heat", spec), grid, ls).pass);
    CHECK(check_geometry_compat(*truncate(make_model("compat_pair", spec)), grid, ls).pass);
  }
  const auto t2s = ManifoldSpec::torus2();
  CHECK(check_geometry_compat(*make_model("burgers", t2s), build_grid(t2s, {16, 16}), ls).pass);

  // f = λ sin x ∂x, A ∝ δ: residual ‖λ cos x‖ = |λ|√π
  const auto t1s = ManifoldSpec::torus1();
  const auto t1 = build_grid(t1s, {32, 0});
  const auto bad = make_model("compat_pair", t1s, {{"beta", 0.0}, {"gamma", 1.0}});
  const auto r = check_geometry_compat(*bad, t1, ls);
  CHECK_FALSE(r.pass);
  CHECK(r.max_residual == doctest::Approx(3.0 * std::sqrt(pi)).epsilon(1e-12));
  CHECK(r.worst_lambda == 3.0);

  const auto s2s = ManifoldSpec::sphere2();
  CHECK_FALSE(check_geometry_compat(*make_model("aniso_linear", s2s), build_grid(s2s, {16, 32}), ls).pass);
}

TEST_CASE("truncation") {
  for (double l = -2.0; l <= 3.0; l += 1e-3) CHECK(chi_derivative(l) >= 0.0);
  CHECK(chi(0.5) == 0.5);
  CHECK(chi(10.0) == 1.5);
  CHECK(chi(-7.0) == -0.5);
  // C² at the blend points
  for (double p : {-1.0, 0.0, 1.0, 2.0}) {
    const auto lo = chi(Jet1::variable(p - 1e-9, 0));
    const auto hi = chi(Jet1::variable(p + 1e-9, 0));
    CHECK(std::abs(lo.v - hi.v) < 1e-8);
    CHECK(std::abs(lo.d[0] - hi.d[0]) < 1e-7);
    CHECK(std::abs(lo.h[0] - hi.h[0]) < 1e-6);
  }

  const auto spec = ManifoldSpec::torus2();
  const auto base = make_model("compat_pair", spec);
  const auto tr = truncate(base);
  const ChartPoint<double> x{0.3, 1.7};
  const auto a = base->evaluate(x, 0.5);
  const auto b = tr->evaluate(x, 0.5);
  CHECK(a.flux == b.flux);
  CHECK(a.diffusion == b.diffusion);
  const auto c = tr->evaluate(x, 10.0);
  const auto d = base->evaluate(x, 1.5);
  CHECK(c.flux == d.flux);
  CHECK(c.diffusion == d.diffusion);
  CHECK(tr->info().name == "truncated_compat_pair");
}

TEST_CASE("standard form") {
  const auto spec = ManifoldSpec::sphere2();
  const ChartPoint<double> x{0.7, 2.0};
  auto m = from_standard_form(make_density("identity", spec), spec);
  for (double l : {-1.5, 0.0, 0.3, 2.0}) {
    const auto c = m->evaluate(x, l);
    CHECK(c.diffusion[0][0] == doctest::Approx(l).epsilon(1e-12));
    CHECK(c.diffusion[1][1] == doctest::Approx(l).epsilon(1e-12));
    CHECK(c.diffusion[0][1] == 0.0);
    CHECK(std::abs(c.flux[0]) < 1e-12);
    CHECK(std::abs(c.flux[1]) < 1e-12);
  }
  m = from_standard_form(make_density("arctan", spec), spec);
  for (double l : {-3.0, -0.2, 0.9, 4.0}) {
    const auto c = m->evaluate(x, l);
    CHECK(std::abs(c.diffusion[0][0] - std::atan(l)) < 1e-9);
    const auto j = m->lambda_jet({x[0], x[1]}, l);
    CHECK(j.diffusion[0][0].d[0] == doctest::Approx(1.0 / (1.0 + l * l)).epsilon(1e-12));
    CHECK(j.diffusion[0][0].h[0] == doctest::Approx(-2.0 * l / std::pow(1.0 + l * l, 2)).epsilon(1e-12));
  }
  m = from_standard_form(make_density("zero", spec), spec);
  const auto c = m->evaluate(x, 2.5);
  CHECK(c.diffusion[0][0] == 0.0);
  CHECK(c.flux[0] == 0.0);

  auto rough = [](double) -> std::vector<double> { return {std::numeric_limits<double>::quiet_NaN()}; };
  CHECK_THROWS_AS(adaptive_simpson(rough, 0.0, 1.0, 1e-10), Error);
  auto kink = [](double z) -> std::vector<double> { return {z < 0.3 ? 0.0 : 1.0}; };
  CHECK_THROWS_AS(adaptive_simpson(kink, 0.0, 1.0, 1e-300), Error);
  auto cubic = [](double z) -> std::vector<double> { return {z * z * z, 1.0}; };
  const auto v = adaptive_simpson(cubic, 0.0, 2.0, 1e-12);
  CHECK(v[0] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("model registry") {
  const auto spec = ManifoldSpec::torus1();
  CHECK_THROWS_AS(make_model("nope", spec), Error);
  CHECK_THROWS_AS(make_model("heat", spec, {{"nu", 1.0}}), Error);
  CHECK_THROWS_AS(make_model("heat", spec, {{"kappa", -1.0}}), Error);
  CHECK_THROWS_AS(make_model("heat", spec, {}, LambdaRange{1.0, 0.0}), Error);
  for (const auto& n : model_names()) CHECK(make_model(n, spec)->info().name == n);
  CHECK(make_model("heat", spec)->info().is_linear_diffusion);
  CHECK(make_model("burgers", spec)->info().is_linear_diffusion);
  CHECK_FALSE(make_model("bounded_nonlinear", spec)->info().is_linear_diffusion);

  // linear diffusion: A(λ) = λ A(1) exactly
  const auto t2s = ManifoldSpec::torus2();
  const auto m = make_model("aniso_linear", t2s);
  const ChartPoint<double> x{1.1, 0.4};
  const auto a1 = m->evaluate(x, 1.0).diffusion;
  const auto a3 = m->evaluate(x, 3.0).diffusion;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(a3[i][j] == doctest::Approx(3.0 * a1[i][j]).epsilon(1e-15));
}

TEST_CASE("noise models") {
  const auto spec = ManifoldSpec::torus1();
  const auto add = make_noise("additive_mode", spec, 0.3);
  CHECK(add->phi({1.0, 0.0}, 5.0) == doctest::Approx(0.3 * std::sin(1.0) / std::sqrt(pi)));
  CHECK(add->phi_dlambda({1.0, 0.0}, 5.0) == 0.0);
  const auto mul = make_noise("multiplicative_bounded", spec, 0.3);
  CHECK(mul->phi({1.0, 0.0}, 0.5) == doctest::Approx(0.15 * std::sin(1.0) / std::sqrt(pi)));
  CHECK(mul->phi({1.0, 0.0}, 4.0) == 0.0);
  CHECK(mul->phi({1.0, 0.0}, -4.5) == 0.0);
  const double h = 1e-6;
  for (double l : {0.5, 2.5, -3.1})
    CHECK(mul->phi_dlambda({1.0, 0.0}, l) ==
          doctest::Approx((mul->phi({1.0, 0.0}, l + h) - mul->phi({1.0, 0.0}, l - h)) / (2 * h)).epsilon(1e-6));
  CHECK_THROWS_AS(make_noise("pink", spec, 1.0), Error);
}

TEST_CASE("identity suite on every manifold") {
  const struct {
    ManifoldSpec spec;
    std::array<int, 2> res;
  } cases[] = {{ManifoldSpec::torus1(), {64, 0}},
               {ManifoldSpec::torus2(), {32, 32}},
               {ManifoldSpec::sphere2(), {16, 32}}};
  for (const auto& c : cases) {
    const auto r = run_identity_suite(c.spec, c.res, 2, 11);
    CHECK(r.integration_by_parts < 1e-8);
    CHECK(r.trace_identity < 1e-8);
    CHECK(r.laplace_reduction < 1e-8);
    CHECK(r.stokes < 1e-8);
    CHECK(r.transpose_symmetry < 1e-8);
  }
}
