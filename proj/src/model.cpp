#include "pgal/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pgal {

namespace {

using std::numbers::pi;

template <class S>
void set_delta(ChartMatrix<S>& a, const S& scale, int dim) {
  a[0][0] = scale;
  if (dim == 2) a[1][1] = scale;
}

/// Divergence-free transport field per manifold.
template <class S>
std::array<S, 2> solenoidal_field(const ManifoldSpec& spec, const ChartPoint<S>& x) {
  using std::cos;
  using std::sin;
  switch (spec.kind) {
    case ManifoldKind::Torus1: return {S(1.0), S(0.0)};
    case ManifoldKind::Torus2: return {sin(x[1]), sin(x[0])};
    case ManifoldKind::Sphere2: return {S(0.0), cos(x[0])};
  }
  return {};
}

double solenoidal_sup(const ManifoldSpec& spec) {
  switch (spec.kind) {
    case ManifoldKind::Torus1: return 1.0;
    case ManifoldKind::Torus2: return std::numbers::sqrt2;
    case ManifoldKind::Sphere2: return 0.5;
  }
  return 0.0;
}

/// A field with nonzero divergence: sin x ∂x on tori, ∇cos θ on the sphere.
template <class S>
std::array<S, 2> compressible_field(const ManifoldSpec& spec, const ChartPoint<S>& x) {
  using std::sin;
  if (spec.kind == ManifoldKind::Sphere2) return {-sin(x[0]), S(0.0)};
  return {sin(x[0]), S(0.0)};
}

Parameters merge_params(const std::string& model, const Parameters& defaults, const Parameters& given) {
  Parameters out = defaults;
  for (const auto& [k, v] : given) {
    if (!defaults.count(k))
      throw Error(Errc::ConfigError, "model '" + model + "' has no parameter '" + k + "'");
    if (!std::isfinite(v)) throw Error(Errc::ConfigError, "parameter '" + k + "' is not finite");
    out[k] = v;
  }
  return out;
}

double range_sup(const LambdaRange& r) { return std::max(std::abs(r.lo), std::abs(r.hi)); }

class Heat : public ModelBase<Heat> {
 public:
  Heat(const ManifoldSpec& spec, const Parameters& p, LambdaRange range) : ModelBase(spec) {
    kappa_ = p.at("kappa");
    const double sd = std::sqrt(double(spec.dimension()));
    info_ = {"heat", p, true, kappa_, 2.0 * kappa_ * sd, kappa_ * sd, range};
  }
  template <class S>
  Coefficients<S> compute(const ChartPoint<S>&, const S& l) const {
    Coefficients<S> c;
    set_delta(c.diffusion, l * kappa_, spec_.dimension());
    return c;
  }

 private:
  double kappa_;
};

class AnisoLinear : public ModelBase<AnisoLinear> {
 public:
  AnisoLinear(const ManifoldSpec& spec, const Parameters& p, LambdaRange range) : ModelBase(spec) {
    d1_ = p.at("d1");
    d2_ = p.at("d2");
    gamma_ = p.at("gamma");
    beta_ = p.at("beta");
    const int d = spec.dimension();
    const double sd = std::sqrt(double(d));
    double c = d1_;
    double dn = d1_;
    if (spec.kind == ManifoldKind::Torus2) {
      c = std::min(d1_, d2_);
      dn = std::hypot(d1_, d2_);
    } else if (spec.kind == ManifoldKind::Sphere2) {
      dn = d1_ * std::numbers::sqrt2;
    }
    const double abound = dn + std::abs(gamma_) * d;
    info_ = {"aniso_linear", p, true, c,
             2.0 * abound + std::abs(gamma_) * d * (sd + 1.0) + std::abs(beta_) * solenoidal_sup(spec),
             abound, range};
  }
  template <class S>
  Coefficients<S> compute(const ChartPoint<S>& x, const S& l) const {
    using std::cos;
    using std::sin;
    Coefficients<S> c;
    const auto v = solenoidal_field(spec_, x);
    c.flux = {v[0] * l * beta_, v[1] * l * beta_};
    if (spec_.kind == ManifoldKind::Sphere2) {
      const S s = sin(x[0]);
      c.diffusion[0][0] = l * (d1_ + gamma_ * s * s);
      c.diffusion[1][1] = l * d1_;
      return c;
    }
    const S hx = cos(x[0]);
    if (spec_.kind == ManifoldKind::Torus1) {
      c.diffusion[0][0] = l * (d1_ + gamma_ * hx * hx);
      return c;
    }
    const S hy = cos(x[1]);
    c.diffusion[0][0] = l * (d1_ + gamma_ * hx * hx);
    c.diffusion[0][1] = l * (gamma_ * hx * hy);
    c.diffusion[1][0] = l * (gamma_ * hx * hy);
    c.diffusion[1][1] = l * (d2_ + gamma_ * hy * hy);
    return c;
  }

 private:
  double d1_, d2_, gamma_, beta_;
};

class BoundedNonlinear : public ModelBase<BoundedNonlinear> {
 public:
  BoundedNonlinear(const ManifoldSpec& spec, const Parameters& p, LambdaRange range) : ModelBase(spec) {
    kappa_ = p.at("kappa");
    beta_ = p.at("beta");
    const double sd = std::sqrt(double(spec.dimension()));
    info_ = {"bounded_nonlinear", p, false, kappa_,
             2.5 * kappa_ * sd + std::abs(beta_) * solenoidal_sup(spec), 1.5 * kappa_ * sd, range};
  }
  template <class S>
  Coefficients<S> compute(const ChartPoint<S>& x, const S& l) const {
    using std::atan;
    using std::tanh;
    Coefficients<S> c;
    const auto v = solenoidal_field(spec_, x);
    const S t = tanh(l) * beta_;
    c.flux = {v[0] * t, v[1] * t};
    set_delta(c.diffusion, (l + atan(l) * 0.5) * kappa_, spec_.dimension());
    return c;
  }

 private:
  double kappa_, beta_;
};

class Burgers : public ModelBase<Burgers> {
 public:
  Burgers(const ManifoldSpec& spec, const Parameters& p, LambdaRange range) : ModelBase(spec) {
    nu_ = p.at("nu");
    const double sd = std::sqrt(double(spec.dimension()));
    info_ = {"burgers", p, true, nu_, 0.5 * range_sup(range) + 2.0 * nu_ * sd, nu_ * sd, range};
  }
  template <class S>
  Coefficients<S> compute(const ChartPoint<S>&, const S& l) const {
    Coefficients<S> c;
    const S q = l * l * 0.5;
    if (spec_.kind == ManifoldKind::Sphere2)
      c.flux = {S(0.0), q};
    else
      c.flux = {q, S(0.0)};
    set_delta(c.diffusion, l * nu_, spec_.dimension());
    return c;
  }

 private:
  double nu_;
};

class CompatPair : public ModelBase<CompatPair> {
 public:
  CompatPair(const ManifoldSpec& spec, const Parameters& p, LambdaRange range) : ModelBase(spec) {
    kappa_ = p.at("kappa");
    beta_ = p.at("beta");
    gamma_ = p.at("gamma");
    const double sd = std::sqrt(double(spec.dimension()));
    const double r = range_sup(range);
    info_ = {"compat_pair", p, false, kappa_,
             std::abs(beta_) * r * solenoidal_sup(spec) + std::abs(gamma_) +
                 kappa_ * sd * (2.0 + 4.0 * r * r / 3.0),
             kappa_ * sd * (1.0 + r * r), range};
  }
  template <class S>
  Coefficients<S> compute(const ChartPoint<S>& x, const S& l) const {
    Coefficients<S> c;
    const auto v = solenoidal_field(spec_, x);
    const auto w = compressible_field(spec_, x);
    const S qv = l * l * beta_;
    const S qw = l * gamma_;
    c.flux = {v[0] * qv + w[0] * qw, v[1] * qv + w[1] * qw};
    set_delta(c.diffusion, (l + l * l * l / 3.0) * kappa_, spec_.dimension());
    return c;
  }

 private:
  double kappa_, beta_, gamma_;
};

class Truncated : public CoefficientModel {
 public:
  explicit Truncated(ModelPtr base) : CoefficientModel(base->spec()), base_(std::move(base)) {
    const auto& b = base_->info();
    info_ = b;
    info_.name = "truncated_" + b.name;
    info_.is_linear_diffusion = false;
    info_.parabolicity_c = 0.0;
    info_.growth_C = 2.5 * b.growth_C + 2.0 * b.derivative_bound;
  }
  Coefficients<double> evaluate(const ChartPoint<double>& x, double l) const override {
    return base_->evaluate(x, chi(l));
  }
  Coefficients<Jet1> evaluate(const ChartPoint<Jet1>& x, const Jet1& l) const override {
    return base_->evaluate(x, chi(l));
  }
  Coefficients<Jet2> evaluate(const ChartPoint<Jet2>& x, const Jet2& l) const override {
    return base_->evaluate(x, chi(l));
  }

 private:
  ModelPtr base_;
};

// -- noise --------------------------------------------------------------------------

class AdditiveMode : public NoiseModel {
 public:
  AdditiveMode(const ManifoldSpec& spec, double sigma)
      : spec_(spec), label_(enumerate_modes(spec, 2)[1]), sigma_(sigma) {}
  double phi(const Point& x, double) const override { return sigma_ * eval_mode(spec_, label_, x); }
  double phi_dlambda(const Point&, double) const override { return 0.0; }
  std::string name() const override { return "additive_mode"; }
  double sigma() const override { return sigma_; }

 private:
  ManifoldSpec spec_;
  ModeLabel label_;
  double sigma_;
};

class MultiplicativeBounded : public NoiseModel {
 public:
  MultiplicativeBounded(const ManifoldSpec& spec, double sigma)
      : spec_(spec), label_(enumerate_modes(spec, 2)[1]), sigma_(sigma) {}
  double phi(const Point& x, double l) const override {
    return sigma_ * l * eval_mode(spec_, label_, x) * cutoff(l);
  }
  double phi_dlambda(const Point& x, double l) const override {
    return sigma_ * eval_mode(spec_, label_, x) * (cutoff(l) + l * cutoff_derivative(l));
  }
  std::string name() const override { return "multiplicative_bounded"; }
  double sigma() const override { return sigma_; }

 private:
  static constexpr double kR = 2.0;
  static double cutoff(double l) {
    const double s = std::clamp((std::abs(l) - kR) / kR, 0.0, 1.0);
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  }
  static double cutoff_derivative(double l) {
    const double s = (std::abs(l) - kR) / kR;
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double d = 30.0 * s * s * (1.0 - s) * (1.0 - s) / kR;
    return l > 0 ? -d : d;
  }
  ManifoldSpec spec_;
  ModeLabel label_;
  double sigma_;
};

// -- standard form ------------------------------------------------------------------

template <class F>
class Density : public DiffusionDensity {
 public:
  explicit Density(F f) : f_(f) {}
  ChartMatrix<double> evaluate(const ChartPoint<double>& x, double z) const override { return f_(x, z); }
  ChartMatrix<Jet1> evaluate(const ChartPoint<Jet1>& x, const Jet1& z) const override { return f_(x, z); }
  ChartMatrix<Jet2> evaluate(const ChartPoint<Jet2>& x, const Jet2& z) const override { return f_(x, z); }

 private:
  F f_;
};

template <class S>
std::vector<double> flatten(const ChartMatrix<S>& a) {
  std::vector<double> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if constexpr (std::is_same_v<S, double>) {
        out.push_back(a[i][j]);
      } else {
        out.push_back(a[i][j].v);
        for (double d : a[i][j].d) out.push_back(d);
        for (double h : a[i][j].h) out.push_back(h);
      }
    }
  return out;
}

template <class S>
ChartMatrix<S> unflatten(const std::vector<double>& v) {
  ChartMatrix<S> a{};
  std::size_t p = 0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      if constexpr (std::is_same_v<S, double>) {
        a[i][j] = v[p++];
      } else {
        a[i][j].v = v[p++];
        for (double& d : a[i][j].d) d = v[p++];
        for (double& h : a[i][j].h) h = v[p++];
      }
    }
  return a;
}

class StandardForm : public CoefficientModel {
 public:
  StandardForm(std::shared_ptr<const DiffusionDensity> a, const ManifoldSpec& spec, double tol)
      : CoefficientModel(spec), a_(std::move(a)), tol_(tol) {
    info_.name = "standard_form";
    info_.growth_C = std::numeric_limits<double>::infinity();
    info_.derivative_bound = std::numeric_limits<double>::infinity();
  }

  Coefficients<double> evaluate(const ChartPoint<double>& x, double l) const override {
    Coefficients<double> c;
    c.diffusion = antiderivative(x, l);
    const auto div = div_at(x, l, false);
    c.flux = raise(x, div);
    return c;
  }

  Coefficients<Jet1> evaluate(const ChartPoint<Jet1>& xj, const Jet1& l) const override {
    const ChartPoint<double> x{xj[0].v, xj[1].v};
    const double l0 = l.v;
    const auto a0 = a_->evaluate(x, l0);
    const auto al = a_->evaluate(ChartPoint<Jet1>{Jet1(x[0]), Jet1(x[1])}, Jet1::variable(l0, 0));
    const auto big = antiderivative(x, l0);
    const Jet1 dl = l - l0;
    Coefficients<Jet1> c;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        c.diffusion[i][j] = Jet1(big[i][j]) + dl * a0[i][j] + dl * dl * (0.5 * al[i][j].d[0]);
    const auto f0 = raise(x, div_at(x, l0, false));
    const auto f1 = raise(x, div_at(x, l0, true));
    for (int i = 0; i < 2; ++i) {
      c.flux[i] = Jet1(f0[i]) + dl * f1[i];
      c.flux[i].h[0] = std::numeric_limits<double>::quiet_NaN();
    }
    return c;
  }

  Coefficients<Jet2> evaluate(const ChartPoint<Jet2>& x, const Jet2& l) const override {
    const double l0 = l.v;
    const auto big = antiderivative_jet(x, l0);
    const auto a0 = a_->evaluate(x, Jet2(l0));
    const ChartPoint<double> xv{x[0].v, x[1].v};
    const auto al = a_->evaluate(ChartPoint<Jet1>{Jet1(xv[0]), Jet1(xv[1])}, Jet1::variable(l0, 0));
    const Jet2 dl = l - l0;
    Coefficients<Jet2> c;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        c.diffusion[i][j] = big[i][j] + a0[i][j] * dl + dl * dl * (0.5 * al[i][j].d[0]);
    // the flux would need third chart derivatives of A
    c.flux = {Jet2(std::numeric_limits<double>::quiet_NaN()), Jet2(std::numeric_limits<double>::quiet_NaN())};
    return c;
  }

 private:
  ChartMatrix<double> antiderivative(const ChartPoint<double>& x, double l) const {
    if (l == 0.0) return {};
    auto f = [&](double z) { return flatten(a_->evaluate(x, z)); };
    return unflatten<double>(adaptive_simpson(f, 0.0, l, tol_));
  }

  ChartMatrix<Jet2> antiderivative_jet(const ChartPoint<Jet2>& x, double l) const {
    if (l == 0.0) return {};
    auto f = [&](double z) { return flatten(a_->evaluate(x, Jet2(z))); };
    return unflatten<Jet2>(adaptive_simpson(f, 0.0, l, tol_));
  }

  /// (Div A(·,λ))_i, or (Div a(·,λ))_i when `density` is set.
  std::array<double, 2> div_at(const ChartPoint<double>& x, double l, bool density) const {
    const Point p{x[0], x[1]};
    const auto xj = node_jets(p);
    const auto t = density ? a_->evaluate(xj, Jet2(l)) : antiderivative_jet(xj, l);
    const auto d = div_tensor_at(christoffel_jets(spec_, p), t);
    return {d[0].v, d[1].v};
  }

  std::array<double, 2> raise(const ChartPoint<double>& x, const std::array<double, 2>& w) const {
    const auto gi = inverse_metric_at<double>(spec_, x);
    return {gi[0][0] * w[0] + gi[0][1] * w[1], gi[1][0] * w[0] + gi[1][1] * w[1]};
  }

  std::shared_ptr<const DiffusionDensity> a_;
  double tol_;
};

void simpson_step(const std::function<std::vector<double>(double)>& f, double a, double b,
                  const std::vector<double>& fa, const std::vector<double>& fm,
                  const std::vector<double>& fb, const std::vector<double>& whole, double tol,
                  int depth, std::vector<double>& acc) {
  if (depth > 40) throw Error(Errc::QuadratureFailure, "adaptive Simpson exceeded depth 40");
  const double m = 0.5 * (a + b);
  const double h = b - a;
  const auto flm = f(0.5 * (a + m));
  const auto frm = f(0.5 * (m + b));
  const std::size_t n = fa.size();
  std::vector<double> left(n), right(n);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    left[i] = h / 12.0 * (fa[i] + 4.0 * flm[i] + fm[i]);
    right[i] = h / 12.0 * (fm[i] + 4.0 * frm[i] + fb[i]);
    const double e = std::abs(left[i] + right[i] - whole[i]);
    err = std::isfinite(e) ? std::max(err, e) : e;
  }
  if (!std::isfinite(err)) throw Error(Errc::QuadratureFailure, "nonfinite integrand");
  if (err <= 15.0 * tol) {
    for (std::size_t i = 0; i < n; ++i)
      acc[i] += left[i] + right[i] + (left[i] + right[i] - whole[i]) / 15.0;
    return;
  }
  simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, acc);
  simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, acc);
}

}  // namespace

Coefficients<Jet1> CoefficientModel::lambda_jet(const Point& x, double lambda) const {
  return evaluate(ChartPoint<Jet1>{Jet1(x[0]), Jet1(x[1])}, Jet1::variable(lambda, 0));
}

std::vector<std::string> model_names() {
  return {"heat", "aniso_linear", "bounded_nonlinear", "burgers", "compat_pair"};
}

ModelPtr make_model(const std::string& name, const ManifoldSpec& spec, const Parameters& params,
                    std::optional<LambdaRange> range) {
  const LambdaRange r = range.value_or(LambdaRange{});
  if (!(r.lo < r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi))
    throw Error(Errc::ConfigError, "lambda_range must be finite with lo < hi");
  auto positive = [&](const Parameters& p, const char* key) {
    if (!(p.at(key) > 0.0))
      throw Error(Errc::ConfigError, std::string("parameter '") + key + "' must be positive");
  };
  if (name == "heat") {
    const auto p = merge_params(name, {{"kappa", 1.0}}, params);
    positive(p, "kappa");
    return std::make_shared<Heat>(spec, p, r);
  }
  if (name == "aniso_linear") {
    const auto p = merge_params(name, {{"d1", 2.0}, {"d2", 1.0}, {"gamma", 0.5}, {"beta", 0.0}}, params);
    positive(p, "d1");
    positive(p, "d2");
    if (p.at("gamma") < 0.0) throw Error(Errc::ConfigError, "parameter 'gamma' must be nonnegative");
    return std::make_shared<AnisoLinear>(spec, p, r);
  }
  if (name == "bounded_nonlinear") {
    const auto p = merge_params(name, {{"kappa", 1.0}, {"beta", 0.5}}, params);
    positive(p, "kappa");
    return std::make_shared<BoundedNonlinear>(spec, p, r);
  }
  if (name == "burgers") {
    const auto p = merge_params(name, {{"nu", 0.1}}, params);
    positive(p, "nu");
    return std::make_shared<Burgers>(spec, p, r);
  }
  if (name == "compat_pair") {
    const auto p = merge_params(name, {{"kappa", 1.0}, {"beta", 0.5}, {"gamma", 0.0}}, params);
    positive(p, "kappa");
    return std::make_shared<CompatPair>(spec, p, r);
  }
  throw Error(Errc::ConfigError, "unknown model '" + name + "'");
}

std::vector<std::string> noise_names() { return {"additive_mode", "multiplicative_bounded"}; }

NoisePtr make_noise(const std::string& name, const ManifoldSpec& spec, double sigma) {
  if (!std::isfinite(sigma)) throw Error(Errc::ConfigError, "sigma must be finite");
  if (name == "additive_mode") return std::make_shared<AdditiveMode>(spec, sigma);
  if (name == "multiplicative_bounded") return std::make_shared<MultiplicativeBounded>(spec, sigma);
  throw Error(Errc::ConfigError, "unknown noise '" + name + "'");
}

double chi_derivative(double lambda) { return chi(Jet1::variable(lambda, 0)).d[0]; }

ModelPtr truncate(const ModelPtr& base) { return std::make_shared<Truncated>(base); }

std::shared_ptr<const DiffusionDensity> make_density(const std::string& name, const ManifoldSpec& spec) {
  const int dim = spec.dimension();
  if (name == "identity") {
    auto f = [dim]<class S>(const ChartPoint<S>&, const S&) {
      ChartMatrix<S> a{};
      set_delta(a, S(1.0), dim);
      return a;
    };
    return std::make_shared<Density<decltype(f)>>(f);
  }
  if (name == "arctan") {
    auto f = [dim]<class S>(const ChartPoint<S>&, const S& z) {
      ChartMatrix<S> a{};
      set_delta(a, S(1.0) / (z * z + 1.0), dim);
      return a;
    };
    return std::make_shared<Density<decltype(f)>>(f);
  }
  if (name == "zero") {
    auto f = []<class S>(const ChartPoint<S>&, const S&) { return ChartMatrix<S>{}; };
    return std::make_shared<Density<decltype(f)>>(f);
  }
  throw Error(Errc::ConfigError, "unknown diffusion density '" + name + "'");
}

ModelPtr from_standard_form(std::shared_ptr<const DiffusionDensity> a, const ManifoldSpec& spec,
                            double tolerance) {
  return std::make_shared<StandardForm>(std::move(a), spec, tolerance);
}

std::vector<double> adaptive_simpson(const std::function<std::vector<double>(double)>& f, double a,
                                     double b, double tolerance) {
  const auto fa = f(a);
  const auto fb = f(b);
  const auto fm = f(0.5 * (a + b));
  std::vector<double> whole(fa.size()), acc(fa.size(), 0.0);
  for (std::size_t i = 0; i < fa.size(); ++i) whole[i] = (b - a) / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
  simpson_step(f, a, b, fa, fm, fb, whole, tolerance, 0, acc);
  return acc;
}

ModelSamples sample_along(const CoefficientModel& model, const QuadratureGrid& grid,
                          const ScalarSamples& u) {
  if (u.at.size() != grid.size()) throw Error(Errc::LengthMismatch, "sample_along");
  ModelSamples s;
  s.flux = {std::vector<JetVector>(grid.size()), u.order};
  s.diffusion = {std::vector<JetTensor>(grid.size()), u.order};
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto c = model.evaluate(node_jets(grid.nodes[n]), u.at[n]);
    s.flux.at[n] = c.flux;
    s.diffusion.at[n] = c.diffusion;
  }
  return s;
}

ModelSamples sample_frozen(const CoefficientModel& model, const QuadratureGrid& grid, double lambda) {
  ScalarSamples u{std::vector<Jet2>(grid.size(), Jet2(lambda)), 2};
  return sample_along(model, grid, u);
}

}  // namespace pgal
