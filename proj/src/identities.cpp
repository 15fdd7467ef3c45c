#include "pgal/identities.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pgal/geometry.hpp"

namespace pgal {

RandomFields::RandomFields(const ManifoldSpec& spec, std::uint64_t seed) : spec_(spec), state_(seed) {
  switch (spec.kind) {
    case ManifoldKind::Torus1: band_ = 7; break;
    case ManifoldKind::Torus2: band_ = 9; break;
    case ManifoldKind::Sphere2: band_ = 9; break;
  }
  modes_ = enumerate_modes(spec, band_);
}

std::vector<double> RandomFields::draw(int count) {
  std::mt19937_64 rng(state_);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(count);
  for (double& x : c) x = u(rng);
  state_ = rng();
  return c;
}

Jet2 RandomFields::scalar_at(const std::vector<double>& c, const ChartPoint<Jet2>& x) const {
  Jet2 s(0.0);
  for (int k = 0; k < band_; ++k) s += c[k] * eval_mode(spec_, modes_[k], x);
  return s;
}

JetVector RandomFields::vector_at(const std::vector<double>& c, const ChartPoint<Jet2>& x) const {
  // c holds 2 or 6 blocks of band_ coefficients, one scalar multiplier per frame field
  auto coef = [&](int block) {
    return scalar_at(std::vector<double>(c.begin() + block * band_, c.begin() + (block + 1) * band_), x);
  };
  if (spec_.kind == ManifoldKind::Torus1) return {coef(0), Jet2(0.0)};
  if (spec_.kind == ManifoldKind::Torus2) return {coef(0), coef(1)};
  const Jet2 st = sin(x[0]), ct = cos(x[0]), sp = sin(x[1]), cp = cos(x[1]);
  const Jet2 cot = ct / st;
  const std::array<JetVector, 6> frame{{
      {-sp, -(cot * cp)},           // rotation about the x-axis
      {cp, -(cot * sp)},            // rotation about the y-axis
      {Jet2(0.0), Jet2(1.0)},       // rotation about the z-axis
      {ct * cp, -(sp / st)},        // ∇(sinθ cosφ)
      {ct * sp, cp / st},           // ∇(sinθ sinφ)
      {-st, Jet2(0.0)},             // ∇cosθ
  }};
  JetVector v{Jet2(0.0), Jet2(0.0)};
  for (int q = 0; q < 6; ++q) {
    const Jet2 m = coef(q);
    v[0] += m * frame[q][0];
    v[1] += m * frame[q][1];
  }
  return v;
}

ScalarSamples RandomFields::scalar(const QuadratureGrid& grid) {
  last_ = draw(band_);
  ScalarSamples s{std::vector<Jet2>(grid.size()), 2};
  for (std::size_t n = 0; n < grid.size(); ++n) s.at[n] = scalar_at(last_, node_jets(grid.nodes[n]));
  return s;
}

VectorSamples RandomFields::vector(const QuadratureGrid& grid) {
  const int blocks = spec_.kind == ManifoldKind::Sphere2 ? 6 : 2;
  const auto c = draw(blocks * band_);
  VectorSamples v{std::vector<JetVector>(grid.size()), 2};
  for (std::size_t n = 0; n < grid.size(); ++n) v.at[n] = vector_at(c, node_jets(grid.nodes[n]));
  return v;
}

TensorSamples RandomFields::tensor(const QuadratureGrid& grid) {
  // A = s·δ + X ⊗ Y♭
  const auto s = scalar(grid);
  const auto x = vector(grid);
  const auto y = vector(grid);
  const int dim = spec_.dimension();
  TensorSamples t{std::vector<JetTensor>(grid.size()), 2};
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto g = metric_jets(spec_, grid.nodes[n]);
    JetVector yflat{Jet2(0.0), Jet2(0.0)};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) yflat[i] += g[i][j] * y.at[n][j];
    JetTensor a{};
    for (int i = 0; i < dim; ++i) {
      a[i][i] += s.at[n];
      for (int j = 0; j < dim; ++j) a[i][j] += x.at[n][i] * yflat[j];
    }
    t.at[n] = a;
  }
  return t;
}

TensorSamples transpose(const QuadratureGrid& grid, const TensorSamples& a) {
  TensorSamples t{std::vector<JetTensor>(grid.size()), a.order};
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto g = metric_jets(grid.spec, grid.nodes[n]);
    const auto gi = inverse_metric_jets(grid.spec, grid.nodes[n]);
    JetTensor r{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          for (int l = 0; l < 2; ++l) r[i][j] += gi[i][k] * a.at[n][l][k] * g[l][j];
    t.at[n] = r;
  }
  return t;
}

IdentityResiduals run_identity_suite(const ManifoldSpec& spec, std::array<int, 2> resolution, int trials,
                                     std::uint64_t seed) {
  const auto grid = build_grid(spec, resolution);
  RandomFields rf(spec, seed);
  const auto basis = build_basis(spec, grid, rf.band());
  IdentityResiduals out;
  const std::size_t nn = grid.size();
  std::vector<double> tmp(nn);

  for (int trial = 0; trial < trials; ++trial) {
    const auto f = rf.scalar(grid);
    const auto fc = rf.last_scalar_coefficients();
    const auto a = rf.tensor(grid);
    const auto divA = div_tensor(grid, a);
    const auto dd = div_div(grid, a);
    const auto ddt = div_div(grid, transpose(grid, a));

    // ∫ f DivDiv A + ∫ (Div A)(∇f)
    for (std::size_t n = 0; n < nn; ++n) {
      double grad_pair = 0.0;
      for (int i = 0; i < 2; ++i) {
        double gf = 0.0;
        for (int j = 0; j < 2; ++j) gf += grid.inverse_metric[n](i, j) * f.at[n].d[j];
        grad_pair += divA.at[n][i].v * gf;
      }
      tmp[n] = f.at[n].v * dd.at[n].v + grad_pair;
    }
    out.integration_by_parts = std::max(out.integration_by_parts, std::abs(integrate(grid, tmp)));

    // ∫ f DivDiv A − ∫ tr(A ∘ H̃^f), with H̃^f from the basis tables
    for (std::size_t n = 0; n < nn; ++n) {
      double tr = 0.0;
      for (int k = 0; k < basis.n; ++k)
        for (int p = 0; p < 2; ++p)
          for (int q = 0; q < 2; ++q) tr += fc[k] * a.at[n][p][q].v * basis.hessian[q][p](n, k);
      tmp[n] = f.at[n].v * dd.at[n].v - tr;
    }
    out.trace_identity = std::max(out.trace_identity, std::abs(integrate(grid, tmp)));

    // DivDiv(uδ) = Δu pointwise, with u = f and Δu = −Σ μ_k c_k e_k
    TensorSamples ud{std::vector<JetTensor>(nn), 2};
    for (std::size_t n = 0; n < nn; ++n) {
      ud.at[n][0][0] = f.at[n];
      if (spec.dimension() == 2) ud.at[n][1][1] = f.at[n];
    }
    const auto lap = div_div(grid, ud);
    for (std::size_t n = 0; n < nn; ++n) {
      double ref = 0.0;
      for (int k = 0; k < basis.n; ++k) ref -= basis.mu[k] * fc[k] * basis.value(n, k);
      out.laplace_reduction = std::max(out.laplace_reduction, std::abs(lap.at[n].v - ref));
      out.transpose_symmetry = std::max(out.transpose_symmetry, std::abs(dd.at[n].v - ddt.at[n].v));
    }

    // ∫ Div X = 0
    const auto x = rf.vector(grid);
    out.stokes = std::max(out.stokes, std::abs(integrate(grid, values_of(div_vector(grid, x)))));
  }
  return out;
}

}  // namespace pgal
