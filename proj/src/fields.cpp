#include "pgal/fields.hpp"

#include <cmath>

namespace pgal {

namespace {

void require_order(int have, int need, const char* what) {
  if (have < need)
    throw Error(Errc::MissingPartials, std::string(what) + " needs samples with derivative order " +
                                           std::to_string(need));
}

}  // namespace

ChristoffelJets christoffel_jets(const Christoffel& gamma, const ChristoffelDerivative& dgamma) {
  ChristoffelJets out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        Jet2 g(gamma[i][j][k]);
        g.d = {dgamma[0][i][j][k], dgamma[1][i][j][k]};
        out[i][j][k] = g;
      }
  return out;
}

ChristoffelJets christoffel_jets(const ManifoldSpec& spec, const Point& x) {
  Christoffel g;
  ChristoffelDerivative dg;
  christoffel_at(spec, x, g, dg);
  return christoffel_jets(g, dg);
}

ChartPoint<Jet2> node_jets(const Point& p) {
  return {Jet2::variable(p[0], 0), Jet2::variable(p[1], 1)};
}

JetTensor inverse_metric_jets(const ManifoldSpec& spec, const Point& x) {
  return inverse_metric_at(spec, node_jets(x));
}

JetTensor metric_jets(const ManifoldSpec& spec, const Point& x) {
  return metric_at(spec, node_jets(x));
}

Jet2 div_vector_at(const ChristoffelJets& gamma, const JetVector& x) {
  Jet2 r = partial(x[0], 0) + partial(x[1], 1);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 2; ++j) r += gamma[j][k][j] * x[k];
  return r;
}

Jet2 div_oneform_at(const JetTensor& ginv, const ChristoffelJets& gamma, const JetVector& w) {
  Jet2 r(0.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      r += ginv[i][j] * partial(w[j], i);
      for (int k = 0; k < 2; ++k) r -= gamma[k][i][j] * ginv[i][j] * w[k];
    }
  return r;
}

JetVector div_tensor_at(const ChristoffelJets& gamma, const JetTensor& t) {
  JetVector r{Jet2(0.0), Jet2(0.0)};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      r[i] += partial(t[j][i], j);
      for (int l = 0; l < 2; ++l) {
        r[i] += gamma[j][j][l] * t[l][i];
        r[i] -= gamma[l][j][i] * t[j][l];
      }
    }
  }
  return r;
}

ScalarSamples div_vector(const QuadratureGrid& grid, const VectorSamples& x) {
  require_order(x.order, 1, "div_vector");
  if (x.at.size() != grid.size()) throw Error(Errc::LengthMismatch, "div_vector");
  ScalarSamples out{std::vector<Jet2>(grid.size()), x.order - 1};
  for (std::size_t n = 0; n < grid.size(); ++n)
    out.at[n] = div_vector_at(christoffel_jets(grid.christoffel[n], grid.christoffel_derivative[n]),
                              x.at[n]);
  return out;
}

ScalarSamples div_oneform(const QuadratureGrid& grid, const OneFormSamples& w) {
  require_order(w.order, 1, "div_oneform");
  if (w.at.size() != grid.size()) throw Error(Errc::LengthMismatch, "div_oneform");
  ScalarSamples out{std::vector<Jet2>(grid.size()), w.order - 1};
  for (std::size_t n = 0; n < grid.size(); ++n)
    out.at[n] = div_oneform_at(inverse_metric_jets(grid.spec, grid.nodes[n]),
                               christoffel_jets(grid.christoffel[n], grid.christoffel_derivative[n]),
                               w.at[n]);
  return out;
}

OneFormSamples div_tensor(const QuadratureGrid& grid, const TensorSamples& t) {
  require_order(t.order, 1, "div_tensor");
  if (t.at.size() != grid.size()) throw Error(Errc::LengthMismatch, "div_tensor");
  OneFormSamples out{std::vector<JetVector>(grid.size()), t.order - 1};
  for (std::size_t n = 0; n < grid.size(); ++n)
    out.at[n] = div_tensor_at(christoffel_jets(grid.christoffel[n], grid.christoffel_derivative[n]),
                              t.at[n]);
  return out;
}

ScalarSamples div_div(const QuadratureGrid& grid, const TensorSamples& t) {
  require_order(t.order, 2, "div_div");
  return div_oneform(grid, div_tensor(grid, t));
}

double vector_norm(const Mat2& g, const std::array<double, 2>& x) {
  const Eigen::Vector2d v(x[0], x[1]);
  return std::sqrt(std::max(0.0, v.dot(g * v)));
}

double oneform_norm(const Mat2& ginv, const std::array<double, 2>& w) {
  const Eigen::Vector2d v(w[0], w[1]);
  return std::sqrt(std::max(0.0, v.dot(ginv * v)));
}

double tensor_norm(const Mat2& g, const Mat2& ginv, const Mat2& a) {
  return std::sqrt(std::max(0.0, (a.transpose() * g * a * ginv).trace()));
}

Mat2 to_mat(const ChartMatrix<double>& a) {
  Mat2 m;
  m << a[0][0], a[0][1], a[1][0], a[1][1];
  return m;
}

Mat2 values_of(const JetTensor& a) {
  Mat2 m;
  m << a[0][0].v, a[0][1].v, a[1][0].v, a[1][1].v;
  return m;
}

std::array<double, 2> values_of(const JetVector& x) { return {x[0].v, x[1].v}; }

std::vector<double> values_of(const ScalarSamples& s) {
  std::vector<double> out(s.at.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s.at[i].v;
  return out;
}

}  // namespace pgal
