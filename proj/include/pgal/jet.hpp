#pragma once

#include <array>
#include <cmath>

namespace pgal {

/// Second-order truncated Taylor expansion in N independent variables.
///
/// Carries a value, its gradient and its (symmetric) Hessian through
/// arithmetic, so that closed-form expressions written once as templates
/// yield exact partial derivatives up to order two.
template <int N>
struct Jet {
  double v = 0.0;
  std::array<double, N> d{};
  std::array<double, N * N> h{};

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT(google-explicit-constructor)

  static Jet variable(double value, int index) {
    Jet j(value);
    j.d[index] = 1.0;
    return j;
  }

  double hess(int i, int j) const { return h[i * N + j]; }
  double& hess(int i, int j) { return h[i * N + j]; }

  // f(a) given f, f', f'' at a.v
  Jet chain(double f0, double f1, double f2) const {
    Jet r(f0);
    for (int i = 0; i < N; ++i) r.d[i] = f1 * d[i];
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) r.h[i * N + j] = f1 * h[i * N + j] + f2 * d[i] * d[j];
    return r;
  }

  Jet& operator+=(const Jet& o) {
    v += o.v;
    for (int i = 0; i < N; ++i) d[i] += o.d[i];
    for (int i = 0; i < N * N; ++i) h[i] += o.h[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    v -= o.v;
    for (int i = 0; i < N; ++i) d[i] -= o.d[i];
    for (int i = 0; i < N * N; ++i) h[i] -= o.h[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(const Jet& a) {
    Jet r;
    r -= a;
    return r;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.v * b.v);
    for (int i = 0; i < N; ++i) r.d[i] = a.v * b.d[i] + b.v * a.d[i];
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        r.h[i * N + j] = a.v * b.h[i * N + j] + b.v * a.h[i * N + j] + a.d[i] * b.d[j] +
                         b.d[i] * a.d[j];
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    const double inv = 1.0 / b.v;
    return a * b.chain(inv, -inv * inv, 2.0 * inv * inv * inv);
  }
};

template <int N>
Jet<N> sin(const Jet<N>& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return a.chain(s, c, -s);
}
template <int N>
Jet<N> cos(const Jet<N>& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return a.chain(c, -s, -c);
}
template <int N>
Jet<N> exp(const Jet<N>& a) {
  const double e = std::exp(a.v);
  return a.chain(e, e, e);
}
template <int N>
Jet<N> log(const Jet<N>& a) {
  return a.chain(std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v));
}
template <int N>
Jet<N> sqrt(const Jet<N>& a) {
  const double s = std::sqrt(a.v);
  return a.chain(s, 0.5 / s, -0.25 / (s * a.v));
}
template <int N>
Jet<N> atan(const Jet<N>& a) {
  const double q = 1.0 / (1.0 + a.v * a.v);
  return a.chain(std::atan(a.v), q, -2.0 * a.v * q * q);
}
template <int N>
Jet<N> tanh(const Jet<N>& a) {
  const double t = std::tanh(a.v);
  const double s = 1.0 - t * t;
  return a.chain(t, s, -2.0 * t * s);
}

/// First partial ∂_i a as a jet that is exact to first order; its Hessian is unknown and zeroed.
template <int N>
Jet<N> partial(const Jet<N>& a, int i) {
  Jet<N> r(a.d[i]);
  for (int j = 0; j < N; ++j) r.d[j] = a.h[i * N + j];
  return r;
}

inline double value_of(double x) { return x; }
template <int N>
double value_of(const Jet<N>& x) {
  return x.v;
}

/// Lifts a jet-valued expression to a constant of another scalar type.
template <class S>
S constant(double x) {
  return S(x);
}

using Jet1 = Jet<1>;
using Jet2 = Jet<2>;

}  // namespace pgal
