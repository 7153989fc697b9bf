#pragma once

#include <array>
#include <cmath>

namespace surroundgeo {

// Forward-mode dual number with N derivative slots. Residual functors are
// templated on the scalar so one implementation yields both values and
// exact Jacobians.
template <int N>
struct Jet {
  double a = 0.0;
  std::array<double, N> v{};

  Jet() = default;
  Jet(double value) : a(value) {}  // NOLINT: implicit by design
  static Jet variable(double value, int slot) {
    Jet j(value);
    j.v[slot] = 1.0;
    return j;
  }

  Jet operator-() const {
    Jet r(-a);
    for (int i = 0; i < N; ++i) r.v[i] = -v[i];
    return r;
  }

  Jet& operator+=(const Jet& o) {
    a += o.a;
    for (int i = 0; i < N; ++i) v[i] += o.v[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    a -= o.a;
    for (int i = 0; i < N; ++i) v[i] -= o.v[i];
    return *this;
  }
  Jet& operator*=(const Jet& o) {
    for (int i = 0; i < N; ++i) v[i] = v[i] * o.a + a * o.v[i];
    a *= o.a;
    return *this;
  }
  Jet& operator/=(const Jet& o) {
    const double inv = 1.0 / o.a;
    a *= inv;
    for (int i = 0; i < N; ++i) v[i] = (v[i] - a * o.v[i]) * inv;
    return *this;
  }
};

template <int N>
inline Jet<N> operator+(Jet<N> x, const Jet<N>& y) { return x += y; }
template <int N>
inline Jet<N> operator-(Jet<N> x, const Jet<N>& y) { return x -= y; }
template <int N>
inline Jet<N> operator*(Jet<N> x, const Jet<N>& y) { return x *= y; }
template <int N>
inline Jet<N> operator/(Jet<N> x, const Jet<N>& y) { return x /= y; }

template <int N>
inline Jet<N> operator+(double x, Jet<N> y) { return Jet<N>(x) + y; }
template <int N>
inline Jet<N> operator-(double x, const Jet<N>& y) { return Jet<N>(x) - y; }
template <int N>
inline Jet<N> operator*(double x, Jet<N> y) { return Jet<N>(x) * y; }
template <int N>
inline Jet<N> operator/(double x, const Jet<N>& y) { return Jet<N>(x) / y; }

template <int N>
inline bool operator<(const Jet<N>& x, const Jet<N>& y) { return x.a < y.a; }
template <int N>
inline bool operator>(const Jet<N>& x, const Jet<N>& y) { return x.a > y.a; }

template <int N>
inline Jet<N> sqrt(const Jet<N>& x) {
  Jet<N> r(std::sqrt(x.a));
  const double d = 0.5 / r.a;
  for (int i = 0; i < N; ++i) r.v[i] = d * x.v[i];
  return r;
}

template <int N>
inline Jet<N> sin(const Jet<N>& x) {
  Jet<N> r(std::sin(x.a));
  const double d = std::cos(x.a);
  for (int i = 0; i < N; ++i) r.v[i] = d * x.v[i];
  return r;
}

template <int N>
inline Jet<N> cos(const Jet<N>& x) {
  Jet<N> r(std::cos(x.a));
  const double d = -std::sin(x.a);
  for (int i = 0; i < N; ++i) r.v[i] = d * x.v[i];
  return r;
}

template <int N>
inline Jet<N> atan2(const Jet<N>& y, const Jet<N>& x) {
  Jet<N> r(std::atan2(y.a, x.a));
  const double d = 1.0 / (x.a * x.a + y.a * y.a);
  for (int i = 0; i < N; ++i) r.v[i] = d * (x.a * y.v[i] - y.a * x.v[i]);
  return r;
}

template <int N>
inline Jet<N> abs(const Jet<N>& x) { return x.a < 0.0 ? -x : x; }

inline double value_of(double x) { return x; }
template <int N>
inline double value_of(const Jet<N>& x) { return x.a; }

using std::abs;
using std::atan2;
using std::cos;
using std::sin;
using std::sqrt;

}  // namespace surroundgeo
