#pragma once

#include <array>
#include <cmath>

namespace sphvar {

inline constexpr int kMaxJetVars = 8;

/// Truncated multivariate Taylor expansion used for forward-mode
/// differentiation of closed-form maps.
///
/// Order 1 carries the value and gradient; order 2 also carries the symmetric
/// Hessian, stored as a packed lower triangle. `n` is the number of active
/// variables; a jet with n == 0 is a constant.
template <int Order>
class Jet {
  static_assert(Order == 1 || Order == 2, "only first and second order jets");

 public:
  static constexpr int kOrder = Order;
  static constexpr int kPacked = kMaxJetVars * (kMaxJetVars + 1) / 2;

  double v = 0.0;
  int n = 0;
  std::array<double, kMaxJetVars> g{};
  std::array<double, Order == 2 ? kPacked : 1> h{};

  Jet() = default;
  Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly

  static Jet variable(double value, int nvars, int index) {
    Jet j(value);
    j.n = nvars;
    j.g[index] = 1.0;
    return j;
  }

  static constexpr int packed(int i, int j) {
    return i >= j ? i * (i + 1) / 2 + j : j * (j + 1) / 2 + i;
  }

  double hess(int i, int j) const {
    if constexpr (Order == 2) {
      return h[packed(i, j)];
    } else {
      return 0.0;
    }
  }
  void set_hess(int i, int j, double value) {
    if constexpr (Order == 2) h[packed(i, j)] = value;
  }

  Jet& operator+=(const Jet& b) {
    v += b.v;
    if (b.n > n) n = b.n;
    for (int i = 0; i < b.n; ++i) g[i] += b.g[i];
    if constexpr (Order == 2) {
      const int p = b.n * (b.n + 1) / 2;
      for (int k = 0; k < p; ++k) h[k] += b.h[k];
    }
    return *this;
  }
  Jet& operator-=(const Jet& b) {
    v -= b.v;
    if (b.n > n) n = b.n;
    for (int i = 0; i < b.n; ++i) g[i] -= b.g[i];
    if constexpr (Order == 2) {
      const int p = b.n * (b.n + 1) / 2;
      for (int k = 0; k < p; ++k) h[k] -= b.h[k];
    }
    return *this;
  }
  Jet& operator*=(double s) {
    v *= s;
    for (int i = 0; i < n; ++i) g[i] *= s;
    if constexpr (Order == 2) {
      const int p = n * (n + 1) / 2;
      for (int k = 0; k < p; ++k) h[k] *= s;
    }
    return *this;
  }
  Jet& operator+=(double s) {
    v += s;
    return *this;
  }
  Jet& operator-=(double s) {
    v -= s;
    return *this;
  }

  friend Jet operator-(Jet a) {
    a *= -1.0;
    return a;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double s) { return a += s; }
  friend Jet operator+(double s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, double s) { return a -= s; }
  friend Jet operator-(double s, Jet a) {
    a *= -1.0;
    return a += s;
  }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    r.n = a.n > b.n ? a.n : b.n;
    r.v = a.v * b.v;
    for (int i = 0; i < r.n; ++i) r.g[i] = a.v * b.g[i] + b.v * a.g[i];
    if constexpr (Order == 2) {
      for (int i = 0; i < r.n; ++i) {
        for (int j = 0; j <= i; ++j) {
          const int k = packed(i, j);
          r.h[k] = a.v * b.h[k] + b.v * a.h[k] + a.g[i] * b.g[j] + a.g[j] * b.g[i];
        }
      }
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
  friend Jet operator/(const Jet& a, double s) { return a * (1.0 / s); }
  friend Jet operator/(double s, const Jet& b) { return s * reciprocal(b); }

  /// Composes a univariate function with derivatives (f0, f1, f2) at a.v.
  friend Jet chain(const Jet& a, double f0, double f1, double f2) {
    Jet r;
    r.n = a.n;
    r.v = f0;
    for (int i = 0; i < a.n; ++i) r.g[i] = f1 * a.g[i];
    if constexpr (Order == 2) {
      for (int i = 0; i < a.n; ++i) {
        for (int j = 0; j <= i; ++j) {
          const int k = packed(i, j);
          r.h[k] = f1 * a.h[k] + f2 * a.g[i] * a.g[j];
        }
      }
    } else {
      (void)f2;
    }
    return r;
  }

  friend Jet reciprocal(const Jet& a) {
    const double inv = 1.0 / a.v;
    return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
  }
  friend Jet sqrt(const Jet& a) {
    const double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
  }
  friend Jet sin(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return chain(a, s, c, -s);
  }
  friend Jet cos(const Jet& a) {
    const double s = std::sin(a.v), c = std::cos(a.v);
    return chain(a, c, -s, -c);
  }
  friend Jet atan(const Jet& a) {
    const double d = 1.0 / (1.0 + a.v * a.v);
    return chain(a, std::atan(a.v), d, -2.0 * a.v * d * d);
  }
};

using Jet1 = Jet<1>;
using Jet2 = Jet<2>;

namespace detail {

// cos(sqrt(s)) and sin(sqrt(s))/sqrt(s) are entire in s; the series branch
// covers the neighbourhood of 0 where the closed forms cancel.
struct EntireSeries {
  double f0, f1, f2;
};

inline EntireSeries sinc_sqrt_series(double s) {
  if (std::abs(s) < 1e-2) {
    return {1.0 - s / 6.0 + s * s / 120.0 - s * s * s / 5040.0 + s * s * s * s / 362880.0,
            -1.0 / 6.0 + s / 60.0 - s * s / 1680.0 + s * s * s / 90720.0,
            1.0 / 60.0 - s / 840.0 + s * s / 30240.0};
  }
  const double r = std::sqrt(s);
  const double sinc = std::sin(r) / r;
  const double c = std::cos(r);
  const double d1 = (c - sinc) / (2.0 * s);
  const double dc = -0.5 * sinc;
  const double d2 = (dc - d1) / (2.0 * s) - (c - sinc) / (2.0 * s * s);
  return {sinc, d1, d2};
}

inline EntireSeries cos_sqrt_series(double s) {
  const EntireSeries sinc = sinc_sqrt_series(s);
  const double c = std::abs(s) < 1e-2
                       ? 1.0 - s / 2.0 + s * s / 24.0 - s * s * s / 720.0 + s * s * s * s / 40320.0
                       : std::cos(std::sqrt(s));
  return {c, -0.5 * sinc.f0, -0.5 * sinc.f1};
}

}  // namespace detail

inline double cos_sqrt(double s) { return detail::cos_sqrt_series(s).f0; }
inline double sinc_sqrt(double s) { return detail::sinc_sqrt_series(s).f0; }

template <int Order>
Jet<Order> cos_sqrt(const Jet<Order>& a) {
  const auto f = detail::cos_sqrt_series(a.v);
  return chain(a, f.f0, f.f1, f.f2);
}

template <int Order>
Jet<Order> sinc_sqrt(const Jet<Order>& a) {
  const auto f = detail::sinc_sqrt_series(a.v);
  return chain(a, f.f0, f.f1, f.f2);
}

inline double value_of(double x) { return x; }
template <int Order>
double value_of(const Jet<Order>& x) {
  return x.v;
}

}  // namespace sphvar
