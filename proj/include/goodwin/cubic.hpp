#pragma once

// Roots of real monic cubics, and through them the eigenvalues of 3x3
// matrices. The primary route is a closed-form (Cardano / trigonometric)
// solution polished by Newton steps; the fallback is Francis double-shift QR
// on the balanced companion matrix.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>

#include "goodwin/errors.hpp"
#include "goodwin/model.hpp"

namespace goodwin {

using Complex = std::complex<double>;
using CubicRoots = std::array<Complex, 3>;

/// x^3 + c2 x^2 + c1 x + c0
struct MonicCubic {
  double c2{};
  double c1{};
  double c0{};

  double operator()(double x) const { return ((x + c2) * x + c1) * x + c0; }
  Complex operator()(Complex x) const { return ((x + c2) * x + c1) * x + c0; }
  double derivative(double x) const { return (3.0 * x + 2.0 * c2) * x + c1; }
};

/// det(lambda I - A) for a 3x3 matrix A.
inline MonicCubic characteristic_polynomial(const Matrix3& a) {
  const double trace = a[0][0] + a[1][1] + a[2][2];
  const double minors = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) + (a[0][0] * a[2][2] - a[0][2] * a[2][0]) +
                        (a[1][1] * a[2][2] - a[1][2] * a[2][1]);
  const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                     a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  return {-trace, minors, -det};
}

/// Real roots first (ascending), then complex roots by real part with the
/// positive imaginary part first.
inline void sort_roots(CubicRoots& roots) {
  std::sort(roots.begin(), roots.end(), [](const Complex& x, const Complex& y) {
    const bool rx = x.imag() == 0.0;
    const bool ry = y.imag() == 0.0;
    if (rx != ry) return rx;
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() > y.imag();
  });
}

namespace detail {

inline double polish_real_root(const MonicCubic& p, double x) {
  double fx = std::abs(p(x));
  for (int i = 0; i < 8 && fx > 0.0; ++i) {
    const double d = p.derivative(x);
    if (d == 0.0 || !std::isfinite(d)) break;
    const double next = x - p(x) / d;
    const double fn = std::abs(p(next));
    if (!(fn < fx)) break;
    x = next;
    fx = fn;
  }
  return x;
}

// Roots of x^2 - s x + P (sum s, product P).
inline std::array<Complex, 2> quadratic_from_sum_product(double s, double P) {
  const double half = 0.5 * s;
  const double disc = half * half - P;
  if (disc < 0.0) {
    const double im = std::sqrt(-disc);
    return {Complex(half, im), Complex(half, -im)};
  }
  const double q = half + std::copysign(std::sqrt(disc), half);
  if (q == 0.0) return {Complex(0.0, 0.0), Complex(0.0, 0.0)};
  return {Complex(q, 0.0), Complex(P / q, 0.0)};
}

}  // namespace detail

/// Closed-form roots. Throws EigenSolverError on non-finite intermediate
/// results.
inline CubicRoots solve_cubic_cardano(const MonicCubic& poly) {
  const double c2 = poly.c2;
  const double shift = c2 / 3.0;
  // depressed cubic t^3 + p t + q with x = t - c2/3
  const double p = poly.c1 - c2 * c2 / 3.0;
  const double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * poly.c1 / 3.0 + poly.c0;
  const double disc = 0.25 * q * q + p * p * p / 27.0;

  CubicRoots roots;
  if (disc > 0.0) {
    const double u = std::cbrt(-0.5 * q - std::copysign(std::sqrt(disc), q));
    const double v = u != 0.0 ? -p / (3.0 * u) : 0.0;
    const double r = detail::polish_real_root(poly, u + v - shift);
    // Deflate: remaining pair has sum -c2 - r and product -c0 / r.
    const double s = -c2 - r;
    const double P = r != 0.0 ? -poly.c0 / r : poly.c1 - r * s;
    const auto pair = detail::quadratic_from_sum_product(s, P);
    roots = {Complex(r, 0.0), pair[0], pair[1]};
  } else if (p == 0.0) {
    const double r = -shift;
    roots = {Complex(r, 0.0), Complex(r, 0.0), Complex(r, 0.0)};
  } else {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    constexpr double kThird = 2.0 * std::numbers::pi / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots[k] = Complex(detail::polish_real_root(poly, m * std::cos(phi - kThird * k) - shift), 0.0);
    }
  }
  for (const auto& z : roots) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw EigenSolverError("cubic root is not finite");
  }
  sort_roots(roots);
  return roots;
}

/// Diagonal similarity scaling (powers of two) that equalizes row and
/// column norms.
template <std::size_t N>
void balance(std::array<std::array<double, N>, N>& a) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < N; ++i) {
      double r = 0.0;
      double c = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        if (j != i) {
          c += std::abs(a[j][i]);
          r += std::abs(a[i][j]);
        }
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (std::size_t j = 0; j < N; ++j) a[i][j] *= g;
        for (std::size_t j = 0; j < N; ++j) a[j][i] *= f;
      }
    }
  }
}

/// Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.
/// Entries below the subdiagonal are ignored.
template <std::size_t N>
std::array<Complex, N> hessenberg_eigenvalues(std::array<std::array<double, N>, N> a) {
  static_assert(N >= 2);
  const int n = static_cast<int>(N);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::array<Complex, N> w{};

  double anorm = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a[i][j]);
  }

  int nn = n - 1;
  double t = 0.0;
  double p = 0.0;
  double q = 0.0;
  double r = 0.0;
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double ww = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l > 0; --l) {
        s = std::abs(a[l - 1][l - 1]) + std::abs(a[l][l]);
        if (s == 0.0) s = anorm;
        if (std::abs(a[l][l - 1]) <= eps * s) {
          a[l][l - 1] = 0.0;
          break;
        }
      }
      x = a[nn][nn];
      if (l == nn) {
        w[nn--] = Complex(x + t, 0.0);
      } else {
        y = a[nn - 1][nn - 1];
        ww = a[nn][nn - 1] * a[nn - 1][nn];
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + ww;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + std::copysign(z, p);
            w[nn - 1] = w[nn] = Complex(x + z, 0.0);
            if (z != 0.0) w[nn] = Complex(x - ww / z, 0.0);
          } else {
            w[nn - 1] = Complex(x + p, z);
            w[nn] = Complex(x + p, -z);
          }
          nn -= 2;
        } else {
          if (its == 60) throw EigenSolverError("QR iteration did not converge");
          if (its == 10 || its == 20 || its == 40) {
            t += x;
            for (int i = 0; i <= nn; ++i) a[i][i] -= x;
            s = std::abs(a[nn][nn - 1]) + std::abs(a[nn - 1][nn - 2]);
            y = x = 0.75 * s;
            ww = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a[m][m];
            r = x - z;
            s = y - z;
            p = (r * s - ww) / a[m + 1][m] + a[m][m + 1];
            q = a[m + 1][m + 1] - z - r - s;
            r = a[m + 2][m + 1];
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a[m][m - 1]) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a[m - 1][m - 1]) + std::abs(z) + std::abs(a[m + 1][m + 1]));
            if (u <= eps * v) break;
          }
          for (int i = m; i < nn - 1; ++i) {
            a[i + 2][i] = 0.0;
            if (i != m) a[i + 2][i - 1] = 0.0;
          }
          for (int k = m; k < nn; ++k) {
            if (k != m) {
              p = a[k][k - 1];
              q = a[k + 1][k - 1];
              r = 0.0;
              if (k + 1 != nn) r = a[k + 2][k - 1];
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = std::copysign(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == m) {
                if (l != m) a[k][k - 1] = -a[k][k - 1];
              } else {
                a[k][k - 1] = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a[k][j] + q * a[k + 1][j];
                if (k + 1 != nn) {
                  p += r * a[k + 2][j];
                  a[k + 2][j] -= p * z;
                }
                a[k + 1][j] -= p * y;
                a[k][j] -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a[i][k] + y * a[i][k + 1];
                if (k + 1 != nn) {
                  p += z * a[i][k + 2];
                  a[i][k + 2] -= p * r;
                }
                a[i][k + 1] -= p * q;
                a[i][k] -= p;
              }
            }
          }
        }
      }
    } while (l + 1 < nn);
  }
  return w;
}

/// Roots as eigenvalues of the balanced companion matrix.
inline CubicRoots companion_roots(const MonicCubic& poly) {
  Matrix3 c{{{-poly.c2, -poly.c1, -poly.c0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};
  balance(c);
  CubicRoots roots = hessenberg_eigenvalues(c);
  for (auto& z : roots) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw EigenSolverError("companion eigenvalue is not finite");
    if (z.imag() == 0.0) z = Complex(detail::polish_real_root(poly, z.real()), 0.0);
  }
  sort_roots(roots);
  return roots;
}

/// Closed form first; companion-matrix QR if that fails or leaves a large
/// residual.
inline CubicRoots cubic_roots(const MonicCubic& poly) {
  if (!std::isfinite(poly.c2) || !std::isfinite(poly.c1) || !std::isfinite(poly.c0)) {
    throw EigenSolverError("cubic coefficients are not finite");
  }
  const double scale = 1.0 + std::abs(poly.c2) + std::abs(poly.c1) + std::abs(poly.c0);
  try {
    CubicRoots roots = solve_cubic_cardano(poly);
    bool ok = true;
    for (const auto& z : roots) {
      const double mag = std::max(1.0, std::abs(z));
      if (std::abs(poly(z)) > 1e-8 * scale * mag * mag * mag) ok = false;
    }
    if (ok) return roots;
  } catch (const EigenSolverError&) {
  }
  return companion_roots(poly);
}

inline CubicRoots eigenvalues(const Matrix3& a) { return cubic_roots(characteristic_polynomial(a)); }

}  // namespace goodwin
