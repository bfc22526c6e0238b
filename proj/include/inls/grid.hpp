#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "inls/linalg.hpp"

namespace inls {

using cplx = std::complex<double>;

enum class Geometry { RadialD, Cartesian1D };

inline const char* to_string(Geometry g) {
  return g == Geometry::RadialD ? "radial-d" : "cartesian-1d";
}

namespace detail {

/// 12-point Gauss-Legendre rule on [-1, 1].
inline constexpr double kGL12X[12] = {
    -0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
    -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
    0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
    0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
inline constexpr double kGL12W[12] = {
    0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
    0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
    0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
    0.1600783285433462, 0.1069393259953184, 0.0471753363865118};

inline double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Moments m_i = int_{a}^{b} c r^e ((r - rc)/h)^i dr, i = 0..deg, for cells on
/// the positive axis. Exact expansion near the origin (where r^e may be
/// singular but powers stay same-magnitude), Gauss-Legendre elsewhere.
inline void cell_moments_pos(double a, double b, double rc, double h, double e,
                             double c, int deg, double* mu) {
  const bool integer_e = std::abs(e - std::round(e)) < 1e-12 && e >= 0;
  if (integer_e) {
    // expand (rc + h t)^e exactly; t = (r - rc)/h in [-1/2, 1/2]
    const int ei = static_cast<int>(std::round(e));
    const double ta = (a - rc) / h, tb = (b - rc) / h;
    for (int i = 0; i <= deg; ++i) {
      double acc = 0.0;
      for (int p = 0; p <= ei; ++p) {
        const int m = i + p;
        const double tint =
            (std::pow(tb, m + 1) - std::pow(ta, m + 1)) / (m + 1);
        acc += binom(ei, p) * std::pow(rc, ei - p) * std::pow(h, p) * tint;
      }
      mu[i] = c * h * acc;
    }
    return;
  }
  if (a <= 4.0 * h) {
    // exact power-function antiderivatives; all terms are O(h^{e+i+1})
    for (int i = 0; i <= deg; ++i) {
      double acc = 0.0;
      for (int p = 0; p <= i; ++p) {
        const double ex = e + p + 1.0;
        const double integral = (std::pow(b, ex) - std::pow(a, ex)) / ex;
        acc += binom(i, p) * std::pow(-rc, i - p) * integral;
      }
      mu[i] = c * acc / std::pow(h, i);
    }
    return;
  }
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i <= deg; ++i) mu[i] = 0.0;
  for (int g = 0; g < 12; ++g) {
    const double r = mid + half * kGL12X[g];
    const double w = half * kGL12W[g] * c * std::pow(r, e);
    const double t = (r - rc) / h;
    double tp = 1.0;
    for (int i = 0; i <= deg; ++i) {
      mu[i] += w * tp;
      tp *= t;
    }
  }
}

}  // namespace detail

/// Radial (or 1D Cartesian) quadrature grid on offset-uniform nodes
/// r_j = (j + 1/2) dr, so the origin is never sampled. Quadrature weights come
/// from product integration: the measure c_d r^{d-1} dr (or |x|^{-b}-weighted
/// variants) is integrated exactly over each cell against a degree-6 local
/// interpolant, which keeps smooth integrals accurate to O(dr^7) and makes the
/// total weight reproduce the ball volume exactly.
class Grid {
public:
  Geometry geometry = Geometry::RadialD;
  int dim = 1;
  double r_max = 0.0;
  int n = 0;
  double dr = 0.0;
  double sphere_area = 2.0;  // c_d = 2 pi^{d/2} / Gamma(d/2); 1 for cartesian
  std::vector<double> nodes;
  std::vector<double> weights;  // volume-measure weights

  static std::shared_ptr<const Grid> radial(int dim, double r_max, int n) {
    return std::make_shared<const Grid>(Geometry::RadialD, dim, r_max, n);
  }
  static std::shared_ptr<const Grid> cartesian1d(double x_max, int n) {
    return std::make_shared<const Grid>(Geometry::Cartesian1D, 1, x_max, n);
  }

  Grid(Geometry geom, int d, double rmax, int count)
      : geometry(geom), dim(d), r_max(rmax), n(count) {
    if (n < 16) throw std::invalid_argument("grid: need at least 16 nodes");
    if (!(r_max > 0)) throw std::invalid_argument("grid: r_max must be > 0");
    if (geometry == Geometry::Cartesian1D) {
      if (d != 1) throw std::invalid_argument("grid: cartesian geometry is 1D");
      if (n % 2 != 0)
        throw std::invalid_argument("grid: cartesian node count must be even");
      sphere_area = 1.0;
      dr = 2.0 * r_max / n;
      nodes.resize(n);
      for (int j = 0; j < n; ++j) nodes[j] = -r_max + (j + 0.5) * dr;
    } else {
      if (d < 1) throw std::invalid_argument("grid: dimension must be >= 1");
      sphere_area = 2.0 * std::pow(std::numbers::pi, 0.5 * d) /
                    std::tgamma(0.5 * d);
      dr = r_max / n;
      nodes.resize(n);
      for (int j = 0; j < n; ++j) nodes[j] = (j + 0.5) * dr;
    }
    weights = product_weights(0.0);
    build_derivative();
    build_stiffness();
  }

  /// Product-integration weights for the measure c_d r^{d-1-b} dr
  /// (|x|^{-b} dx for the cartesian line). b = 0 gives the volume weights.
  std::vector<double> product_weights(double b) const {
    const double e = geometry == Geometry::Cartesian1D
                         ? -b
                         : static_cast<double>(dim - 1) - b;
    std::vector<double> w(n, 0.0);
    double mu[7];
    for (int j = 0; j < n; ++j) {
      const double rc = nodes[j];
      double a, bnd;
      if (geometry == Geometry::Cartesian1D) {
        a = -r_max + j * dr;
        bnd = a + dr;
      } else {
        a = j * dr;
        bnd = a + dr;
      }
      // one-sided degree-6 windows produce oscillating (negative) aggregate
      // weights; clamped cells fall back to 5-point windows
      const bool interior = (j - 3 >= 0) && (j + 3 <= n - 1);
      const int width = interior ? 7 : 5;
      const int deg = width - 1;
      if (geometry == Geometry::Cartesian1D && bnd <= 0.0) {
        // mirror the cell onto the positive axis; odd moments flip sign
        detail::cell_moments_pos(-bnd, -a, -rc, dr, e, sphere_area, deg, mu);
        for (int i = 1; i <= deg; i += 2) mu[i] = -mu[i];
      } else {
        detail::cell_moments_pos(a, bnd, rc, dr, e, sphere_area, deg, mu);
      }
      const int m0 = std::clamp(j - width / 2, 0, n - width);
      std::vector<double> vand(width * width);
      for (int i = 0; i < width; ++i)
        for (int k = 0; k < width; ++k)
          vand[i * width + k] = std::pow(static_cast<double>(m0 + k - j), i);
      std::vector<double> omega =
          solve_dense(std::move(vand), std::vector<double>(mu, mu + width));
      for (int k = 0; k < width; ++k) w[m0 + k] += omega[k];
    }
    return w;
  }

  /// Fourth-order first derivative; even reflection through the origin for
  /// radial data, one-sided closure at the remaining boundaries.
  template <typename V>
  std::vector<V> derivative(const std::vector<V>& u) const {
    return deriv_.multiply(u);
  }

  const BandedMatrix<double>& derivative_matrix() const { return deriv_; }

  /// K = D^T diag(weights) D; the weak form of -Laplace restricted to radial
  /// data. Symmetric positive semidefinite, so Crank-Nicolson built on it
  /// conserves the weighted norm exactly.
  const BandedMatrix<double>& stiffness_matrix() const { return stiff_; }

  /// 6-point Lagrange interpolation of grid samples at an off-grid point.
  /// Radial grids use the even extension through the origin; points beyond
  /// the outer boundary evaluate to zero.
  template <typename V>
  V interpolate(const std::vector<V>& u, double x) const {
    if (geometry == Geometry::RadialD) {
      const double r = std::abs(x);
      if (r > r_max) return V(0);
      if (r < nodes[2] + dr) {
        // symmetric stencil across the origin keeps even accuracy
        const double xs[6] = {-nodes[2], -nodes[1], -nodes[0],
                              nodes[0],  nodes[1],  nodes[2]};
        const V vs[6] = {u[2], u[1], u[0], u[0], u[1], u[2]};
        return lagrange6(xs, vs, r);
      }
      int j0 = static_cast<int>(std::floor((r - nodes[0]) / dr)) - 2;
      j0 = std::clamp(j0, 0, n - 6);
      double xs[6];
      V vs[6];
      for (int k = 0; k < 6; ++k) {
        xs[k] = nodes[j0 + k];
        vs[k] = u[j0 + k];
      }
      return lagrange6(xs, vs, r);
    }
    if (x < -r_max || x > r_max) return V(0);
    int j0 = static_cast<int>(std::floor((x - nodes[0]) / dr)) - 2;
    j0 = std::clamp(j0, 0, n - 6);
    double xs[6];
    V vs[6];
    for (int k = 0; k < 6; ++k) {
      xs[k] = nodes[j0 + k];
      vs[k] = u[j0 + k];
    }
    return lagrange6(xs, vs, x);
  }

  bool compatible(const Grid& other) const {
    return geometry == other.geometry && dim == other.dim && n == other.n &&
           r_max == other.r_max;
  }

private:
  template <typename V>
  static V lagrange6(const double* xs, const V* vs, double x) {
    V acc(0);
    for (int k = 0; k < 6; ++k) {
      double lk = 1.0;
      for (int m = 0; m < 6; ++m)
        if (m != k) lk *= (x - xs[m]) / (xs[k] - xs[m]);
      acc += vs[k] * lk;
    }
    return acc;
  }

  void build_derivative() {
    deriv_ = BandedMatrix<double>(n, 4, 4);
    const double s = 1.0 / (12.0 * dr);
    for (int j = 2; j < n - 2; ++j) {
      deriv_.at(j, j - 2) = s;
      deriv_.at(j, j - 1) = -8.0 * s;
      deriv_.at(j, j + 1) = 8.0 * s;
      deriv_.at(j, j + 2) = -s;
    }
    if (geometry == Geometry::RadialD) {
      // ghost values from the even extension: u(-r_k) = u(r_k)
      deriv_.at(0, 0) = -8.0 * s;
      deriv_.at(0, 1) = 9.0 * s;
      deriv_.at(0, 2) = -s;
      deriv_.at(1, 0) = -7.0 * s;
      deriv_.at(1, 2) = 8.0 * s;
      deriv_.at(1, 3) = -s;
    } else {
      deriv_.at(0, 0) = -25.0 * s;
      deriv_.at(0, 1) = 48.0 * s;
      deriv_.at(0, 2) = -36.0 * s;
      deriv_.at(0, 3) = 16.0 * s;
      deriv_.at(0, 4) = -3.0 * s;
      deriv_.at(1, 0) = -3.0 * s;
      deriv_.at(1, 1) = -10.0 * s;
      deriv_.at(1, 2) = 18.0 * s;
      deriv_.at(1, 3) = -6.0 * s;
      deriv_.at(1, 4) = s;
    }
    deriv_.at(n - 1, n - 1) = 25.0 * s;
    deriv_.at(n - 1, n - 2) = -48.0 * s;
    deriv_.at(n - 1, n - 3) = 36.0 * s;
    deriv_.at(n - 1, n - 4) = -16.0 * s;
    deriv_.at(n - 1, n - 5) = 3.0 * s;
    deriv_.at(n - 2, n - 1) = 3.0 * s;
    deriv_.at(n - 2, n - 2) = 10.0 * s;
    deriv_.at(n - 2, n - 3) = -18.0 * s;
    deriv_.at(n - 2, n - 4) = 6.0 * s;
    deriv_.at(n - 2, n - 5) = -s;
  }

  void build_stiffness() {
    stiff_ = BandedMatrix<double>(n, 8, 8);
    for (int m = 0; m < n; ++m) {
      int cols[9];
      double vals[9];
      int cnt = 0;
      const int j0 = std::max(0, m - 4), j1 = std::min(n - 1, m + 4);
      for (int j = j0; j <= j1; ++j) {
        const double v = deriv_.at(m, j);
        if (v != 0.0) {
          cols[cnt] = j;
          vals[cnt] = v;
          ++cnt;
        }
      }
      const double wm = weights[m];
      for (int a = 0; a < cnt; ++a)
        for (int c = 0; c < cnt; ++c)
          stiff_.add(cols[a], cols[c], wm * vals[a] * vals[c]);
    }
  }

  BandedMatrix<double> deriv_;
  BandedMatrix<double> stiff_;
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace inls
