#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace inls {

/// Banded matrix in LAPACK-style band storage with extra room above the
/// diagonal so a pivoted LU factorization can be done in place.
template <typename Scalar>
class BandedMatrix {
public:
  BandedMatrix() = default;
  BandedMatrix(int n, int lower, int upper)
      : n_(n), kl_(lower), ku_(upper), ld_(2 * lower + upper + 1),
        a_(static_cast<std::size_t>(ld_) * static_cast<std::size_t>(n),
           Scalar(0)) {}

  int size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  /// Valid for |i - j| within (lower, upper + lower); the extra upper room
  /// holds pivoting fill.
  Scalar& at(int i, int j) { return a_[idx(i, j)]; }
  const Scalar& at(int i, int j) const { return a_[idx(i, j)]; }

  void add(int i, int j, Scalar v) { a_[idx(i, j)] += v; }

  bool in_band(int i, int j) const {
    return i - j <= kl_ && j - i <= ku_;
  }

  template <typename V>
  std::vector<V> multiply(const std::vector<V>& x) const {
    std::vector<V> y(n_, V(0));
    for (int i = 0; i < n_; ++i) {
      const int j0 = std::max(0, i - kl_);
      const int j1 = std::min(n_ - 1, i + ku_);
      V acc(0);
      for (int j = j0; j <= j1; ++j) acc += at(i, j) * x[j];
      y[i] = acc;
    }
    return y;
  }

private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(j) * ld_ +
           static_cast<std::size_t>(kl_ + ku_ + i - j);
  }

  int n_ = 0, kl_ = 0, ku_ = 0, ld_ = 0;
  std::vector<Scalar> a_;
};

/// Pivoted LU factorization of a banded matrix (dgbtrf-flavoured). U picks up
/// fill up to lower+upper above the diagonal.
template <typename Scalar>
class BandedLU {
public:
  explicit BandedLU(BandedMatrix<Scalar> a) : a_(std::move(a)), piv_(a_.size()) {
    const int n = a_.size(), kl = a_.lower(), ku = a_.upper();
    const int kv = kl + ku;  // width of U including fill
    for (int j = 0; j < n; ++j) {
      const int imax = std::min(n - 1, j + kl);
      int ip = j;
      auto pmag = mag(a_.at(j, j));
      for (int i = j + 1; i <= imax; ++i) {
        const auto m = mag(a_.at(i, j));
        if (m > pmag) { pmag = m; ip = i; }
      }
      piv_[j] = ip;
      if (!(pmag > 0)) throw std::runtime_error("BandedLU: singular matrix");
      if (ip != j) {
        const int jend = std::min(n - 1, j + kv);
        for (int c = j; c <= jend; ++c) std::swap(a_.at(j, c), a_.at(ip, c));
      }
      const Scalar d = a_.at(j, j);
      for (int i = j + 1; i <= imax; ++i) {
        const Scalar m = a_.at(i, j) / d;
        a_.at(i, j) = m;
        const int jend = std::min(n - 1, j + kv);
        for (int c = j + 1; c <= jend; ++c) a_.at(i, c) -= m * a_.at(j, c);
      }
    }
  }

  template <typename V>
  std::vector<V> solve(std::vector<V> b) const {
    const int n = a_.size(), kl = a_.lower(), ku = a_.upper();
    const int kv = kl + ku;
    for (int j = 0; j < n; ++j) {
      if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
      const int imax = std::min(n - 1, j + kl);
      for (int i = j + 1; i <= imax; ++i) b[i] -= a_.at(i, j) * b[j];
    }
    for (int i = n - 1; i >= 0; --i) {
      const int jend = std::min(n - 1, i + kv);
      V acc = b[i];
      for (int j = i + 1; j <= jend; ++j) acc -= a_.at(i, j) * b[j];
      b[i] = acc / a_.at(i, i);
    }
    return b;
  }

private:
  static double mag(double x) { return std::abs(x); }
  static double mag(std::complex<double> x) {
    return std::abs(x.real()) + std::abs(x.imag());
  }

  BandedMatrix<Scalar> a_;
  std::vector<int> piv_;
};

/// Dense Gaussian elimination with partial pivoting for the small Vandermonde
/// systems behind the quadrature weights.
inline std::vector<double> solve_dense(std::vector<double> a,
                                       std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int j = 0; j < n; ++j) {
    int ip = j;
    for (int i = j + 1; i < n; ++i)
      if (std::abs(a[i * n + j]) > std::abs(a[ip * n + j])) ip = i;
    if (ip != j) {
      for (int c = 0; c < n; ++c) std::swap(a[j * n + c], a[ip * n + c]);
      std::swap(b[j], b[ip]);
    }
    const double d = a[j * n + j];
    if (d == 0.0) throw std::runtime_error("solve_dense: singular system");
    for (int i = j + 1; i < n; ++i) {
      const double m = a[i * n + j] / d;
      if (m == 0.0) continue;
      a[i * n + j] = 0.0;
      for (int c = j + 1; c < n; ++c) a[i * n + c] -= m * a[j * n + c];
      b[i] -= m * b[j];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < n; ++j) acc -= a[i * n + j] * b[j];
    b[i] = acc / a[i * n + i];
  }
  return b;
}

}  // namespace inls
