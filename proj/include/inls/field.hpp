#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "inls/grid.hpp"

namespace inls {

/// Complex wavefunction samples on a grid. Immutable value type; construction
/// rejects non-finite data.
struct Field {
  GridPtr grid;
  std::vector<cplx> values;

  Field(GridPtr g, std::vector<cplx> v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw std::invalid_argument("field: null grid");
    if (static_cast<int>(values.size()) != grid->n)
      throw std::invalid_argument("field: size does not match grid");
    for (const cplx& z : values)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("field: non-finite value");
  }

  int size() const { return grid->n; }
};

inline Field make_field(const GridPtr& grid,
                        const std::function<cplx(double)>& f) {
  std::vector<cplx> v(grid->n);
  for (int j = 0; j < grid->n; ++j) v[j] = f(grid->nodes[j]);
  return Field(grid, std::move(v));
}

inline Field make_real_field(const GridPtr& grid,
                             const std::function<double(double)>& f) {
  return make_field(grid, [&](double x) { return cplx(f(x), 0.0); });
}

inline Field zero_field(const GridPtr& grid) {
  return Field(grid, std::vector<cplx>(grid->n, cplx(0.0, 0.0)));
}

/// A e^{-x^2 / (2 w^2)}, the workhorse test profile.
inline Field gaussian_field(const GridPtr& grid, double amplitude, double width) {
  return make_field(grid, [=](double x) {
    return cplx(amplitude * std::exp(-x * x / (2.0 * width * width)), 0.0);
  });
}

/// C-infinity bump exp(-1/(1-x^2)) on |x| < 1, rescaled to |x| < radius.
inline double bump(double x, double radius = 1.0) {
  const double s = x / radius;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

inline double sup_abs(const Field& f) {
  double m = 0.0;
  for (const cplx& z : f.values) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace inls
