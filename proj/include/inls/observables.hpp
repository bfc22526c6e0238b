#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "inls/field.hpp"
#include "inls/params.hpp"

namespace inls {

/// Conserved / monitored quantities of a snapshot. energy is always derived
/// from the other entries, never stored independently.
struct Observables {
  double mass = 0.0;             // ||u||_{L2}^2
  double kinetic = 0.0;          // ||grad u||_{L2}^2
  double potential = 0.0;        // int |x|^{-b} |u|^{alpha+2}
  double energy = 0.0;           // kinetic/2 - mu potential/(alpha+2)
  double variance = 0.0;         // ||x u||_{L2}^2
  double radial_momentum = 0.0;  // Im int conj(u) x . grad u
};

inline double energy_from_parts(double kinetic, double potential,
                                const Params& p) {
  return 0.5 * kinetic - p.mu * potential / (p.alpha + 2.0);
}

/// Precomputed quadrature data for one (grid, b) pair; reuse it when scanning
/// many snapshots on the same grid.
struct Quadratures {
  GridPtr grid;
  double b = 0.0;
  std::vector<double> singular;  // weights for the |x|^{-b}-weighted measure
  std::vector<double> phase;     // cell-consistent |x|^{-b}: singular/volume

  Quadratures(GridPtr g, double b_in) : grid(std::move(g)), b(b_in) {
    singular = grid->product_weights(b);
    phase.resize(grid->n);
    for (int j = 0; j < grid->n; ++j) phase[j] = singular[j] / grid->weights[j];
  }
};

inline void check_grid_params(const Field& field, const Params& params) {
  if (field.grid->dim != params.d)
    throw std::invalid_argument("observables: grid dimension " +
                                std::to_string(field.grid->dim) +
                                " does not match params d=" +
                                std::to_string(params.d));
}

inline Observables observables(const Field& field, const Params& params,
                               const Quadratures& quad) {
  check_grid_params(field, params);
  if (quad.grid.get() != field.grid.get() && !quad.grid->compatible(*field.grid))
    throw std::invalid_argument("observables: quadrature grid mismatch");
  if (quad.b != params.b)
    throw std::invalid_argument("observables: quadrature built for different b");

  const Grid& g = *field.grid;
  const std::vector<cplx> du = g.derivative(field.values);
  Observables o;
  for (int j = 0; j < g.n; ++j) {
    const double w = g.weights[j];
    const double x = g.nodes[j];
    const double a2 = std::norm(field.values[j]);
    o.mass += w * a2;
    o.kinetic += w * std::norm(du[j]);
    o.variance += w * x * x * a2;
    o.radial_momentum += w * x * std::imag(std::conj(field.values[j]) * du[j]);
    o.potential += quad.singular[j] * std::pow(a2, 0.5 * (params.alpha + 2.0));
  }
  o.energy = energy_from_parts(o.kinetic, o.potential, params);
  return o;
}

inline Observables observables(const Field& field, const Params& params) {
  return observables(field, params, Quadratures(field.grid, params.b));
}

namespace detail {

/// Rescaling by arg_scale > 1 evaluates the field beyond its grid, where it
/// is zero-extrapolated; that is sound only if the field has already decayed
/// at the boundary. `arg_scale` is the factor multiplying the evaluation
/// point.
inline void check_resample_support(const Field& f, double arg_scale) {
  if (arg_scale <= 1.0) return;
  const double band = 0.97 * f.grid->r_max;
  double boundary = 0.0, peak = 0.0;
  for (int j = 0; j < f.grid->n; ++j) {
    const double m = std::abs(f.values[j]);
    peak = std::max(peak, m);
    if (std::abs(f.grid->nodes[j]) >= band) boundary = std::max(boundary, m);
  }
  if (peak > 0.0 && boundary > 1e-8 * peak)
    throw std::runtime_error(
        "scale_field: rescaled argument exceeds the grid support and the "
        "field has not decayed at the boundary (amplitude " +
        std::to_string(boundary) + " vs peak " + std::to_string(peak) + ")");
}

}  // namespace detail

/// u_lambda(x) = lambda^{(2-b)/alpha} u(lambda x), resampled on the same grid.
/// The homogeneous-Sobolev norms scale as lambda^{gamma + (2-b)/alpha - d/2}.
inline Field scale_field(const Field& field, double lambda,
                         const Params& params) {
  if (!(lambda > 0)) throw std::invalid_argument("scale_field: lambda must be > 0");
  check_grid_params(field, params);
  if (lambda == 1.0) return field;
  detail::check_resample_support(field, lambda);
  const double amp = std::pow(lambda, (2.0 - params.b) / params.alpha);
  const Grid& g = *field.grid;
  std::vector<cplx> out(g.n);
  for (int j = 0; j < g.n; ++j)
    out[j] = amp * g.interpolate(field.values, lambda * g.nodes[j]);
  return Field(field.grid, std::move(out));
}

/// 1D mass-critical rescaling u_lambda(x) = lambda^{-1/2} u(x / lambda):
/// mass is invariant and energy picks up lambda^{-2}.
inline Field scale_field_1d_mass_critical(const Field& field, double lambda,
                                          const Params& params) {
  if (!(lambda > 0))
    throw std::invalid_argument("scale_field_1d: lambda must be > 0");
  if (field.grid->geometry != Geometry::Cartesian1D)
    throw std::invalid_argument("scale_field_1d: needs cartesian-1d geometry");
  if (!params.mass_critical())
    throw std::invalid_argument("scale_field_1d: params must be mass-critical");
  if (lambda == 1.0) return field;
  detail::check_resample_support(field, 1.0 / lambda);
  const double amp = 1.0 / std::sqrt(lambda);
  const Grid& g = *field.grid;
  std::vector<cplx> out(g.n);
  for (int j = 0; j < g.n; ++j)
    out[j] = amp * g.interpolate(field.values, g.nodes[j] / lambda);
  return Field(field.grid, std::move(out));
}

}  // namespace inls
