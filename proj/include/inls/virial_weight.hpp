#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "inls/cutoffs.hpp"
#include "inls/field.hpp"
#include "inls/observables.hpp"

namespace inls {

/// Weight a(x) of a virial potential with the sampled derivatives the second
/// derivative formula needs. Callables take the signed grid coordinate.
struct VirialWeight {
  std::string id;
  std::function<double(double)> a;      // a(x)
  std::function<double(double)> a1;     // a'(x)
  std::function<double(double)> a2;     // a''(x) (radial second derivative)
  std::function<double(double)> lap;    // Laplacian of a
  std::function<double(double)> bilap;  // bi-Laplacian of a
};

/// a = |x|^2: the variance weight.
inline VirialWeight make_quadratic_weight(int d) {
  VirialWeight w;
  w.id = "quadratic";
  w.a = [](double x) { return x * x; };
  w.a1 = [](double x) { return 2.0 * x; };
  w.a2 = [](double) { return 2.0; };
  w.lap = [d](double) { return 2.0 * d; };
  w.bilap = [](double) { return 0.0; };
  return w;
}

/// a = phi_R for the radial kind (R from the family), a = theta for the 1D
/// kind.
inline VirialWeight make_cutoff_weight(const CutoffFamily& family, int d) {
  VirialWeight w;
  if (family.kind == CutoffFamily::Kind::RadialQuadraticCapped) {
    w.id = "cutoff-R" + std::to_string(family.R);
    w.a = [family](double x) { return family.phi(std::abs(x)); };
    w.a1 = [family](double x) {
      return (x < 0 ? -1.0 : 1.0) * family.phi1(std::abs(x));
    };
    w.a2 = [family](double x) { return family.phi2(std::abs(x)); };
    w.lap = [family, d](double x) { return family.lap_phi(std::abs(x), d); };
    w.bilap = [family, d](double x) { return family.bilap_phi(std::abs(x), d); };
  } else {
    w.id = "cutoff-1d";
    w.a = [family](double x) { return family.theta(x); };
    w.a1 = [family](double x) { return family.theta1(x); };
    w.a2 = [family](double x) { return family.theta2(x); };
    w.lap = [family](double x) { return family.theta2(x); };
    w.bilap = [family](double x) { return family.theta4(x); };
  }
  return w;
}

/// V_a = int a(x) |u|^2.
inline double virial_value(const Field& field, const VirialWeight& weight) {
  const Grid& g = *field.grid;
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j)
    acc += g.weights[j] * weight.a(g.nodes[j]) * std::norm(field.values[j]);
  return acc;
}

/// dV_a/dt = 2 int grad a . Im(conj(u) grad u).
inline double virial_first_derivative(const Field& field,
                                      const VirialWeight& weight) {
  const Grid& g = *field.grid;
  const auto du = g.derivative(field.values);
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j)
    acc += g.weights[j] * weight.a1(g.nodes[j]) *
           std::imag(std::conj(field.values[j]) * du[j]);
  return 2.0 * acc;
}

}  // namespace inls
