#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace inls {

/// Where alpha sits relative to the scaling-critical exponents.
enum class Criticality {
  MassSubcritical,
  MassCritical,
  Intercritical,
  EnergyCriticalOrBeyond,
};

inline const char* to_string(Criticality c) {
  switch (c) {
    case Criticality::MassSubcritical: return "mass-subcritical";
    case Criticality::MassCritical: return "mass-critical";
    case Criticality::Intercritical: return "intercritical";
    case Criticality::EnergyCriticalOrBeyond: return "energy-critical-or-beyond";
  }
  return "?";
}

/// Equation parameters for i u_t + Laplace(u) + mu |x|^{-b} |u|^alpha u = 0,
/// together with the derived scaling exponents.
struct Params {
  int d = 1;          // spatial dimension
  double b = 0.0;     // weight exponent in |x|^{-b}
  double alpha = 0.0; // nonlinearity power
  double mu = 1.0;    // +1 focusing, -1 defocusing

  double alpha_low = 0.0;   // (4-2b)/d
  double alpha_high = 0.0;  // (4-2b)/(d-2), +inf for d <= 2
  double gamma_crit = 0.0;  // d/2 - (2-b)/alpha
  double sigma = 0.0;       // (1-gamma_crit)/gamma_crit, +inf at gamma_crit = 0
  Criticality criticality = Criticality::MassSubcritical;
  bool b_zero_test_mode = false;  // b = 0 accepted for closed-form checks only

  bool focusing() const { return mu > 0; }
  bool mass_critical() const { return criticality == Criticality::MassCritical; }
  bool intercritical() const { return criticality == Criticality::Intercritical; }
};

/// Builds and validates a Params. b = 0 is tolerated (flagged) so closed-form
/// solitons can be used as oracles; every other constraint is enforced.
inline Params make_params(int d, double b, double alpha, double mu = 1.0) {
  if (d < 1) throw std::invalid_argument("params: dimension must be >= 1");
  if (!(alpha > 0)) throw std::invalid_argument("params: alpha must be > 0");
  if (mu != 1.0 && mu != -1.0)
    throw std::invalid_argument("params: mu must be +1 or -1");
  const double bmax = std::min(2.0, static_cast<double>(d));
  if (b < 0 || b >= bmax)
    throw std::invalid_argument("params: need 0 <= b < min(2, d), got b=" +
                                std::to_string(b));
  Params p;
  p.d = d;
  p.b = b;
  p.alpha = alpha;
  p.mu = mu;
  p.b_zero_test_mode = (b == 0.0);
  p.alpha_low = (4.0 - 2.0 * b) / d;
  p.alpha_high = d >= 3 ? (4.0 - 2.0 * b) / (d - 2)
                        : std::numeric_limits<double>::infinity();
  p.gamma_crit = 0.5 * d - (2.0 - b) / alpha;
  p.sigma = p.gamma_crit > 0 ? (1.0 - p.gamma_crit) / p.gamma_crit
                             : std::numeric_limits<double>::infinity();

  const double tol = 1e-12 * std::max(1.0, alpha);
  if (std::abs(alpha - p.alpha_low) <= tol) {
    p.criticality = Criticality::MassCritical;
    p.gamma_crit = 0.0;
    p.sigma = std::numeric_limits<double>::infinity();
  } else if (alpha < p.alpha_low) {
    p.criticality = Criticality::MassSubcritical;
  } else if (alpha < p.alpha_high) {
    p.criticality = Criticality::Intercritical;
  } else {
    p.criticality = Criticality::EnergyCriticalOrBeyond;
  }
  return p;
}

/// Mass-critical convenience: alpha pinned to (4-2b)/d.
inline Params make_mass_critical_params(int d, double b, double mu = 1.0) {
  return make_params(d, b, (4.0 - 2.0 * b) / d, mu);
}

}  // namespace inls
