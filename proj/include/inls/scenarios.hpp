#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "inls/cutoffs.hpp"
#include "inls/evolution.hpp"
#include "inls/ground_state.hpp"
#include "inls/observables.hpp"
#include "inls/virial_weight.hpp"

namespace inls {

enum class Outcome { Blowup, Global, Indeterminate };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Blowup: return "blowup";
    case Outcome::Global: return "global";
    case Outcome::Indeterminate: return "indeterminate";
  }
  return "?";
}

/// Which blowup/global hypotheses a snapshot satisfies and what the theorems
/// then predict for it.
struct ClassifyReport {
  double energy = 0.0;
  double mass = 0.0;
  bool negative_energy = false;

  // intercritical threshold data (set when a ground state is supplied)
  bool thresholds_available = false;
  double em = 0.0, em_q = 0.0;      // E M^sigma for data and ground state
  double grad = 0.0, grad_q = 0.0;  // ||grad u|| ||u||^sigma
  bool below_threshold = false;     // em < em_q
  bool grad_above = false;          // grad > grad_q

  // variance-polynomial window 8 t^2 E + 4 t Im + Var
  double imom = 0.0, variance = 0.0;
  bool blowup_window = false;       // polynomial takes negative values at t > 0
  double window_lo = 0.0, window_hi = 0.0;

  Outcome predicted = Outcome::Indeterminate;
};

inline ClassifyReport classify(const Field& field, const Params& params,
                               const std::optional<GroundState>& gs = {}) {
  ClassifyReport rep;
  const auto o = observables(field, params);
  rep.energy = o.energy;
  rep.mass = o.mass;
  rep.imom = o.radial_momentum;
  rep.variance = o.variance;
  rep.negative_energy = o.energy < 0.0;

  if (o.mass == 0.0) return rep;

  // roots of f(t) = 8 E t^2 + 4 Im t + Var; blowup window when f < 0 at t > 0
  {
    const double a = 8.0 * o.energy, b = 4.0 * o.radial_momentum,
                 c = o.variance;
    if (a > 0.0) {
      const double disc = b * b - 4.0 * a * c;
      if (disc > 0.0 && b < 0.0) {
        rep.blowup_window = true;
        rep.window_lo = (-b - std::sqrt(disc)) / (2.0 * a);
        rep.window_hi = (-b + std::sqrt(disc)) / (2.0 * a);
      }
    } else if (a < 0.0) {
      rep.blowup_window = true;  // concave parabola is eventually negative
      const double disc = b * b - 4.0 * a * c;
      rep.window_lo = (-b + std::sqrt(disc)) / (2.0 * a);
      rep.window_hi = std::numeric_limits<double>::infinity();
    }
  }

  if (gs) {
    const Params& gp = gs->params;
    if (gp.intercritical() && gp.d == params.d && gp.b == params.b &&
        gp.alpha == params.alpha) {
      rep.thresholds_available = true;
      const double sigma = params.sigma;
      rep.em = o.energy * std::pow(o.mass, sigma);
      rep.grad = std::sqrt(o.kinetic) * std::pow(o.mass, 0.5 * sigma);
      rep.em_q = gs->energy * std::pow(gs->mass, sigma);
      rep.grad_q = gs->grad_norm() * std::pow(gs->mass, 0.5 * sigma);
      rep.below_threshold = rep.em < rep.em_q;
      rep.grad_above = rep.grad > rep.grad_q;
    }
  }

  if (!params.focusing()) {
    rep.predicted = Outcome::Global;
    return rep;
  }
  if (params.criticality == Criticality::MassSubcritical) {
    rep.predicted = Outcome::Global;
    return rep;
  }
  if (rep.negative_energy) {
    rep.predicted = Outcome::Blowup;
    return rep;
  }
  if (params.mass_critical() && rep.blowup_window) {
    rep.predicted = Outcome::Blowup;
    return rep;
  }
  if (rep.thresholds_available && rep.below_threshold) {
    rep.predicted = rep.grad_above ? Outcome::Blowup : Outcome::Global;
    return rep;
  }
  rep.predicted = Outcome::Indeterminate;
  return rep;
}

/// Gaussian of the given width with the amplitude bisected so E(u0) hits the
/// target (default -1).
inline Field negative_energy_data(const Params& params, const GridPtr& grid,
                                  double width, double e_target = -1.0) {
  if (!params.focusing())
    throw std::runtime_error(
        "negative_energy_data: defocusing energies are positive");
  if (params.alpha < params.alpha_low)
    throw std::invalid_argument(
        "negative_energy_data: alpha below the mass-critical exponent");
  if (!(e_target < 0))
    throw std::invalid_argument("negative_energy_data: target must be negative");
  const Quadratures quad(grid, params.b);
  auto energy_of = [&](double amp) {
    return observables(gaussian_field(grid, amp, width), params, quad).energy;
  };
  double lo = 1e-3, hi = 1e-3;
  int guard = 0;
  while (energy_of(hi) > e_target) {
    hi *= 2.0;
    if (++guard > 60)
      throw std::runtime_error("negative_energy_data: bisection failed to bracket");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (energy_of(mid) > e_target ? lo : hi) = mid;
  }
  const double amp = 0.5 * (lo + hi);
  auto field = gaussian_field(grid, amp, width);
  const double e = observables(field, params, quad).energy;
  if (std::abs(e - e_target) > 1e-8 * std::max(1.0, std::abs(e_target)))
    throw std::runtime_error("negative_energy_data: bisection did not converge");
  return field;
}

/// Positive-energy blowup construction: u0(x) = lambda psi(mu x) with
/// psi = e^{-i|x|^2} seed, the two scales solving E(u0) = E_target while the
/// variance polynomial keeps a strictly positive discriminant.
struct Remark41Data {
  double a_val = 0.0, b_val = 0.0, c_val = 0.0, d_val = 0.0;
  double eps_choice = 0.0;
  double lambda = 0.0, mu_scale = 0.0;
  double e_measured = 0.0;
  double imom = 0.0, variance = 0.0;
  double window_lo = 0.0, window_hi = 0.0;  // roots of the variance polynomial
  std::optional<Field> field;
};

inline Remark41Data remark41_construct(
    const Params& params, const GridPtr& grid, double e_target,
    const std::function<double(double)>& seed = [](double x) { return bump(x); },
    double seed_radius = 1.0) {
  if (!params.mass_critical() || !params.focusing())
    throw std::invalid_argument(
        "remark41_construct: focusing mass-critical parameters required");
  if (!(e_target > 0))
    throw std::invalid_argument("remark41_construct: target energy must be > 0");

  auto psi = [&](double x) -> cplx {
    return std::polar(seed(x), -x * x);
  };
  const Field psi_field = make_field(grid, psi);
  const auto o = observables(psi_field, params);

  Remark41Data out;
  out.a_val = 0.5 * o.kinetic;
  out.b_val = o.potential / (params.alpha + 2.0);
  out.c_val = o.variance;
  out.d_val = -o.radial_momentum;
  if (!(out.d_val > 0))
    throw std::runtime_error("remark41_construct: seed gives D <= 0");

  out.eps_choice =
      0.5 * std::min(out.a_val, out.d_val * out.d_val / (2.0 * out.c_val));
  const double s = (out.a_val - out.eps_choice) / out.b_val;  // lambda^a*/mu^{2-b}

  const int d = params.d;
  const double b = params.b;
  if (d == 2) {
    out.lambda = std::sqrt(e_target / out.eps_choice);
  } else {
    // eps (B/(A-eps))^{(2-d)/(2-b)} lambda^{4/d} = E
    out.lambda = std::pow(
        e_target / out.eps_choice * std::pow(s, (2.0 - d) / (2.0 - b)),
        0.25 * d);
  }
  out.mu_scale =
      std::pow(std::pow(out.lambda, params.alpha) / s, 1.0 / (2.0 - b));

  if (seed_radius / out.mu_scale > grid->r_max)
    throw std::runtime_error(
        "remark41_construct: rescaled support exceeds the grid (need r_max >= " +
        std::to_string(seed_radius / out.mu_scale) + ")");

  // polish lambda against the discrete energy of psi(mu x): the analytic
  // scales land within quadrature error of the target, the polish inside it
  const double mu = out.mu_scale;
  {
    const Field psi_mu = make_field(grid, [&](double x) { return psi(mu * x); });
    const auto om = observables(psi_mu, params);
    const double kin = 0.5 * om.kinetic;
    const double pot = om.potential / (params.alpha + 2.0);
    auto e_of = [&](double l) {
      return l * l * kin - std::pow(l, params.alpha + 2.0) * pot;
    };
    // Newton from the analytic root; the correction is at quadrature-error
    // scale, and a global search could hop to the other branch of e_of
    double l = out.lambda;
    for (int i = 0; i < 60; ++i) {
      const double f = e_of(l) - e_target;
      const double fp =
          2.0 * l * kin - (params.alpha + 2.0) * std::pow(l, params.alpha + 1.0) * pot;
      if (fp == 0.0) break;
      double step = f / fp;
      step = std::clamp(step, -0.05 * l, 0.05 * l);
      l -= step;
      if (std::abs(step) < 1e-16 * l) break;
    }
    out.lambda = l;
  }

  const double lam = out.lambda;
  Field u0 = make_field(grid, [&](double x) { return lam * psi(mu * x); });
  const auto ou = observables(u0, params);
  out.e_measured = ou.energy;
  out.imom = ou.radial_momentum;
  out.variance = ou.variance;
  if (std::abs(ou.energy - e_target) > 1e-8 * std::max(1.0, e_target))
    throw std::runtime_error("remark41_construct: energy target missed by " +
                             std::to_string(ou.energy - e_target));
  const double disc =
      ou.radial_momentum * ou.radial_momentum - 2.0 * ou.energy * ou.variance;
  if (!(disc > 0))
    throw std::runtime_error(
        "remark41_construct: discriminant condition failed");
  const double sq = std::sqrt(disc);
  out.window_lo = (-ou.radial_momentum - sq) / (4.0 * ou.energy);
  out.window_hi = (-ou.radial_momentum + sq) / (4.0 * ou.energy);
  out.field = std::move(u0);
  return out;
}

/// Step-1 conditions of the 1D two-step argument and the scaling bookkeeping
/// that step 2 uses.
struct Step1Report {
  double energy = 0.0;
  double delta = 0.0;       // -16 E - C (1+N)^2 ||u||^{6-2b} - N ||u||^2
  double theta_mass = 0.0;  // int theta |u|^2
  double tail_mass = 0.0;   // ||u||_{L2(|x|>1)}
  bool condition1_ok = false;
  bool condition2_ok = false;
  double lambda_0 = 0.0;
  double lambda_1 = 0.0;
  double lambda_2 = 0.0;
  double c_0 = 0.0;
  std::optional<double> chosen_lambda;
};

inline Step1Report step1_check(const Field& field, const ChiProfile& chi,
                               const Params& params) {
  if (field.grid->geometry != Geometry::Cartesian1D || !params.mass_critical())
    throw std::invalid_argument("step1_check: 1D mass-critical data required");
  if (chi.radial())
    throw std::invalid_argument("step1_check: 1D chi profile required");
  const double b = params.b;
  const Grid& g = *field.grid;
  const auto o = observables(field, params);

  Step1Report rep;
  rep.energy = o.energy;
  const auto w = make_cutoff_weight(chi.family, 1);
  rep.theta_mass = virial_value(field, w);
  double tail = 0.0;
  for (int j = 0; j < g.n; ++j)
    if (std::abs(g.nodes[j]) > 1.0)
      tail += g.weights[j] * std::norm(field.values[j]);
  rep.tail_mass = std::sqrt(tail);

  const double n_const = chi.n_norm;
  const double spent = chi.c_const * std::pow(1.0 + n_const, 2.0) *
                           std::pow(o.mass, 0.5 * (6.0 - 2.0 * b)) +
                       n_const * o.mass;
  rep.delta = -16.0 * o.energy - spent;
  rep.condition1_ok = rep.delta > 0.0;
  if (rep.condition1_ok)
    rep.condition2_ok =
        std::sqrt(rep.theta_mass) *
            std::sqrt(2.0 * o.kinetic / rep.delta + 1.0) <=
        0.5 * chi.a0;

  if (o.energy < 0.0) {
    rep.lambda_0 = std::sqrt(-16.0 * o.energy / spent);
    rep.lambda_1 = rep.lambda_0 / std::sqrt(2.0);
    rep.c_0 = o.kinetic / (4.0 * std::abs(o.energy));
  }
  return rep;
}

/// ||H u||_{L2} with H(x) = min(|x|, 1); vanishes as the rescaling
/// concentrates the data.
inline double h_weighted_norm(const Field& field) {
  const Grid& g = *field.grid;
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) {
    const double h = std::min(std::abs(g.nodes[j]), 1.0);
    acc += g.weights[j] * h * h * std::norm(field.values[j]);
  }
  return std::sqrt(acc);
}

/// Scans u_lambda = lambda^{-1/2} u(x/lambda) down from lambda_0 until both
/// step-1 conditions hold. Along the way ||H u_lambda|| must decrease; a scan
/// hitting lambda = 1e-8 without success signals a constants problem.
inline Step1Report step2_lambda_search(const Field& field,
                                       const ChiProfile& chi,
                                       const Params& params) {
  Step1Report base = step1_check(field, chi, params);
  if (!(base.energy < 0.0))
    throw std::invalid_argument("step2_lambda_search: negative energy required");
  if (base.condition1_ok && base.condition2_ok) {
    base.chosen_lambda = 1.0;
    return base;
  }

  const double start = std::min(1.0, 0.999 * base.lambda_1);
  double h_prev = std::numeric_limits<double>::infinity();
  const double h_cap =
      0.25 * chi.a0 / std::sqrt(base.c_0 + 1.0);  // theta-mass <= 4 ||H u||^2
  for (double lam = start; lam > 1e-8; lam *= 0.85) {
    const Field scaled = scale_field_1d_mass_critical(field, lam, params);
    const double h_now = h_weighted_norm(scaled);
    if (h_now > h_prev * (1.0 + 1e-12))
      throw std::runtime_error(
          "step2_lambda_search: ||H u_lambda|| failed to decrease");
    h_prev = h_now;
    Step1Report rep = step1_check(scaled, chi, params);
    rep.lambda_0 = base.lambda_0;
    rep.lambda_1 = base.lambda_1;
    rep.c_0 = base.c_0;
    if (rep.lambda_2 == 0.0 && h_now <= h_cap) rep.lambda_2 = lam;
    if (rep.condition1_ok && rep.condition2_ok) {
      rep.chosen_lambda = lam;
      if (rep.lambda_2 == 0.0) rep.lambda_2 = lam;
      return rep;
    }
  }
  throw SolverError(
      "step2_lambda_search: no passing rescaling above 1e-8; the computed "
      "cutoff constants contradict the existence claim",
      0.0);
}

/// Per-time threshold comparison for intercritical runs, with the refined
/// (1 + delta') margin solved from the threshold polynomial.
struct DichotomyReport {
  bool applicable = false;  // initial data satisfies the E M^sigma hypothesis
  double delta = 0.0;
  double delta_prime = 0.0;
  double grad_threshold = 0.0;
  std::vector<double> times;
  std::vector<bool> above;          // grad > threshold
  std::vector<bool> above_refined;  // grad >= (1 + delta') threshold
};

/// Upper root of (d a + 2b) y^2 - 4 y^{(d a + 2b)/2} = (d a - (4-2b))(1 - dl)
/// for y > 1; the left side is decreasing there, so bisection applies.
inline double refined_margin(const Params& p, double delta) {
  const double da2b = p.d * p.alpha + 2.0 * p.b;
  const double dam = p.d * p.alpha - (4.0 - 2.0 * p.b);
  auto g = [&](double y) {
    return (da2b * y * y - 4.0 * std::pow(y, 0.5 * da2b)) / dam;
  };
  if (delta == 0.0) return 0.0;
  double lo = 1.0, hi = 2.0;
  while (g(hi) > 1.0 - delta) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 1.0 - delta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi) - 1.0;
}

inline DichotomyReport dichotomy_track(const TrajectoryRecord& traj,
                                       const GroundState& gs) {
  const Params& p = traj.params;
  if (!p.intercritical())
    throw std::invalid_argument("dichotomy_track: intercritical run required");
  DichotomyReport rep;
  const double sigma = p.sigma;
  const double em_q = gs.energy * std::pow(gs.mass, sigma);
  rep.grad_threshold = gs.grad_norm() * std::pow(gs.mass, 0.5 * sigma);

  const auto& o0 = traj.obs.front();
  const double em0 = o0.energy * std::pow(o0.mass, sigma);
  rep.applicable = em0 < em_q;
  if (rep.applicable) {
    rep.delta = 1.0 - em0 / em_q;
    rep.delta_prime = refined_margin(p, rep.delta);
  }
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& o = traj.obs[i];
    const double grad = std::sqrt(o.kinetic) * std::pow(o.mass, 0.5 * sigma);
    rep.times.push_back(traj.times[i]);
    rep.above.push_back(grad > rep.grad_threshold);
    rep.above_refined.push_back(
        rep.applicable &&
        grad >= (1.0 + rep.delta_prime) * rep.grad_threshold);
  }
  return rep;
}

}  // namespace inls
