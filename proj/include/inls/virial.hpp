#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
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

/// Valid constant in sup_{x!=0} |x|^{(d-1)/2} |u| <= C ||u||^{1/2} ||grad u||^{1/2}
/// for radial u, from the fundamental-theorem estimate r^{d-1}|u|^2 <=
/// (2/c_d) ||u|| ||grad u||. Not sharp, but it never fails, which is what the
/// tail bounds need.
inline double radial_sobolev_constant(int d) {
  if (d < 2)
    throw std::invalid_argument("radial_sobolev_constant: needs d >= 2");
  const double cd = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  return std::sqrt(2.0 / cd);
}

/// Four-term second derivative of the virial potential for the INLS flow,
/// radialized: the Hessian contraction collapses to a''(r) |du/dr|^2.
inline double virial_second_derivative(const Field& field,
                                       const VirialWeight& weight,
                                       const Params& params,
                                       const Quadratures& quad,
                                       bool free_flow = false) {
  const Grid& g = *field.grid;
  const auto du = g.derivative(field.values);
  double acc = 0.0;
  for (int j = 0; j < g.n; ++j) {
    const double x = g.nodes[j];
    const double a2 = std::norm(field.values[j]);
    acc += g.weights[j] *
           (4.0 * weight.a2(x) * std::norm(du[j]) - weight.bilap(x) * a2);
    if (!free_flow) {
      const double pot = std::pow(a2, 0.5 * (params.alpha + 2.0));
      const double coef = -2.0 * params.alpha / (params.alpha + 2.0) * weight.lap(x) -
                          4.0 * params.b / (params.alpha + 2.0) * (weight.a1(x) / x);
      acc += params.mu * quad.singular[j] * coef * pot;
    }
  }
  return acc;
}

inline double virial_second_derivative(const Field& field,
                                       const VirialWeight& weight,
                                       const Params& params,
                                       bool free_flow = false) {
  return virial_second_derivative(field, weight, params,
                                  Quadratures(field.grid, params.b), free_flow);
}

/// Breakdown of a localized virial bound: total = main + chi_term + each
/// remainder piece, so tests can watch the R-power parts in isolation.
struct VirialBound {
  double total = 0.0;
  double main = 0.0;        // 8 ||grad u||^2 - 4(d a + 2b)/(a+2) P, or 16 E0
  double chi_term = 0.0;    // -2 int_{>R} (chi1 - eps/(d+2-b) chi2^q) |grad u|^2
  double bilap_term = 0.0;  // C_psi R^{-2} M
  double grad_term = 0.0;   // eps ||grad u||^2 (or the alpha = 4 tail term)
  double young_term = 0.0;  // remaining pure R-power piece
};

namespace detail {

inline double sup_abs_sample(const std::function<double(double)>& f, double lo,
                             double hi, int n = 20000) {
  double sup = 0.0;
  for (int i = 0; i <= n; ++i)
    sup = std::max(sup, std::abs(f(lo + (hi - lo) * i / n)));
  return sup;
}

}  // namespace detail

/// Upper bound for d^2 V_{phi_R}/dt^2 on radial data, every implied constant
/// instantiated: mass factors from conservation, the radial Sobolev constant
/// above, and the Young split written out. Valid for 0 < alpha <= 4, d >= 2.
inline VirialBound localized_bound_general(const Field& field,
                                           const ChiProfile& chi,
                                           const Params& params, double eps) {
  if (params.d < 2 || field.grid->geometry != Geometry::RadialD)
    throw std::invalid_argument("localized bound: radial data with d >= 2");
  if (params.alpha > 4.0)
    throw std::invalid_argument(
        "localized bound: alpha <= 4 required (Young exponents degenerate)");
  if (!chi.radial())
    throw std::invalid_argument("localized bound: radial cutoff required");
  const double R = chi.family.R;
  const int d = params.d;
  const double alpha = params.alpha, b = params.b;
  const CutoffFamily& fam = chi.family;

  const Quadratures quad(field.grid, b);
  const auto obs = observables(field, params, quad);
  const double M = obs.mass, K = obs.kinetic;

  VirialBound out;
  out.main = 8.0 * K -
             4.0 * (d * alpha + 2.0 * b) / (alpha + 2.0) * obs.potential;

  const double c_psi = detail::sup_abs_sample(
      [&](double s) {
        if (s <= 1.0 || s <= 0.0) return 0.0;
        return fam.slope3(s) + 2.0 * (d - 1) * fam.slope2(s) / s +
               (d - 1) * (d - 3) *
                   (fam.slope1(s) / (s * s) - fam.slope(s) / (s * s * s));
      },
      1.0, 2.5);
  out.bilap_term = c_psi / (R * R) * M;

  const double kappa_pot = detail::sup_abs_sample(
      [&](double s) {
        const double lap = fam.slope1(s) + (d - 1) * fam.slope(s) / s;
        return (4.0 * (d * alpha + 2.0 * b) - 2.0 * alpha * lap -
                4.0 * b * fam.slope(s) / s) /
               (alpha + 2.0);
      },
      1.0, 2.5);
  const double c_rs = radial_sobolev_constant(d);
  const double e_r = 0.5 * (d - 1) * alpha + b;
  const double tail_coef =
      kappa_pot * std::pow(c_rs, alpha) * std::pow(M, 1.0 + 0.25 * alpha);

  if (alpha == 4.0) {
    out.grad_term = tail_coef * std::pow(R, -e_r) * K;
    out.young_term = 0.0;
  } else {
    if (!(eps > 0))
      throw std::invalid_argument("localized bound: eps must be positive");
    const double p = 4.0 / alpha;
    out.grad_term = eps * K;
    out.young_term = (1.0 - alpha / 4.0) *
                     std::pow(eps * p, -1.0 / (p - 1.0)) *
                     std::pow(tail_coef, p / (p - 1.0)) *
                     std::pow(R, -2.0 * ((d - 1) * alpha + 2.0 * b) / (4.0 - alpha));
  }
  out.total = out.main + out.bilap_term + out.grad_term + out.young_term;
  return out;
}

/// Mass-critical refinement: the chi-weighted gradient integral is evaluated
/// (it vanishes for fields supported inside |x| < R) and the remainder keeps
/// the eps R^{-2} and eps^{-(2-b)/(2d-2+b)} R^{-2} structure.
inline VirialBound localized_bound_mass_critical(const Field& field,
                                                 const ChiProfile& chi,
                                                 const Params& params,
                                                 double eps, double energy0) {
  if (params.d < 2 || field.grid->geometry != Geometry::RadialD)
    throw std::invalid_argument("localized bound: radial data with d >= 2");
  if (!params.mass_critical())
    throw std::invalid_argument("localized bound: alpha = (4-2b)/d required");
  if (!(eps > 0))
    throw std::invalid_argument("localized bound: eps must be positive");
  if (!chi.radial())
    throw std::invalid_argument("localized bound: radial cutoff required");
  const double R = chi.family.R;
  const int d = params.d;
  const double b = params.b;
  const CutoffFamily& fam = chi.family;
  const Grid& g = *field.grid;

  const Quadratures quad(field.grid, b);
  const auto obs = observables(field, params, quad);
  const double M = obs.mass;

  VirialBound out;
  out.main = 16.0 * energy0;

  const double q_exp = d / (2.0 - b);
  const auto du = g.derivative(field.values);
  double chi_integral = 0.0;
  for (int j = 0; j < g.n; ++j) {
    if (g.nodes[j] <= R) continue;
    const double c1 = chi.chi1(g.nodes[j]);
    const double c2 = chi.chi2(g.nodes[j]);
    chi_integral += g.weights[j] *
                    (c1 - eps / (d + 2.0 - b) * std::pow(c2, q_exp)) *
                    std::norm(du[j]);
  }
  out.chi_term = -2.0 * chi_integral;

  const double c_psi = detail::sup_abs_sample(
      [&](double s) {
        if (s <= 1.0) return 0.0;
        return fam.slope3(s) + 2.0 * (d - 1) * fam.slope2(s) / s +
               (d - 1) * (d - 3) *
                   (fam.slope1(s) / (s * s) - fam.slope(s) / (s * s * s));
      },
      1.0, 2.5);
  out.bilap_term = c_psi / (R * R) * M;

  // chain constants for the tail potential, sampled on the chi shape
  const double w_exp = d / (4.0 - 2.0 * b);
  auto chi2_s = [&](double s) {
    const double slope_ratio = fam.slope(s) / s;
    const double lap = fam.slope1(s) + (d - 1) * slope_ratio;
    return (2.0 - b) * (2.0 * d - lap) + d * b * (2.0 - slope_ratio);
  };
  const double x_sup = std::pow(
      detail::sup_abs_sample([&](double s) { return chi2_s(s); }, 1.0, 2.6),
      w_exp);
  const double g_chi = detail::sup_abs_sample(
      [&](double s) {
        const double h = 1e-6;
        return (std::pow(chi2_s(s + h), w_exp) -
                std::pow(chi2_s(std::max(1.0 + 1e-9, s - h)), w_exp)) /
               (2.0 * h);
      },
      1.0 + 1e-6, 2.6);

  const double c_rs = radial_sobolev_constant(d);
  const double chain = std::pow(c_rs, (4.0 - 2.0 * b) / d) *
                       std::pow(x_sup * std::sqrt(M), (2.0 - b) / d) * M;
  const double p = 2.0 * d / (2.0 - b);
  const double t = 0.5 * eps;
  const double young = (1.0 - 1.0 / p) * std::pow(t * p, -1.0 / (p - 1.0)) *
                       std::pow(chain, p / (p - 1.0));

  const double front = 2.0 / (d + 2.0 - b);
  out.grad_term = front * eps * g_chi * g_chi / (R * R) * M;
  out.young_term = front * young / (R * R);
  out.total = out.main + out.chi_term + out.bilap_term + out.grad_term +
              out.young_term;
  return out;
}

/// 1D mass-critical tail bound 16 E0 + C (1+N)^{2-b} ||u||_{L2(|x|>1)}^{6-2b}
/// + N ||u||^2_{L2(|x|>1)}, with C, N, a0 the computed cutoff constants. The
/// tail-mass hypothesis ||u||_{L2(|x|>1)} <= a0 is enforced.
inline VirialBound bound_1d(const Field& field, const ChiProfile& chi,
                            double energy0) {
  if (field.grid->geometry != Geometry::Cartesian1D)
    throw std::invalid_argument("bound_1d: cartesian-1d geometry required");
  if (chi.radial())
    throw std::invalid_argument("bound_1d: 1D chi profile required");
  const Grid& g = *field.grid;
  const double b = chi.params.b;

  double tail_mass = 0.0;
  for (int j = 0; j < g.n; ++j)
    if (std::abs(g.nodes[j]) > 1.0)
      tail_mass += g.weights[j] * std::norm(field.values[j]);
  const double tail = std::sqrt(tail_mass);
  if (tail > chi.a0)
    throw std::invalid_argument(
        "bound_1d: tail mass " + std::to_string(tail) +
        " exceeds the smallness constant a0 = " + std::to_string(chi.a0));

  VirialBound out;
  out.main = 16.0 * energy0;
  out.young_term = chi.c_const * std::pow(1.0 + chi.n_norm, 2.0 - b) *
                   std::pow(tail_mass, 0.5 * (6.0 - 2.0 * b));
  out.grad_term = chi.n_norm * tail_mass;
  out.total = out.main + out.young_term + out.grad_term;
  return out;
}

/// f(x) = x^2/2 - C_GN/(alpha+2) x^{(d alpha + 2b)/2}; increasing to x0 and
/// decreasing past it, with f(x0) = E(Q) M(Q)^sigma.
inline double f_function(double x, const GroundState& gs) {
  if (!gs.params.intercritical())
    throw std::invalid_argument("f_function: intercritical parameters required");
  const double e = 0.5 * (gs.params.d * gs.params.alpha + 2.0 * gs.params.b);
  return 0.5 * x * x - gs.c_gn_direct / (gs.params.alpha + 2.0) * std::pow(x, e);
}

inline double f_slope(double x, const GroundState& gs) {
  const double e = 0.5 * (gs.params.d * gs.params.alpha + 2.0 * gs.params.b);
  return x - gs.c_gn_direct * e / (gs.params.alpha + 2.0) * std::pow(x, e - 1.0);
}

struct ConsistencyReport {
  double max_rel_first = 0.0;
  double max_rel_second = 0.0;
  int interior_points = 0;
};

/// Centered 4th-order finite differences of V_a over stored checkpoints
/// against the first- and second-derivative formulas.
inline ConsistencyReport trajectory_consistency(const TrajectoryRecord& traj,
                                                const VirialWeight& weight,
                                                const Params& params,
                                                bool free_flow = false) {
  const auto& chk = traj.checkpoints;
  if (chk.size() < 5)
    throw std::invalid_argument(
        "trajectory_consistency: need at least 5 checkpoints");
  const double dt = chk[1].t - chk[0].t;
  for (std::size_t i = 1; i < chk.size(); ++i)
    if (std::abs(chk[i].t - chk[i - 1].t - dt) > 1e-9 * std::max(1.0, dt))
      throw std::invalid_argument(
          "trajectory_consistency: checkpoints not uniformly spaced");

  const Quadratures quad(chk[0].field.grid, params.b);
  std::vector<double> v(chk.size());
  for (std::size_t i = 0; i < chk.size(); ++i)
    v[i] = virial_value(chk[i].field, weight);

  double scale1 = 0.0, scale2 = 0.0;
  std::vector<double> an1(chk.size()), an2(chk.size());
  for (std::size_t i = 2; i + 2 < chk.size(); ++i) {
    an1[i] = virial_first_derivative(chk[i].field, weight);
    an2[i] = virial_second_derivative(chk[i].field, weight, params, quad,
                                      free_flow);
    scale1 = std::max(scale1, std::abs(an1[i]));
    scale2 = std::max(scale2, std::abs(an2[i]));
  }
  scale1 = std::max(scale1, 1e-300);
  scale2 = std::max(scale2, 1e-300);

  ConsistencyReport rep;
  for (std::size_t i = 2; i + 2 < chk.size(); ++i) {
    const double fd1 =
        (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * dt);
    const double fd2 = (-v[i - 2] + 16.0 * v[i - 1] - 30.0 * v[i] +
                        16.0 * v[i + 1] - v[i + 2]) /
                       (12.0 * dt * dt);
    rep.max_rel_first =
        std::max(rep.max_rel_first, std::abs(fd1 - an1[i]) / scale1);
    rep.max_rel_second =
        std::max(rep.max_rel_second, std::abs(fd2 - an2[i]) / scale2);
    ++rep.interior_points;
  }
  return rep;
}

/// Snapshot report: virial value, both derivative formulas, and the
/// applicable localized bound for cutoff weights on radial grids.
struct VirialReport {
  std::string cutoff_id;
  double v = 0.0;
  double dv_analytic = 0.0;
  double d2v_analytic = 0.0;
  std::optional<double> d2v_bound;
};

inline VirialReport make_virial_report(const Field& field,
                                       const VirialWeight& weight,
                                       const Params& params,
                                       const std::optional<ChiProfile>& chi,
                                       double eps, double energy0) {
  VirialReport rep;
  rep.cutoff_id = weight.id;
  rep.v = virial_value(field, weight);
  rep.dv_analytic = virial_first_derivative(field, weight);
  rep.d2v_analytic = virial_second_derivative(field, weight, params);
  if (chi) {
    if (!chi->radial()) {
      rep.d2v_bound = bound_1d(field, *chi, energy0).total;
    } else if (params.mass_critical()) {
      rep.d2v_bound =
          localized_bound_mass_critical(field, *chi, params, eps, energy0).total;
    } else if (params.alpha <= 4.0) {
      rep.d2v_bound = localized_bound_general(field, *chi, params, eps).total;
    }
  }
  return rep;
}

}  // namespace inls
