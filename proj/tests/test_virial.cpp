#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "inls/virial.hpp"

using namespace inls;
using Catch::Approx;

namespace {

Field random_radial_field(const GridPtr& grid, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> A(0.3, 1.2), W(0.7, 2.0), K(-1.0, 1.0);
  const double a1 = A(rng), w1 = W(rng), a2 = A(rng), w2 = W(rng), k = K(rng);
  return make_field(grid, [=](double r) {
    return a1 * std::exp(-r * r / (2 * w1 * w1)) *
               std::polar(1.0, k * r * r) +
           a2 * std::exp(-r * r / (2 * w2 * w2));
  });
}

TrajectoryRecord free_trajectory(const GridPtr& grid, double dt, double chk_dt,
                                 double t_max) {
  TrajectoryRecord rec;
  rec.params = make_params(1, 0.5, 3.0);
  Field u = make_field(grid, [](double x) {
    return cplx(std::exp(-x * x / 2.0), 0.0);
  });
  LinearPropagator prop(grid, dt);
  const int per = static_cast<int>(std::lround(chk_dt / dt));
  double t = 0.0;
  rec.checkpoints.push_back({t, u});
  while (t < t_max - 1e-12) {
    for (int s = 0; s < per; ++s) u = Field(grid, prop.apply(u.values));
    t += chk_dt;
    rec.checkpoints.push_back({t, u});
  }
  return rec;
}

}  // namespace

TEST_CASE("virial value: zero field and the gaussian moment") {
  auto grid = Grid::cartesian1d(15.0, 4096);
  const auto w = make_quadratic_weight(1);
  REQUIRE(virial_value(zero_field(grid), w) == 0.0);

  // int x^2 e^{-2x^2} dx = sqrt(pi/2)/4 = 0.31333...
  auto u = make_field(grid, [](double x) { return cplx(std::exp(-x * x), 0.0); });
  const double expected = std::sqrt(std::numbers::pi / 2.0) / 4.0;
  REQUIRE(virial_value(u, w) == Approx(expected).epsilon(1e-12));
  REQUIRE(expected == Approx(0.3133).margin(5e-5));
}

TEST_CASE("cutoff weight reduces to the variance on compactly supported data") {
  const auto p = make_params(2, 0.5, 1.5);
  auto grid = Grid::radial(2, 20.0, 4096);
  auto u = make_real_field(grid, [](double r) { return bump(r, 3.0); });
  const auto quad = make_quadratic_weight(2);
  const double var = virial_value(u, quad);
  for (double R : {4.0, 8.0}) {
    const auto w = make_cutoff_weight(build_radial_cutoff(R), 2);
    REQUIRE(virial_value(u, w) == Approx(var).epsilon(1e-13));
  }
  // R inside the support differs
  const auto w2 = make_cutoff_weight(build_radial_cutoff(1.0), 2);
  REQUIRE(std::abs(virial_value(u, w2) - var) > 1e-3);
}

TEST_CASE("first derivative: real data gives zero, phased data the moment") {
  auto grid = Grid::cartesian1d(18.0, 8192);
  const auto w = make_quadratic_weight(1);
  auto real_u = make_real_field(grid, [](double x) { return std::exp(-x * x); });
  REQUIRE(virial_first_derivative(real_u, w) == Approx(0.0).margin(1e-13));

  const double k = 0.7;
  auto centered = make_field(grid, [=](double x) {
    return std::exp(-x * x) * std::polar(1.0, k * x);
  });
  REQUIRE(virial_first_derivative(centered, w) == Approx(0.0).margin(1e-10));

  auto shifted = make_field(grid, [=](double x) {
    return std::exp(-(x - 1.0) * (x - 1.0)) * std::polar(1.0, k * x);
  });
  // 4k * first moment of |u|^2 = 4k ||u||^2 (centred at 1)
  const double mass = std::sqrt(std::numbers::pi / 2.0);
  REQUIRE(virial_first_derivative(shifted, w) ==
          Approx(4.0 * k * mass).epsilon(1e-9));
}

TEST_CASE("second derivative with a = |x|^2: algebraic identities") {
  const auto p = make_params(2, 0.5, 1.5);  // mass-critical
  auto grid = Grid::radial(2, 16.0, 4096);
  const auto w = make_quadratic_weight(2);
  for (unsigned seed : {1u, 2u, 3u}) {
    auto u = random_radial_field(grid, seed);
    auto o = observables(u, p);
    const double d2v = virial_second_derivative(u, w, p);
    const double da2b = p.d * p.alpha + 2.0 * p.b;
    // standard identity
    REQUIRE(d2v == Approx(8.0 * o.kinetic -
                          4.0 * da2b / (p.alpha + 2.0) * o.potential)
                       .epsilon(1e-12));
    // rearrangement through the energy
    REQUIRE(d2v == Approx(4.0 * da2b * o.energy -
                          2.0 * (da2b - 4.0) * o.kinetic)
                       .epsilon(1e-10));
    // mass-critical: d alpha + 2b = 4 makes it 16 E
    REQUIRE(d2v == Approx(16.0 * o.energy).epsilon(1e-10));
  }
}

TEST_CASE("trajectory consistency: free flow matches to 1e-4") {
  auto grid = Grid::cartesian1d(20.0, 2048);
  auto rec = free_trajectory(grid, 1e-3, 1e-2, 0.2);
  auto rep = trajectory_consistency(rec, make_quadratic_weight(1), rec.params,
                                    /*free_flow=*/true);
  INFO("first " << rep.max_rel_first << " second " << rep.max_rel_second);
  REQUIRE(rep.max_rel_first < 1e-4);
  REQUIRE(rep.max_rel_second < 1e-4);
}

TEST_CASE("trajectory consistency: nonlinear mass-critical run to 2e-3") {
  const auto p = make_mass_critical_params(2, 0.5);
  auto grid = Grid::radial(2, 12.0, 2048);
  auto u0 = gaussian_field(grid, 1.0, 1.0);
  EvolveConfig cfg;
  cfg.dt0 = 1e-3;
  cfg.t_max = 0.3;
  cfg.record_every = 10;
  cfg.checkpoint_every = 10;
  auto rec = evolve(u0, p, cfg);
  REQUIRE(rec.checkpoints.size() >= 20);
  auto rep = trajectory_consistency(rec, make_quadratic_weight(2), p);
  INFO("first " << rep.max_rel_first << " second " << rep.max_rel_second);
  REQUIRE(rep.max_rel_first < 1e-4);
  REQUIRE(rep.max_rel_second < 2e-3);
}

TEST_CASE("trajectory consistency: stationary profile has dV/dt = 0") {
  const auto p = make_params(3, 0.5, 1.0);
  auto grid = Grid::radial(3, 20.0, 2048);
  GroundStateOptions opts;
  opts.method = GroundStateMethod::FixedPoint;
  auto gs = solve_ground_state(p, grid, opts);
  std::vector<cplx> v(grid->n);
  for (int j = 0; j < grid->n; ++j) v[j] = gs.q[j];
  const Field u(grid, v);
  const auto w = make_quadratic_weight(3);
  REQUIRE(std::abs(virial_first_derivative(u, w)) <
          1e-8 * virial_value(u, w));
}

TEST_CASE("trajectory consistency input validation") {
  auto grid = Grid::cartesian1d(10.0, 512);
  auto rec = free_trajectory(grid, 1e-3, 1e-2, 0.03);  // 4 checkpoints
  REQUIRE_THROWS_AS(trajectory_consistency(rec, make_quadratic_weight(1),
                                           rec.params, true),
                    std::invalid_argument);
}

TEST_CASE("radial sobolev constant dominates sampled quotients") {
  for (int d : {2, 3}) {
    const double c = radial_sobolev_constant(d);
    auto grid = Grid::radial(d, 16.0, 2048);
    for (unsigned seed : {4u, 5u, 6u, 7u}) {
      auto u = random_radial_field(grid, seed);
      auto o = observables(u, make_params(d, 0.5, 1.0));
      double sup = 0.0;
      for (int j = 0; j < grid->n; ++j)
        sup = std::max(sup, std::pow(grid->nodes[j], 0.5 * (d - 1)) *
                                std::abs(u.values[j]));
      REQUIRE(sup <= c * std::pow(o.mass * o.kinetic, 0.25) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("general localized bound dominates along a radial trajectory") {
  const auto p = make_params(3, 1.0, 1.0);  // intercritical, alpha < 4
  auto grid = Grid::radial(3, 14.0, 2048);
  auto u0 = gaussian_field(grid, 1.2, 1.1);
  EvolveConfig cfg;
  cfg.dt0 = 1e-3;
  cfg.t_max = 0.2;
  cfg.checkpoint_every = 40;
  auto rec = evolve(u0, p, cfg);
  const auto fam = build_radial_cutoff(5.0);
  const auto chi = chi_profile(fam, p, 20000);
  const auto w = make_cutoff_weight(fam, 3);
  for (const auto& c : rec.checkpoints) {
    const double d2v = virial_second_derivative(c.field, w, p);
    const auto bound = localized_bound_general(c.field, chi, p, 0.3);
    const double scale = std::max({std::abs(d2v), std::abs(bound.total), 1.0});
    REQUIRE(d2v <= bound.total + 1e-6 * scale);
  }
}

TEST_CASE("general bound: R-power remainder terms shrink at least 4x") {
  const auto p = make_params(3, 1.0, 1.0);
  auto grid = Grid::radial(3, 14.0, 2048);
  auto u = gaussian_field(grid, 1.2, 1.1);
  const auto chi1x = chi_profile(build_radial_cutoff(3.0), p, 20000);
  const auto chi2x = chi_profile(build_radial_cutoff(6.0), p, 20000);
  const auto b1 = localized_bound_general(u, chi1x, p, 0.3);
  const auto b2 = localized_bound_general(u, chi2x, p, 0.3);
  REQUIRE(b2.bilap_term <= b1.bilap_term / 4.0 + 1e-15);
  REQUIRE(b2.young_term <= b1.young_term / 4.0 + 1e-15);
  REQUIRE(b2.grad_term == Approx(b1.grad_term));  // eps K does not see R
  // alpha = 4 branch carries the gradient tail instead of the Young split
  const auto p4 = make_params(2, 0.5, 4.0);
  auto g2 = Grid::radial(2, 14.0, 2048);
  auto v = gaussian_field(g2, 0.9, 1.0);
  const auto c1 = chi_profile(build_radial_cutoff(3.0), p4, 20000);
  const auto c2 = chi_profile(build_radial_cutoff(6.0), p4, 20000);
  const auto a1 = localized_bound_general(v, c1, p4, 0.0);
  const auto a2 = localized_bound_general(v, c2, p4, 0.0);
  REQUIRE(a2.grad_term <= a1.grad_term / 4.0);
  REQUIRE(a1.young_term == 0.0);
}

TEST_CASE("general bound rejects alpha > 4") {
  const auto p = make_params(2, 0.5, 5.0);
  auto grid = Grid::radial(2, 10.0, 512);
  const auto chi = chi_profile(build_radial_cutoff(2.0), p, 5000);
  REQUIRE_THROWS_AS(
      localized_bound_general(gaussian_field(grid, 1.0, 1.0), chi, p, 0.1),
      std::invalid_argument);
}

TEST_CASE("mass-critical bound: structure and negativity") {
  const auto p = make_mass_critical_params(2, 0.5);
  auto grid = Grid::radial(2, 40.0, 4096);
  // amplitude bisected so E = -1
  double lo = 0.5, hi = 8.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (observables(gaussian_field(grid, mid, 1.0), p).energy > -1.0 ? lo : hi) =
        mid;
  }
  auto u = gaussian_field(grid, 0.5 * (lo + hi), 1.0);
  auto o = observables(u, p);
  REQUIRE(o.energy == Approx(-1.0).margin(1e-6));

  SECTION("eps below eps_max keeps the chi integral nonnegative") {
    const auto chi = chi_profile(build_radial_cutoff(6.0), p, 50000);
    const double eps = 0.5 * chi.eps_max;
    const auto b = localized_bound_mass_critical(u, chi, p, eps, o.energy);
    REQUIRE(b.chi_term <= 1e-12);
    REQUIRE(b.total <= 16.0 * o.energy + b.bilap_term + b.grad_term +
                           b.young_term + 1e-12);
  }
  SECTION("large R makes the bound negative for negative energy") {
    // the bridge's third derivative makes the bi-Laplacian constant a few
    // thousand, so "R large" genuinely means R ~ 60 at this mass
    const auto chi = chi_profile(build_radial_cutoff(75.0), p, 50000);
    const double eps = 0.5 * chi.eps_max;
    const auto b = localized_bound_mass_critical(u, chi, p, eps, o.energy);
    INFO("total " << b.total << " main " << b.main << " bilap "
                  << b.bilap_term);
    REQUIRE(b.total < 0.0);
    REQUIRE(b.total <= 0.5 * b.main + 1e-9);  // the 8 E(u0) < 0 shape
  }
  SECTION("compact support inside R kills the chi integral exactly") {
    auto v = make_real_field(grid, [](double r) { return bump(r, 4.0); });
    const auto chi = chi_profile(build_radial_cutoff(6.0), p, 20000);
    const auto b = localized_bound_mass_critical(v, chi, p, 0.1, -1.0);
    REQUIRE(b.chi_term == 0.0);
  }
  SECTION("domination along a mass-critical trajectory") {
    EvolveConfig cfg;
    cfg.dt0 = 1e-3;
    cfg.t_max = 0.15;
    cfg.checkpoint_every = 50;
    auto rec = evolve(u, p, cfg);
    const auto fam = build_radial_cutoff(8.0);
    const auto chi = chi_profile(fam, p, 20000);
    const auto w = make_cutoff_weight(fam, 2);
    for (const auto& c : rec.checkpoints) {
      const double d2v = virial_second_derivative(c.field, w, p);
      const auto b = localized_bound_mass_critical(c.field, chi, p,
                                                   0.5 * chi.eps_max, o.energy);
      const double scale = std::max({std::abs(d2v), std::abs(b.total), 1.0});
      REQUIRE(d2v <= b.total + 1e-6 * scale);
    }
  }
}

TEST_CASE("1d bound: exact value on interior data and domination") {
  const auto p = make_mass_critical_params(1, 0.5);
  auto grid = Grid::cartesian1d(15.0, 4096);
  const auto chi = chi_profile(build_1d_cutoff(), p, 50000);

  SECTION("supported in |x| < 1: bound is exactly 16 E0") {
    auto u = make_real_field(grid, [](double x) { return 0.5 * bump(x, 0.9); });
    const auto b = bound_1d(u, chi, -2.0);
    REQUIRE(b.total == -32.0);
  }
  SECTION("tail mass above a0 is rejected with the measured value") {
    auto u = gaussian_field(grid, 1.0, 4.0);
    REQUIRE_THROWS_WITH(bound_1d(u, chi, -1.0),
                        Catch::Matchers::ContainsSubstring("tail mass"));
  }
  SECTION("domination along a compliant 1d trajectory") {
    // narrow data keeps the tail mass under a0 for the whole run
    auto u0 = make_field(grid, [](double x) {
      return cplx(1.2 * std::exp(-8.0 * x * x), 0.0);
    });
    double tail = 0.0;
    for (int j = 0; j < grid->n; ++j)
      if (std::abs(grid->nodes[j]) > 1.0)
        tail += grid->weights[j] * std::norm(u0.values[j]);
    REQUIRE(std::sqrt(tail) < chi.a0);
    const double e0 = observables(u0, p).energy;
    EvolveConfig cfg;
    cfg.dt0 = 5e-4;
    cfg.t_max = 0.1;
    cfg.checkpoint_every = 40;
    auto rec = evolve(u0, p, cfg);
    const auto w = make_cutoff_weight(build_1d_cutoff(), 1);
    for (const auto& c : rec.checkpoints) {
      const double d2v = virial_second_derivative(c.field, w, p);
      const auto b = bound_1d(c.field, chi, e0);
      const double scale = std::max({std::abs(d2v), std::abs(b.total), 1.0});
      REQUIRE(d2v <= b.total + 1e-6 * scale);
    }
  }
}

TEST_CASE("energy comparison function f") {
  const auto p = make_params(3, 1.0, 1.0);
  auto gs = solve_ground_state(p, Grid::radial(3, 25.0, 8192));
  auto t = thresholds(gs);

  REQUIRE(f_function(0.0, gs) == 0.0);
  REQUIRE(f_function(t.x0, gs) ==
          Approx(gs.energy * std::pow(gs.mass, p.sigma)).epsilon(1e-6));

  // f' changes sign exactly once, at x0
  REQUIRE(f_slope(0.9 * t.x0, gs) > 0.0);
  REQUIRE(f_slope(1.1 * t.x0, gs) < 0.0);
  double lo = 0.5 * t.x0, hi = 2.0 * t.x0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f_slope(mid, gs) > 0 ? lo : hi) = mid;
  }
  REQUIRE(0.5 * (lo + hi) == Approx(t.x0).epsilon(1e-8));
}
