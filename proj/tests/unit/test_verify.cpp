#include <doctest.h>

#include <cmath>

#include "nlfd/barenblatt.hpp"
#include "nlfd/error.hpp"
#include "nlfd/solver.hpp"
#include "nlfd/verify.hpp"

using namespace nlfd;

namespace {

Field bump(const Grid& g, double radius, double height) {
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (distance(g.center(i), {0.0, 0.0}) < radius) f[i] = height;
  }
  return f;
}

/// Separable trajectory u(x, t) = g(x) t^q sampled at the given times.
Trajectory separable(const Grid& grid, double q, const std::vector<double>& times) {
  Trajectory tr;
  for (double t : times) {
    Field f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double x = grid.center(i)[0];
      f[i] = std::exp(-x * x) * (t > 0.0 ? std::pow(t, q) : 1.0);
    }
    tr.snapshots.push_back({t, f, 0.0});
  }
  return tr;
}

Trajectory solve(const Grid& g, double sigma, double m, const Field& u0, double t_end,
                 std::vector<double> times, double dt_max = 0.01) {
  SolverConfig cfg;
  cfg.t_end = t_end;
  cfg.dt_initial = 1e-4;
  cfg.dt_max = dt_max;
  cfg.snapshot_times = std::move(times);
  return run(g, KernelSpec::fractional_power(g.dim(), sigma), NonlinearitySpec::pure_power(m), u0, cfg);
}

}  // namespace

TEST_CASE("record and report plumbing") {
  CheckRecord r;
  r.set("a", 1.0);
  r.set("a", 2.0);
  CHECK(r.value("a") == 2.0);
  CHECK(r.values.size() == 1);
  CHECK_THROWS_AS(r.value("b"), Error);
  DiagnosticsReport rep;
  CHECK(rep.all_passed());
  r.status = CheckStatus::not_applicable;
  rep.add(r);
  CHECK(rep.all_passed());
  r.status = CheckStatus::fail;
  rep.add(r);
  CHECK_FALSE(rep.all_passed());
  CHECK(rep.records().size() == 2);
}

TEST_CASE("mass conservation") {
  const Grid g = make_grid(1, 4.0, 32);
  Trajectory zero;
  zero.snapshots.push_back({0.0, Field(g), 0.0});
  zero.snapshots.push_back({1.0, Field(g), 0.0});
  const CheckRecord z = check_mass_conservation(zero);
  CHECK(z.value("max_relative_drift") == 0.0);
  CHECK(z.passed());

  const Grid tiny = make_grid(1, 2.0, 128);
  const Trajectory leaky = solve(tiny, 1.0, 0.75, bump(tiny, 0.5, 1.0), 1.0, {0.5, 1.0}, 0.05);
  const CheckRecord l = check_mass_conservation(leaky);
  CHECK_FALSE(l.passed());
  CHECK(l.value("leak_fraction") > 0.01);
  CHECK(l.value("max_relative_drift") < 1e-6);
}

TEST_CASE("smoothing on exact self-similar data") {
  const double m = 0.75, sigma = 1.0, alpha = 4.0 / 3.0;
  const ProfileResult prof = compute_profile(make_self_similar_params(1, m, sigma, 1.0), make_grid(1, 50.0, 512));
  const Grid g = make_grid(1, 200.0, 512);
  Trajectory tr;
  // Mass is conserved along the family, so B(., 1) stands in for the t = 0 datum.
  tr.snapshots.push_back({0.0, reconstruct(prof.profile, g, 1.0), 0.0});
  for (double t = 1.0; t <= 1000.0 * (1 + 1e-12); t *= std::sqrt(10.0)) {
    tr.snapshots.push_back({t, reconstruct(prof.profile, g, t), 0.0});
  }
  const CheckRecord r = check_smoothing(tr, m, sigma, 1);
  CHECK(r.passed());
  CHECK(std::abs(r.value("fitted_alpha") - alpha) <= 1e-3 * alpha);

  Trajectory short_span = tr;
  short_span.snapshots.erase(short_span.snapshots.begin() + 3, short_span.snapshots.end());
  CHECK_THROWS_AS(check_smoothing(short_span, m, sigma, 1), Error);
}

TEST_CASE("harnack ratio") {
  const Grid g = make_grid(1, 8.0, 256);  // h = 1/16, so B_R holds exactly 2R/h cells
  const NonlinearitySpec phi = NonlinearitySpec::pure_power(0.75);
  HarnackOptions o;
  o.R = 2.0;
  o.t = 1.0;
  for (double p : {1.0, 1.5}) {
    o.p = p;
    for (double a : {0.1, 3.0}) {
      const CheckRecord r = check_positivity_harnack(Field(g, a), phi, o);
      CHECK(r.passed());
      CHECK(r.value("c_measured") == doctest::Approx(std::pow(2.0 * o.R, -1.0 / p)).epsilon(1e-12));
    }
  }
  // Homogeneity on a nonconstant field.
  o.p = 1.3;
  o.on_solution = true;
  Field u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1.0 + std::exp(-g.center(i)[0] * g.center(i)[0]);
  const double c0 = check_positivity_harnack(u, phi, o).value("c_measured");
  for (double lam : {1e-3, 7.0, 1e4}) {
    Field v = u;
    for (double& x : v.values) x *= lam;
    CHECK(check_positivity_harnack(v, phi, o).value("c_measured") == doctest::Approx(c0).epsilon(1e-12));
  }
  o.p = 3.0;  // N/(N - sigma) = 2 for sigma = 0.5
  o.sigma = 0.5;
  CHECK_THROWS_AS(check_positivity_harnack(u, phi, o), Error);
  o.p = 0.5;
  CHECK_THROWS_AS(check_positivity_harnack(u, phi, o), Error);
}

TEST_CASE("positivity after a short run from a compactly supported bump") {
  const Grid g = make_grid(1, 20.0, 512);
  const Trajectory tr = solve(g, 1.0, 0.75, bump(g, 1.0, 1.0), 0.1, {0.1});
  const Field& u = tr.snapshots.back().field;
  CHECK(check_positive_on_box(u, {0.0, 0.0}, 19.9, 1e-12).passed());
  HarnackOptions o;
  o.R = 4.0;
  o.t = 0.1;
  o.p = 1.0 / 0.75;
  o.on_solution = true;
  CHECK(check_positivity_harnack(u, NonlinearitySpec::pure_power(0.75), o).passed());
  CHECK_FALSE(check_positive_on_box(bump(g, 1.0, 1.0), {0.0, 0.0}, 5.0, 1e-12).passed());
}

TEST_CASE("monotonicity on separable data") {
  const Grid g = make_grid(1, 4.0, 32);
  const double m = 0.5;
  const NonlinearitySpec phi = NonlinearitySpec::pure_power(m);  // A = (1 - m)/m = 1
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0, 4.0};
  CHECK(check_monotonicity(separable(g, 1.0 / (1.0 - m), times), phi, 1e-10).value("max_violation") <= 1e-14);
  CHECK(check_monotonicity(separable(g, 1.0, times), phi, 1e-10).value("max_violation") == 0.0);
  CHECK_FALSE(check_monotonicity(separable(g, 5.0, times), phi, 1e-10).passed());
  CHECK_THROWS_AS(check_monotonicity(separable(g, 1.0, {0.0, 1.0}), phi, 1e-10), Error);

  const Grid run_grid = make_grid(1, 20.0, 512);
  const Trajectory tr = solve(run_grid, 1.0, m, bump(run_grid, 1.0, 1.0), 1.0, {0.25, 0.5, 0.75, 1.0});
  CHECK(check_monotonicity(tr, phi, 1e-10).passed());
}

TEST_CASE("tail control pieces") {
  const Grid g = make_grid(1, 50.0, 1024);
  const Trajectory tr = solve(g, 1.0, 0.75, bump(g, 1.0, 1.0), 2.0, {0.5, 1.0, 2.0}, 0.02);
  TailOptions o;
  o.radii = {4.0, 8.0, 16.0};
  o.N_over_alpha = 0.75;
  o.m = 0.75;
  const CheckRecord r = check_tail_control(tr, o);
  CHECK(r.value("C_fitted") > 0.0);
  CHECK(r.value("C_min_admissible") >= r.value("C_fitted"));
  CHECK(r.value("worst_R_slope") < 0.0);
  CHECK(r.curves.size() == 2);
  CHECK_THROWS_AS(check_tail_control(tr, TailOptions{}), Error);
}

TEST_CASE("extinction") {
  const Grid g = make_grid(1, 10.0, 128);
  Trajectory zero;
  zero.snapshots.push_back({0.0, Field(g), 0.0});
  zero.events.push_back({0.0, EventKind::extinction});
  for (double m : {0.3, 0.75}) {
    const CheckRecord z = check_extinction(zero, m, 0.5, 1);
    CHECK(z.passed());
    CHECK(z.value("T_ext") == 0.0);
  }
  const Trajectory gone = solve(g, 0.5, 0.3, bump(g, 1.0, 1.0), 10.0, {0.5, 1.0, 1.5, 2.0, 3.0}, 0.01);
  const CheckRecord r = check_extinction(gone, 0.3, 0.5, 1);
  CHECK(r.value("extinct") == 1.0);
  CHECK(r.value("T_ext") > 0.0);
  CHECK(r.value("p") == doctest::Approx(1.4));
  // Extinction above m_c is an anomaly.
  CHECK_FALSE(check_extinction(gone, 0.75, 0.5, 1).passed());
}

TEST_CASE("asymptotics on exact self-similar data") {
  const double m = 0.75, sigma = 1.0, alpha = 4.0 / 3.0;
  const Grid g = make_grid(1, 50.0, 1024);
  const ProfileResult prof = compute_profile(make_self_similar_params(1, m, sigma, 1.0), g);
  std::vector<AsymptoticEntry> family;
  for (double k : {1.0, 4.0, 16.0}) {
    // Box of half width 50 k^alpha, so the rescaled field covers g without extrapolation.
    const Field uk = reconstruct(prof.profile, make_grid(1, 50.0 * std::pow(k, alpha), 1024), k);
    family.push_back({k, rescale_solution(uk, k, alpha, g).field});
  }
  AsymptoticOptions o;
  const CheckRecord r = check_asymptotics(family, prof.field, 1.0, m, sigma, 1, o);
  CHECK(r.value("e1(k=1)") <= 1e-3);
  for (const auto& [key, v] : r.values) {
    if (key.rfind("e1(", 0) == 0) CHECK(v <= 2e-2);
  }
  CHECK_THROWS_AS(check_asymptotics(family, prof.field, 1.0, 0.4, 0.5, 1, o), Error);
}

TEST_CASE("decay rate") {
  const Grid g = make_grid(1, 50.0, 1024);
  const ProfileResult prof = compute_profile(make_self_similar_params(1, 0.75, 1.0, 1.0), g);
  const CheckRecord r = check_decay_rate(prof.field, 1.0, {2.0, 4.0, 8.0, 16.0, 32.0}, 1.0);
  CHECK(r.value("min_at_largest_R") > 0.0);
  CHECK(r.value("power_law_exponent") > 0.0);
  CHECK(r.passed());
  CHECK(check_decay_rate(Field(g), 1.0, {2.0, 4.0}, 1.0).status == CheckStatus::not_applicable);
}

TEST_CASE("elliptic supersolution residual along a run") {
  const Grid g = make_grid(1, 20.0, 512);
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, KernelSpec::fractional_power(1, 1.0));
  const NonlinearitySpec phi = NonlinearitySpec::pure_power(0.75);
  SolverConfig cfg;
  cfg.t_end = 0.5;
  cfg.dt_max = 0.01;
  cfg.snapshot_times = {0.5};
  const Trajectory tr = run(op, phi, bump(g, 1.0, 1.0), cfg);
  const CheckRecord r = check_elliptic_supersolution(op, tr.snapshots.back().field, phi, 0.5);
  CHECK(r.passed());
  CHECK(r.value("eta") == doctest::Approx(1.0 / (phi.A() * r.value("varpi") * 0.5)));
}

TEST_CASE("comparison check") {
  const Grid g = make_grid(1, 4.0, 32);
  const Trajectory a = separable(g, 1.0, {0.0, 1.0, 2.0});
  Trajectory b = a;
  for (auto& s : b.snapshots) {
    for (double& v : s.field.values) v *= 1.5;
  }
  CHECK(check_comparison(a, b).passed());
  CHECK_FALSE(check_comparison(b, a).passed());
  CHECK_THROWS_AS(check_comparison(a, separable(g, 1.0, {0.0, 1.0})), Error);
}
