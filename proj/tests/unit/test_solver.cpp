#include <doctest.h>

#include <cmath>
#include <random>

#include "nlfd/error.hpp"
#include "nlfd/solver.hpp"
#include "nlfd/verify.hpp"

using namespace nlfd;

namespace {

Field bump(const Grid& g, double radius, double height, double shift = 0.0) {
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (distance(g.center(i), {shift, 0.0}) < radius) f[i] = height;
  }
  return f;
}

}  // namespace

TEST_CASE("config validation") {
  SolverConfig c;
  c.snapshot_times = {0.5, 0.2};
  CHECK_THROWS_AS(c.validate(), Error);
  c.snapshot_times = {2.0};
  CHECK_THROWS_AS(c.validate(), Error);
  c = SolverConfig{};
  c.dt_initial = 2.0;  // above dt_max
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK_NOTHROW(SolverConfig{}.validate());
}

TEST_CASE("single implicit step") {
  const Grid g = make_grid(1, 8.0, 128);
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, KernelSpec::fractional_power(1, 1.0));
  const NonlinearitySpec phi = NonlinearitySpec::pure_power(0.75);

  const StepResult z = step(op, phi, Field(g), 0.1);
  CHECK(max_norm(z.u.values) == 0.0);

  const Field u0 = bump(g, 1.0, 2.0);
  SolverConfig cfg;
  const StepResult r = step(op, phi, u0, 0.05, cfg);
  CHECK(min_value(r.u.values) >= 0.0);
  // Discrete mass-flux identity of the implicit step.
  const double balance = integrate(r.u) + 0.05 * r.leak_flux - integrate(u0);
  CHECK(std::abs(balance) <= 10.0 * cfg.newton_tol * g.size() * max_norm(u0.values) * g.cell_volume());

  const Grid per = make_grid(1, 8.0, 64, BoundaryMode::periodic);
  const DiscreteOperator pop = DiscreteOperator::assemble_quadrature(per, KernelSpec::fractional_power(1, 1.0));
  const StepResult c = step(pop, phi, Field(per, 0.7), 0.3);
  for (double v : c.u.values) CHECK(v == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("zero datum goes extinct at t = 0") {
  const Grid g = make_grid(1, 4.0, 32);
  SolverConfig cfg;
  cfg.snapshot_times = {0.5, 1.0};
  const Trajectory tr = run(g, KernelSpec::fractional_power(1, 1.0), NonlinearitySpec::pure_power(0.5), Field(g), cfg);
  CHECK(tr.extinction_time() == 0.0);
  REQUIRE(tr.snapshots.size() == 3);
  for (const auto& s : tr.snapshots) CHECK(max_norm(s.field.values) == 0.0);
}

TEST_CASE("bump run: positivity, landing, mass balance") {
  const Grid g = make_grid(1, 10.0, 256);
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, KernelSpec::fractional_power(1, 1.0));
  const NonlinearitySpec phi = NonlinearitySpec::pure_power(0.75);
  SolverConfig cfg;
  cfg.dt_initial = 1e-4;
  cfg.dt_max = 0.01;
  cfg.t_end = 0.3;
  cfg.snapshot_times = {0.1, 0.2, 0.3};
  const Field u0 = bump(g, 1.0, 1.0);
  const Trajectory tr = run(op, phi, u0, cfg);
  REQUIRE(tr.snapshots.size() == 4);
  CHECK(tr.snapshots[0].time == 0.0);
  CHECK(tr.snapshots[0].field.values == u0.values);
  for (std::size_t k = 1; k < 4; ++k) {
    CHECK(tr.snapshots[k].time == cfg.snapshot_times[k - 1]);
    CHECK(min_value(tr.snapshots[k].field.values) > 0.0);
  }
  const double M0 = integrate(u0);
  for (const auto& s : tr.snapshots) {
    CHECK(std::abs(integrate(s.field) + s.leaked_mass - M0) <= 1e-8 * M0);
  }
  CHECK(tr.leaked_mass > 0.0);
}

TEST_CASE("interpolated snapshots bracket the landed ones") {
  const Grid g = make_grid(1, 6.0, 64);
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, KernelSpec::fractional_power(1, 0.8));
  const NonlinearitySpec phi = NonlinearitySpec::pure_power(0.6);
  SolverConfig cfg;
  cfg.dt_initial = 1e-3;
  cfg.dt_max = 0.02;
  cfg.t_end = 0.5;
  cfg.snapshot_times = {0.123, 0.377};
  cfg.snapshot_mode = SnapshotMode::interpolate;
  const Trajectory a = run(op, phi, bump(g, 1.0, 1.0), cfg);
  cfg.snapshot_mode = SnapshotMode::land;
  const Trajectory b = run(op, phi, bump(g, 1.0, 1.0), cfg);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
    CHECK(a.snapshots[k].time == doctest::Approx(b.snapshots[k].time));
    const double scale = max_norm(b.snapshots[k].field.values);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(a.snapshots[k].field[i] - b.snapshots[k].field[i]) <= 0.05 * scale);
    }
  }
}

TEST_CASE("comparison principle on random ordered data") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Grid g = make_grid(1, 5.0, 64);
  for (const KernelSpec& k : {KernelSpec::fractional_power(1, 1.0), KernelSpec::convolution_modulated(1, 0.7, 0.5)}) {
    const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, k);
    const NonlinearitySpec phi = NonlinearitySpec::pure_power(0.5);
    SolverConfig cfg;
    cfg.newton_tol = 1e-12;
    cfg.t_end = 0.5;
    cfg.dt_max = 0.05;
    cfg.snapshot_times = {0.1, 0.25, 0.5};
    for (int trial = 0; trial < 5; ++trial) {
      Field lo(g), hi(g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        lo[i] = U(rng) * (std::abs(g.center(i)[0]) < 2.0);
        hi[i] = lo[i] + 0.5 * U(rng);
      }
      const Trajectory a = run(op, phi, lo, cfg), b = run(op, phi, hi, cfg);
      CHECK(check_comparison(a, b).passed());
    }
  }
}

TEST_CASE("periodic max-norm contraction") {
  const Grid g = make_grid(1, 4.0, 64, BoundaryMode::periodic);
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, KernelSpec::fractional_power(1, 1.2));
  SolverConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt_max = 0.05;
  const Trajectory tr = run(op, NonlinearitySpec::pure_power(0.4), bump(g, 1.0, 3.0), cfg);
  for (std::size_t k = 1; k < tr.history.size(); ++k) {
    CHECK(tr.history[k].max_norm <= tr.history[k - 1].max_norm * (1.0 + 1e-12));
    CHECK(tr.history[k].mass == doctest::Approx(tr.history[0].mass).epsilon(1e-9));
  }
}

TEST_CASE("dense and iterative linear solves agree") {
  const Grid g = make_grid(1, 6.0, 128);
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, KernelSpec::fractional_power(1, 1.0));
  const NonlinearitySpec phi = NonlinearitySpec::pure_power(0.75);
  SolverConfig dense;
  dense.dense_limit = 1024;
  SolverConfig pcg;
  pcg.dense_limit = 0;
  const Field u0 = bump(g, 1.0, 1.0);
  const Field a = step(op, phi, u0, 0.05, dense).u, b = step(op, phi, u0, 0.05, pcg).u;
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-8));
}

TEST_CASE("extinction below m_c") {
  const Grid g = make_grid(1, 10.0, 256);
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, KernelSpec::fractional_power(1, 0.5));
  SolverConfig cfg;
  cfg.dt_max = 0.01;
  cfg.t_end = 20.0;
  const Trajectory tr = run(op, NonlinearitySpec::pure_power(0.3), bump(g, 1.0, 1.0), cfg);
  CHECK(tr.has_event(EventKind::extinction));
  CHECK(tr.extinction_time() > 0.0);
  CHECK(tr.extinction_time() < 20.0);
  CHECK(max_norm(tr.snapshots.back().field.values) == 0.0);
}

TEST_CASE("large concentrated data advance without step collapse") {
  // beta' = 0 off the support; Newton needs a nonzero start there to reach the tail cells.
  const Grid g = make_grid(1, 50.0, 1024);
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, KernelSpec::fractional_power(1, 1.0));
  SolverConfig cfg;
  cfg.t_end = 10.0;
  cfg.dt_initial = 1e-6;
  cfg.dt_max = 1.0;
  cfg.dt_relative_max = 0.05;
  const Field u0 = bump(g, 0.2, 5e8);
  const Trajectory tr = run(op, NonlinearitySpec::pure_power(0.75), u0, cfg);
  CHECK_FALSE(tr.has_event(EventKind::newton_failure));
  CHECK(tr.history.size() < 500);
  const Field& u = tr.snapshots.back().field;
  CHECK(integrate(u) + tr.leaked_mass == doctest::Approx(integrate(u0)).epsilon(1e-8));
  CHECK(min_value(u.values) > 0.0);
}
