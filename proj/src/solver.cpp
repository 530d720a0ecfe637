#include "nlfd/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "nlfd/error.hpp"

namespace nlfd {

void SolverConfig::validate() const {
  auto bad = [](const std::string& msg) { throw Error(ErrorCode::invalid_argument, msg); };
  if (!(dt_min > 0.0 && dt_initial > 0.0 && dt_max > 0.0)) bad("time steps must be positive");
  if (!(dt_min <= dt_initial && dt_initial <= dt_max)) bad("need dt_min <= dt_initial <= dt_max");
  if (!(t_end > 0.0)) bad("t_end must be positive");
  if (!(newton_tol > 0.0) || newton_max_iter < 1) bad("invalid Newton settings");
  if (!(dt_growth >= 1.0)) bad("dt_growth must be at least 1");
  if (!(extinction_floor >= 0.0)) bad("extinction_floor must be nonnegative");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    const double t = snapshot_times[i];
    if (!(t >= 0.0 && t <= t_end)) bad("snapshot times must lie in [0, t_end]");
    if (i > 0 && !(t > snapshot_times[i - 1])) bad("snapshot times must be strictly increasing");
  }
}

const char* to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::extinction: return "extinction";
    case EventKind::newton_failure: return "newton_failure";
    case EventKind::dt_floor: return "dt_floor";
  }
  return "unknown";
}

bool Trajectory::has_event(EventKind kind) const noexcept {
  return std::any_of(events.begin(), events.end(), [&](const Event& e) { return e.kind == kind; });
}

double Trajectory::extinction_time() const noexcept {
  for (const Event& e : events) {
    if (e.kind == EventKind::extinction) return e.time;
  }
  return -1.0;
}

struct Stepper::Impl {
  const DiscreteOperator& op;
  NonlinearitySpec phi;
  SolverConfig config;
  std::vector<double> diag;  // row sums + leak
  std::optional<Eigen::MatrixXd> dense;

  Impl(const DiscreteOperator& o, const NonlinearitySpec& p, const SolverConfig& c)
      : op(o), phi(p), config(c) {
    const std::size_t cells = op.grid().size();
    diag.resize(cells);
    for (std::size_t i = 0; i < cells; ++i) diag[i] = op.row_sums()[i] + op.leak()[i];
    if (cells <= config.dense_limit) {
      Eigen::MatrixXd a(cells, cells);
      for (std::size_t i = 0; i < cells; ++i) {
        for (std::size_t j = 0; j < cells; ++j) {
          a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              i == j ? diag[i] : -op.weight(i, j);
        }
      }
      dense = std::move(a);
    }
  }

  // Odd extension of beta, so iterates may cross zero.
  double beta(double w) const { return w >= 0.0 ? phi.beta_unchecked(w) : -phi.beta_unchecked(-w); }
  double beta_prime(double w) const {
    const double s = phi.beta_unchecked(std::abs(w));
    return s == 0.0 ? 0.0 : 1.0 / phi.phi_prime_unchecked(s);
  }

  void residual(const std::vector<double>& w, const std::vector<double>& un, double dt,
                std::vector<double>& lw, std::vector<double>& r) const {
    op.apply(w, lw);
    for (std::size_t i = 0; i < w.size(); ++i) r[i] = beta(w[i]) + dt * lw[i] - un[i];
  }

  // Solves (diag(d) + dt A) x = b.
  void solve(const std::vector<double>& d, double dt, const std::vector<double>& b,
             std::vector<double>& x) const {
    const std::size_t cells = b.size();
    if (dense) {
      Eigen::MatrixXd j = dt * *dense;
      for (std::size_t i = 0; i < cells; ++i) j(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += d[i];
      Eigen::LLT<Eigen::MatrixXd> llt(j);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::newton_failure, "Jacobian factorization failed");
      }
      Eigen::Map<const Eigen::VectorXd> bv(b.data(), static_cast<Eigen::Index>(cells));
      Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(cells)) = llt.solve(bv);
      return;
    }
    // Jacobi-preconditioned conjugate gradients with FFT matvecs.
    std::vector<double> pre(cells), r(b), z(cells), p(cells), q(cells), wv(cells);
    for (std::size_t i = 0; i < cells; ++i) pre[i] = 1.0 / (d[i] + dt * diag[i]);
    std::fill(x.begin(), x.end(), 0.0);
    auto dot = [](const std::vector<double>& a, const std::vector<double>& c) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * c[i];
      return s;
    };
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) return;
    for (std::size_t i = 0; i < cells; ++i) z[i] = pre[i] * r[i];
    p = z;
    double rz = dot(r, z);
    const int max_iter = 20000;
    for (int it = 0; it < max_iter; ++it) {
      op.apply_weights(p, wv);
      for (std::size_t i = 0; i < cells; ++i) q[i] = (d[i] + dt * diag[i]) * p[i] - dt * wv[i];
      const double alpha = rz / dot(p, q);
      for (std::size_t i = 0; i < cells; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      if (std::sqrt(dot(r, r)) <= config.linear_tol * bnorm) return;
      for (std::size_t i = 0; i < cells; ++i) z[i] = pre[i] * r[i];
      const double rz_new = dot(r, z);
      const double beta_cg = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < cells; ++i) p[i] = z[i] + beta_cg * p[i];
    }
  }

  StepResult step(const Field& u_n, double dt) const {
    if (u_n.grid != op.grid()) throw Error(ErrorCode::grid_mismatch, "state lives on a different grid");
    const std::size_t cells = u_n.size();
    const std::vector<double>& un = u_n.values;
    StepResult result{Field(u_n.grid), 0, 0.0, 0.0};
    const double un_max = max_norm(un);
    if (un_max == 0.0) return result;

    std::vector<double> w(cells), lw(cells), r(cells), d(cells), delta(cells), trial(cells),
        rt(cells), neg(cells);
    for (std::size_t i = 0; i < cells; ++i) w[i] = phi.phi_unchecked(std::max(un[i], 0.0));
    residual(w, un, dt, lw, r);
    auto norm2 = [](const std::vector<double>& v) {
      const double top = max_norm(v);
      if (top == 0.0) return 0.0;
      double s = 0.0;
      for (double x : v) s += (x / top) * (x / top);
      return top * std::sqrt(s);
    };
    // beta' vanishes where u_n = 0, so Newton started from phi(u_n) overshoots badly in cells
    // fed only by inflow.  Start those cells from u_n + dt * inflow instead.
    for (std::size_t i = 0; i < cells; ++i) {
      trial[i] = lw[i] < 0.0 ? phi.phi_unchecked(std::max(un[i], 0.0) - dt * lw[i]) : w[i];
    }
    residual(trial, un, dt, delta, rt);
    if (norm2(rt) < norm2(r)) {
      w.swap(trial);
      r.swap(rt);
    }
    const double eps_floor = 64.0 * std::numeric_limits<double>::epsilon();
    bool converged = false;
    int it = 0;
    for (; it < config.newton_max_iter; ++it) {
      const double rn = max_norm(r);
      double scale = un_max;
      for (double x : w) scale = std::max(scale, std::abs(beta(x)));
      if (rn <= config.newton_tol * scale) {
        converged = true;
        break;
      }
      for (std::size_t i = 0; i < cells; ++i) {
        d[i] = beta_prime(w[i]);
        neg[i] = -r[i];
      }
      solve(d, dt, neg, delta);
      const double f0 = norm2(r);
      double lambda = 1.0;
      bool accepted = false;
      for (int halving = 0; halving <= 20; ++halving) {
        for (std::size_t i = 0; i < cells; ++i) trial[i] = w[i] + lambda * delta[i];
        residual(trial, un, dt, lw, rt);
        if (norm2(rt) <= (1.0 - 1e-4 * lambda) * f0) {
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!accepted) {
        // Roundoff stagnation: accept when already at the floating-point floor.
        if (rn <= eps_floor * scale) {
          converged = true;
          break;
        }
        throw Error(ErrorCode::newton_failure, "line search failed in Newton iteration");
      }
      w.swap(trial);
      r.swap(rt);
    }
    if (!converged) throw Error(ErrorCode::newton_failure, "Newton iteration limit reached");

    result.iterations = it;
    result.residual = max_norm(r);
    double u_max = 0.0;
    for (std::size_t i = 0; i < cells; ++i) u_max = std::max(u_max, std::abs(beta(w[i])));
    const auto leak = op.leak();
    for (std::size_t i = 0; i < cells; ++i) {
      double u = beta(w[i]);
      if (u < 0.0) {
        if (u < -1e-13 * u_max) {
          throw Error(ErrorCode::scheme_violation, "implicit step produced a negative value");
        }
        u = 0.0;
      }
      result.u[i] = u;
      result.leak_flux += leak[i] * phi.phi_unchecked(u);
    }
    result.leak_flux *= op.grid().cell_volume();
    return result;
  }
};

Stepper::Stepper(const DiscreteOperator& op, const NonlinearitySpec& phi, const SolverConfig& config)
    : impl_(std::make_unique<Impl>(op, phi, config)) {}
Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;
Stepper& Stepper::operator=(Stepper&&) noexcept = default;

StepResult Stepper::step(const Field& u_n, double dt) const { return impl_->step(u_n, dt); }

StepResult step(const DiscreteOperator& op, const NonlinearitySpec& phi, const Field& u_n,
                double dt, const SolverConfig& config) {
  for (double v : u_n.values) {
    if (!(v >= 0.0)) throw Error(ErrorCode::invalid_argument, "step needs a nonnegative state");
  }
  SolverConfig local = config;
  local.dense_limit = std::min<std::size_t>(config.dense_limit, u_n.size());
  return Stepper(op, phi, local).step(u_n, dt);
}

Trajectory run(const DiscreteOperator& op, const NonlinearitySpec& phi, const Field& u0,
               const SolverConfig& config) {
  config.validate();
  if (u0.grid != op.grid()) throw Error(ErrorCode::grid_mismatch, "initial datum lives on a different grid");
  for (double v : u0.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::invalid_argument, "initial datum must be finite and nonnegative");
    }
  }
  std::vector<double> targets;
  for (double t : config.snapshot_times) {
    if (t > 0.0) targets.push_back(t);
  }
  if (targets.empty() || targets.back() < config.t_end) targets.push_back(config.t_end);

  Trajectory traj;
  traj.snapshots.push_back({0.0, u0, 0.0});
  const double h_n = op.grid().cell_volume();
  traj.history.push_back({0.0, integrate(u0), 0.0, max_norm(u0.values), 0.0, 0});

  auto fill_extinct = [&](double t_ext, std::size_t next_target) {
    traj.events.push_back({t_ext, EventKind::extinction});
    for (std::size_t k = next_target; k < targets.size(); ++k) {
      traj.snapshots.push_back({targets[k], Field(op.grid()), traj.leaked_mass});
    }
  };

  if (max_norm(u0.values) < config.extinction_floor) {
    fill_extinct(0.0, 0);
    return traj;
  }

  const Stepper stepper(op, phi, config);
  Field u = u0;
  double t = 0.0;
  double dt = config.dt_initial;
  std::size_t next = 0;
  const double t_eps = 1e-12 * config.t_end;
  (void)h_n;
  while (next < targets.size()) {
    double dt_eff = std::min(dt, config.dt_max);
    if (config.dt_relative_max > 0.0 && t > 0.0) dt_eff = std::min(dt_eff, config.dt_relative_max * t);
    const double remaining = (config.snapshot_mode == SnapshotMode::land ? targets[next] : config.t_end) - t;
    bool lands = false;
    if (dt_eff >= remaining - t_eps) {
      dt_eff = remaining;
      lands = true;
    }
    std::optional<StepResult> attempt;
    try {
      attempt = stepper.step(u, dt_eff);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::newton_failure) throw;
      traj.events.push_back({t, EventKind::newton_failure});
      dt = 0.5 * dt_eff;
      if (dt < config.dt_min) {
        traj.events.push_back({t, EventKind::dt_floor});
        traj.partial = true;
        break;
      }
      continue;
    }
    StepResult& res = *attempt;
    const double t_new = lands && config.snapshot_mode == SnapshotMode::land ? targets[next] : t + dt_eff;
    const double leaked_new = traj.leaked_mass + dt_eff * res.leak_flux;
    const double u_max = max_norm(res.u.values);
    const bool extinct = u_max < config.extinction_floor;
    if (extinct) std::fill(res.u.values.begin(), res.u.values.end(), 0.0);

    if (config.snapshot_mode == SnapshotMode::interpolate) {
      while (next < targets.size() && targets[next] <= t_new + t_eps) {
        const double theta = std::clamp((targets[next] - t) / dt_eff, 0.0, 1.0);
        Field f(op.grid());
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = (1.0 - theta) * u[i] + theta * res.u[i];
        traj.snapshots.push_back({targets[next], std::move(f),
                                  (1.0 - theta) * traj.leaked_mass + theta * leaked_new});
        ++next;
      }
    } else if (lands) {
      traj.snapshots.push_back({t_new, res.u, leaked_new});
      ++next;
    }
    u = std::move(res.u);
    t = t_new;
    traj.leaked_mass = leaked_new;
    traj.history.push_back({t, integrate(u), traj.leaked_mass, u_max, dt_eff, res.iterations});
    if (extinct) {
      fill_extinct(t, next);
      break;
    }
    if (!lands || dt_eff >= dt) dt = std::min(dt * config.dt_growth, config.dt_max);
  }
  return traj;
}

Trajectory run(const Grid& grid, const KernelSpec& kernel, const NonlinearitySpec& phi,
               const Field& u0, const SolverConfig& config) {
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(grid, kernel);
  return run(op, phi, u0, config);
}

}  // namespace nlfd
