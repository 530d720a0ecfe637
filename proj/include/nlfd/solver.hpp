#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nlfd/grid.hpp"
#include "nlfd/kernel.hpp"
#include "nlfd/nonlinearity.hpp"
#include "nlfd/operator.hpp"

namespace nlfd {

enum class SnapshotMode { land, interpolate };

struct SolverConfig {
  double dt_initial = 1e-3;
  double dt_min = 1e-12;
  double dt_max = 1.0;
  /// When positive, dt <= dt_relative_max * t (scale-invariant stepping).
  double dt_relative_max = 0.0;
  double dt_growth = 1.2;
  double t_end = 1.0;
  /// Newton stops when ||residual||_inf <= newton_tol * max(||u_n||_inf, ||u_{n+1}||_inf).
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  std::vector<double> snapshot_times;
  double extinction_floor = 1e-12;
  /// land: steps are shortened to hit every snapshot time exactly.
  SnapshotMode snapshot_mode = SnapshotMode::land;
  /// Systems up to this many cells use a dense Cholesky factorization, larger
  /// ones preconditioned conjugate gradients.
  std::size_t dense_limit = 512;
  double linear_tol = 1e-13;

  /// Throws invalid_argument on inconsistent settings.
  void validate() const;
};

enum class EventKind { extinction, newton_failure, dt_floor };
const char* to_string(EventKind kind) noexcept;

struct Event {
  double time;
  EventKind kind;
};

struct Snapshot {
  double time;
  Field field;
  double leaked_mass;
};

struct StepRecord {
  double time;
  double mass;
  double leaked_mass;
  double max_norm;
  double dt;
  int newton_iterations;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  double leaked_mass = 0.0;
  std::vector<Event> events;
  std::vector<StepRecord> history;
  bool partial = false;

  bool has_event(EventKind kind) const noexcept;
  /// Time of the first extinction event, negative when absent.
  double extinction_time() const noexcept;
};

struct StepResult {
  Field u;
  int iterations = 0;
  double residual = 0.0;
  /// sum_i kappa_i phi(u_{n+1,i}) h^N
  double leak_flux = 0.0;
};

/// Implicit Euler in the variable w = phi(u): beta(w) + dt L w = u_n.
class Stepper {
 public:
  Stepper(const DiscreteOperator& op, const NonlinearitySpec& phi, const SolverConfig& config);
  ~Stepper();
  Stepper(Stepper&&) noexcept;
  Stepper& operator=(Stepper&&) noexcept;

  /// Throws newton_failure when Newton does not converge, scheme_violation on negativity.
  StepResult step(const Field& u_n, double dt) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

StepResult step(const DiscreteOperator& op, const NonlinearitySpec& phi, const Field& u_n,
                double dt, const SolverConfig& config = {});

Trajectory run(const DiscreteOperator& op, const NonlinearitySpec& phi, const Field& u0,
               const SolverConfig& config);
Trajectory run(const Grid& grid, const KernelSpec& kernel, const NonlinearitySpec& phi,
               const Field& u0, const SolverConfig& config);

}  // namespace nlfd
