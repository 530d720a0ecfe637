#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nlfd/grid.hpp"
#include "nlfd/nonlinearity.hpp"
#include "nlfd/operator.hpp"
#include "nlfd/solver.hpp"

namespace nlfd {

enum class CheckStatus { pass, fail, not_applicable };
const char* to_string(CheckStatus status) noexcept;

/// Tabular artifact attached to a record, exported as CSV.
struct Curve {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct CheckRecord {
  std::string name;
  std::string tag;  // property being checked, e.g. "mass-conservation"
  CheckStatus status = CheckStatus::fail;
  double tolerance = 0.0;
  std::vector<std::pair<std::string, double>> values;
  std::vector<Curve> curves;
  std::string message;

  bool passed() const noexcept { return status == CheckStatus::pass; }
  /// Throws invalid_argument for an unknown key.
  double value(const std::string& key) const;
  void set(const std::string& key, double v);
};

/// Append-only collection of check records plus run metadata.
class DiagnosticsReport {
 public:
  void add(CheckRecord record) { records_.push_back(std::move(record)); }
  void set_metadata(const std::string& key, const std::string& value) { metadata_[key] = value; }

  const std::vector<CheckRecord>& records() const noexcept { return records_; }
  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }
  /// True when no record failed (not_applicable counts as passing).
  bool all_passed() const noexcept;

 private:
  std::vector<CheckRecord> records_;
  std::map<std::string, std::string> metadata_;
};

struct MassOptions {
  double drift_tolerance = 1e-3;
  double leak_tolerance = 1e-2;
};

CheckRecord check_mass_conservation(const Trajectory& trajectory, const MassOptions& options = {});

struct SmoothingOptions {
  double tolerance = 0.05;  // relative to alpha
  double min_decades = 2.0;
};

/// Slope of log ||u||_inf against log t over the final decade of positive snapshot times.
/// Throws invalid_argument when the snapshots span fewer than min_decades.
CheckRecord check_smoothing(const Trajectory& trajectory, double m, double sigma, int N,
                            const SmoothingOptions& options = {});

struct HarnackOptions {
  double p = 1.0;
  double R = 1.0;
  Point x0{0.0, 0.0};
  double t = 1.0;
  double sigma = 1.0;
  double extinction_floor = 1e-12;
  /// Apply the ratio to u itself rather than phi(u).
  bool on_solution = false;
};

/// c = min_{B_{R/2}} w / (int_{B_R} w^p)^{1/p} with w = phi(u) (or u).  Also records
/// eta = 1/(A varpi t) and varpi = phi'(||u||_inf).  Throws invalid_argument for p outside
/// [1, N/(N - sigma)_+).
CheckRecord check_positivity_harnack(const Field& u, const NonlinearitySpec& phi,
                                     const HarnackOptions& options);

/// u > floor at every cell of the box |x - center|_inf <= half_width.
CheckRecord check_positive_on_box(const Field& u, const Point& center, double half_width,
                                  double floor);

/// Largest relative increase of phi(u(t)) t^{-1/A} between consecutive positive snapshot times.
CheckRecord check_monotonicity(const Trajectory& trajectory, const NonlinearitySpec& phi,
                               double newton_tol);

struct TailOptions {
  std::vector<double> radii;
  double t_min = 0.0;
  double t_max = 1e300;
  double N_over_alpha = 1.0;
  double m = 0.75;
  double slope_tolerance = 0.1;  // relative to N/alpha
  Point center{0.0, 0.0};
};

/// Single-constant tail inequality across the (t, R) window plus the R-slope of the tail mass.
CheckRecord check_tail_control(const Trajectory& trajectory, const TailOptions& options);

struct ExtinctionOptions {
  double extinction_floor = 1e-12;
};

/// Extinction time and, below m_c, the linear decay of J^{sigma/N}, J = ||u||_p^p with
/// p = (1 - m) N / sigma, using a rate fitted on the first interval.
CheckRecord check_extinction(const Trajectory& trajectory, double m, double sigma, int N,
                             const ExtinctionOptions& options = {});

struct AsymptoticEntry {
  double k;
  Field u;  // u_k(., 1) on the analysis grid
};

struct AsymptoticOptions {
  double analysis_radius = 2.0;
  double l1_fraction = 0.05;
  /// Sequences must decrease from this ladder index on.
  std::size_t decreasing_from = 0;
};

CheckRecord check_asymptotics(const std::vector<AsymptoticEntry>& family, const Field& profile,
                              double M, double m, double sigma, int N,
                              const AsymptoticOptions& options = {});

/// min_{B_R} u > 0 for every radius and the curve log(min/M) against R^{sigma/2} log R lies
/// above the line through its first two points.  Zero fields are not applicable.
CheckRecord check_decay_rate(const Field& u, double M, const std::vector<double>& radii,
                             double sigma, const Point& center = {0.0, 0.0});

/// Componentwise eta w + L w >= -tol (eta w + |L w|) with w = phi(u(t)).
CheckRecord check_elliptic_supersolution(const DiscreteOperator& op, const Field& u,
                                         const NonlinearitySpec& phi, double t,
                                         double tolerance = 1e-6);

/// max_t max_i [u_i - v_i]_+ / ||v(0)||_inf over shared snapshot times.
CheckRecord check_comparison(const Trajectory& lower, const Trajectory& upper,
                             double tolerance = 1e-10);

}  // namespace nlfd
