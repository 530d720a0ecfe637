#include "nlfd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nlfd/barenblatt.hpp"
#include "nlfd/error.hpp"

namespace nlfd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CheckRecord make_record(const std::string& name, const std::string& tag, double tolerance) {
  CheckRecord r;
  r.name = name;
  r.tag = tag;
  r.tolerance = tolerance;
  return r;
}

/// Mass of the cells whose centre lies at distance >= radius from center.
double exterior_mass(const Field& u, const Point& center, double radius) {
  const Grid& g = u.grid;
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (distance(g.center(i), center) >= radius) sum += u[i];
  }
  return sum * g.cell_volume();
}

double lp_power(const Field& u, double p) {
  double sum = 0.0;
  for (double v : u.values) sum += std::pow(std::max(v, 0.0), p);
  return sum * u.grid.cell_volume();
}

std::vector<const Snapshot*> positive_time_snapshots(const Trajectory& tr) {
  std::vector<const Snapshot*> out;
  for (const Snapshot& s : tr.snapshots) {
    if (s.time > 0.0) out.push_back(&s);
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

const char* to_string(CheckStatus status) noexcept {
  switch (status) {
    case CheckStatus::pass:
      return "pass";
    case CheckStatus::fail:
      return "fail";
    case CheckStatus::not_applicable:
      return "not_applicable";
  }
  return "unknown";
}

double CheckRecord::value(const std::string& key) const {
  for (const auto& [k, v] : values) {
    if (k == key) return v;
  }
  throw Error(ErrorCode::invalid_argument, "check record '" + name + "' has no value '" + key + "'");
}

void CheckRecord::set(const std::string& key, double v) {
  for (auto& [k, old] : values) {
    if (k == key) {
      old = v;
      return;
    }
  }
  values.emplace_back(key, v);
}

bool DiagnosticsReport::all_passed() const noexcept {
  return std::none_of(records_.begin(), records_.end(),
                      [](const CheckRecord& r) { return r.status == CheckStatus::fail; });
}

CheckRecord check_mass_conservation(const Trajectory& trajectory, const MassOptions& options) {
  CheckRecord r = make_record("mass_conservation", "mass-conservation", options.drift_tolerance);
  if (trajectory.snapshots.empty()) {
    throw Error(ErrorCode::invalid_argument, "trajectory has no snapshots");
  }
  const double m0 = integrate(trajectory.snapshots.front().field);
  Curve curve{"mass", {"t", "mass", "leaked", "balance"}, {}};
  double drift = 0.0;
  auto account = [&](double t, double mass, double leaked) {
    curve.rows.push_back({t, mass, leaked, mass + leaked});
    const double dev = std::abs(mass + leaked - m0);
    drift = std::max(drift, m0 > 0.0 ? dev / m0 : dev);
  };
  for (const Snapshot& s : trajectory.snapshots) account(s.time, integrate(s.field), s.leaked_mass);
  for (const StepRecord& h : trajectory.history) drift = std::max(
      drift, m0 > 0.0 ? std::abs(h.mass + h.leaked_mass - m0) / m0
                      : std::abs(h.mass + h.leaked_mass - m0));
  const double leak = m0 > 0.0 ? trajectory.leaked_mass / m0 : trajectory.leaked_mass;
  r.set("initial_mass", m0);
  r.set("max_relative_drift", drift);
  r.set("leak_fraction", leak);
  r.set("leak_tolerance", options.leak_tolerance);
  r.curves.push_back(std::move(curve));
  const bool ok = !trajectory.partial && drift <= options.drift_tolerance &&
                  leak <= options.leak_tolerance;
  r.status = ok ? CheckStatus::pass : CheckStatus::fail;
  r.message = "drift " + fmt(drift) + ", leak " + fmt(leak) + (trajectory.partial ? ", partial" : "");
  return r;
}

CheckRecord check_smoothing(const Trajectory& trajectory, double m, double sigma, int N,
                            const SmoothingOptions& options) {
  CheckRecord r = make_record("smoothing", "smoothing-effect", options.tolerance);
  const double alpha = N / (N * (m - 1.0) + sigma);
  if (!(alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "smoothing exponent requires m > m_c");
  const double gamma = sigma * alpha / N;
  std::vector<double> t, norm;
  for (const Snapshot* s : positive_time_snapshots(trajectory)) {
    const double v = max_norm(s->field.view());
    if (v > 0.0) {
      t.push_back(s->time);
      norm.push_back(v);
    }
  }
  if (t.size() < 2 || std::log10(t.back() / t.front()) < options.min_decades - 1e-12) {
    throw Error(ErrorCode::invalid_argument, "insufficient decade span for the smoothing fit");
  }
  std::vector<double> ft, fn;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t.back() / 10.0 * (1.0 - 1e-12)) {
      ft.push_back(t[i]);
      fn.push_back(norm[i]);
    }
  }
  if (ft.size() < 2) throw Error(ErrorCode::invalid_argument, "final decade holds fewer than two snapshots");
  const double slope = loglog_slope(ft, fn);
  const double mass0 = integrate(trajectory.snapshots.front().field);
  Curve curve{"decay", {"t", "max_norm", "scaled_bound"}, {}};
  double bound_max = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double scaled = norm[i] * std::pow(t[i], alpha) / std::pow(mass0, gamma);
    bound_max = std::max(bound_max, scaled);
    curve.rows.push_back({t[i], norm[i], scaled});
  }
  const double err = std::abs(slope + alpha) / alpha;
  r.set("alpha", alpha);
  r.set("fitted_slope", slope);
  r.set("fitted_alpha", -slope);
  r.set("relative_error", err);
  r.set("gamma", gamma);
  r.set("scaled_bound_max", bound_max);
  r.curves.push_back(std::move(curve));
  r.status = err <= options.tolerance && std::isfinite(bound_max) ? CheckStatus::pass : CheckStatus::fail;
  r.message = "slope " + fmt(slope) + " vs " + fmt(-alpha);
  return r;
}

CheckRecord check_positivity_harnack(const Field& u, const NonlinearitySpec& phi,
                                     const HarnackOptions& o) {
  const int N = u.grid.dim();
  const double upper = N > o.sigma ? N / (N - o.sigma) : kInf;
  if (!(o.p >= 1.0 && o.p < upper)) {
    throw Error(ErrorCode::invalid_argument,
                "Harnack exponent p = " + fmt(o.p) + " outside [1, " + fmt(upper) + ")");
  }
  if (!(o.t > 0.0)) throw Error(ErrorCode::invalid_argument, "Harnack check needs t > 0");
  CheckRecord r = make_record(o.on_solution ? "harnack_solution" : "harnack", "weak-harnack", 0.0);
  const auto inner = ball_restriction(u, o.x0, 0.5 * o.R);
  const auto outer = ball_restriction(u, o.x0, o.R);
  auto w = [&](std::size_t i) { return o.on_solution ? u[i] : phi.phi(std::max(u[i], 0.0)); };
  double inf_w = kInf, inf_u = kInf;
  for (std::size_t i : inner) {
    inf_w = std::min(inf_w, w(i));
    inf_u = std::min(inf_u, u[i]);
  }
  double sum = 0.0;
  for (std::size_t i : outer) sum += std::pow(w(i), o.p);
  const double lp = std::pow(sum * u.grid.cell_volume(), 1.0 / o.p);
  const double c = lp > 0.0 ? inf_w / lp : 0.0;
  const double umax = max_norm(u.view());
  const double varpi = umax > 0.0 ? phi.phi_prime(umax) : kInf;
  const double eta = std::isfinite(varpi) ? 1.0 / (phi.A() * varpi * o.t) : 0.0;
  r.set("p", o.p);
  r.set("R", o.R);
  r.set("t", o.t);
  r.set("c_measured", c);
  r.set("inf_inner", inf_w);
  r.set("lp_outer", lp);
  r.set("varpi", varpi);
  r.set("eta", eta);
  r.status = c > 0.0 && inf_u > o.extinction_floor ? CheckStatus::pass : CheckStatus::fail;
  r.message = "c = " + fmt(c);
  return r;
}

CheckRecord check_positive_on_box(const Field& u, const Point& center, double half_width,
                                  double floor) {
  CheckRecord r = make_record("positivity_box", "infinite-propagation", floor);
  const Grid& g = u.grid;
  double lowest = kInf;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Point x = g.center(i);
    bool inside = true;
    for (int d = 0; d < g.dim(); ++d) inside = inside && std::abs(x[d] - center[d]) <= half_width;
    if (!inside) continue;
    ++cells;
    lowest = std::min(lowest, u[i]);
  }
  if (cells == 0) throw Error(ErrorCode::degenerate_ball, "positivity box contains no cells");
  r.set("half_width", half_width);
  r.set("cells", static_cast<double>(cells));
  r.set("min_value", lowest);
  r.status = lowest > floor ? CheckStatus::pass : CheckStatus::fail;
  r.message = "min " + fmt(lowest) + " over " + std::to_string(cells) + " cells";
  return r;
}

CheckRecord check_monotonicity(const Trajectory& trajectory, const NonlinearitySpec& phi,
                               double newton_tol) {
  const double tol = 1e-6 + 10.0 * newton_tol;
  CheckRecord r = make_record("monotonicity", "crandall-pierre", tol);
  const auto snaps = positive_time_snapshots(trajectory);
  if (snaps.size() < 3) throw Error(ErrorCode::invalid_argument, "monotonicity needs three snapshots at t > 0");
  const double inv_a = 1.0 / phi.A();
  Curve curve{"violation", {"t1", "t2", "max_violation"}, {}};
  double worst = 0.0;
  std::vector<double> prev(snaps[0]->field.size());
  auto fill = [&](const Snapshot& s, std::vector<double>& g) {
    const double scale = std::pow(s.time, -inv_a);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = phi.phi(std::max(s.field[i], 0.0)) * scale;
  };
  fill(*snaps[0], prev);
  std::vector<double> next(prev.size());
  for (std::size_t k = 1; k < snaps.size(); ++k) {
    fill(*snaps[k], next);
    double local = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double rise = next[i] - prev[i];
      if (rise <= 0.0) continue;
      local = std::max(local, prev[i] > 0.0 ? rise / prev[i] : kInf);
    }
    curve.rows.push_back({snaps[k - 1]->time, snaps[k]->time, local});
    worst = std::max(worst, local);
    std::swap(prev, next);
  }
  r.set("A", phi.A());
  r.set("max_violation", worst);
  r.curves.push_back(std::move(curve));
  r.status = worst <= tol ? CheckStatus::pass : CheckStatus::fail;
  r.message = "max violation " + fmt(worst);
  return r;
}

CheckRecord check_tail_control(const Trajectory& trajectory, const TailOptions& o) {
  CheckRecord r = make_record("tail_control", "tail-control", o.slope_tolerance);
  if (trajectory.snapshots.empty() || o.radii.empty()) {
    throw Error(ErrorCode::invalid_argument, "tail control needs snapshots and radii");
  }
  std::vector<double> radii = o.radii;
  std::sort(radii.begin(), radii.end());
  const Field& u0 = trajectory.snapshots.front().field;
  const double mass = integrate(u0);
  const double mass_term = std::pow(mass, o.m);
  std::vector<double> initial_tail;
  for (double R : radii) initial_tail.push_back(exterior_mass(u0, o.center, R));

  struct Entry {
    double t, R, lhs, i0, T;
  };
  std::vector<Entry> entries;
  double worst_slope = -kInf;
  Curve curve{"tail", {"t", "R", "lhs", "initial_tail", "time_term"}, {}};
  Curve slopes{"tail_slope", {"t", "slope"}, {}};
  for (const Snapshot* s : positive_time_snapshots(trajectory)) {
    if (s->time < o.t_min * (1.0 - 1e-12) || s->time > o.t_max * (1.0 + 1e-12)) continue;
    std::vector<double> lhs;
    for (std::size_t j = 0; j < radii.size(); ++j) {
      const double R = radii[j];
      Entry e{s->time, R, exterior_mass(s->field, o.center, 2.0 * R), initial_tail[j],
              s->time * std::pow(R, -o.N_over_alpha) * mass_term};
      entries.push_back(e);
      lhs.push_back(e.lhs);
      curve.rows.push_back({e.t, e.R, e.lhs, e.i0, e.T});
    }
    if (radii.size() >= 2) {
      const double slope = loglog_slope(radii, lhs);
      slopes.rows.push_back({s->time, slope});
      worst_slope = std::max(worst_slope, slope);
    }
  }
  if (entries.empty()) throw Error(ErrorCode::invalid_argument, "no snapshots inside the tail window");
  // entries are ordered by t then R, so the first one is the smallest pair
  const Entry& first = entries.front();
  const double c_fit = std::max(0.0, (first.lhs - first.i0) / first.T);
  double c_min = 0.0;
  bool uniform = true;
  for (const Entry& e : entries) {
    c_min = std::max(c_min, (e.lhs - e.i0) / e.T);
    if (e.lhs > e.i0 + c_fit * e.T + 1e-12 * mass) uniform = false;
  }
  const double target = -o.N_over_alpha * (1.0 - o.slope_tolerance);
  const bool slope_ok = radii.size() < 2 || worst_slope <= target;
  r.set("C_fitted", c_fit);
  r.set("C_min_admissible", c_min);
  r.set("uniform", uniform ? 1.0 : 0.0);
  r.set("worst_R_slope", worst_slope);
  r.set("slope_bound", target);
  r.curves.push_back(std::move(curve));
  r.curves.push_back(std::move(slopes));
  r.status = uniform && slope_ok ? CheckStatus::pass : CheckStatus::fail;
  r.message = "C fitted " + fmt(c_fit) + ", admissible " + fmt(c_min) + ", worst slope " + fmt(worst_slope);
  return r;
}

CheckRecord check_extinction(const Trajectory& trajectory, double m, double sigma, int N,
                             const ExtinctionOptions& options) {
  CheckRecord r = make_record("extinction", "finite-extinction", options.extinction_floor);
  const double mc = critical_exponent(N, sigma);
  double t_ext = trajectory.extinction_time();
  if (t_ext < 0.0) {
    for (const Snapshot& s : trajectory.snapshots) {
      if (max_norm(s.field.view()) < options.extinction_floor) {
        t_ext = s.time;
        break;
      }
    }
  }
  const bool extinct = t_ext >= 0.0;
  r.set("m_c", mc);
  r.set("extinct", extinct ? 1.0 : 0.0);
  if (extinct) r.set("T_ext", t_ext);
  if (t_ext == 0.0) {
    r.status = CheckStatus::pass;
    r.message = "extinct at t = 0";
    return r;
  }
  if (m >= mc) {
    r.status = extinct ? CheckStatus::fail : CheckStatus::pass;
    r.message = extinct ? "anomaly: extinction at m >= m_c (t = " + fmt(t_ext) + ")" : "no extinction";
    return r;
  }
  if (!extinct) {
    r.status = CheckStatus::fail;
    r.message = "no extinction detected";
    return r;
  }
  const double p = (1.0 - m) * N / sigma;
  const double s = sigma / N;
  Curve curve{"lp_decay", {"t", "J", "J_pow"}, {}};
  std::vector<double> t, js;
  for (const Snapshot& snap : trajectory.snapshots) {
    const double J = lp_power(snap.field, p);
    curve.rows.push_back({snap.time, J, std::pow(J, s)});
    if (J > 0.0 && max_norm(snap.field.view()) >= options.extinction_floor) {
      t.push_back(snap.time);
      js.push_back(std::pow(J, s));
    }
  }
  r.set("p", p);
  r.curves.push_back(std::move(curve));
  if (js.size() < 3) {
    r.status = CheckStatus::fail;
    r.message = "too few snapshots before extinction to test the decay mechanism";
    return r;
  }
  const double c_fit = (js[0] - js[1]) / (t[1] - t[0]);
  double min_ratio = kInf;
  bool linear = c_fit > 0.0;
  for (std::size_t i = 1; i + 1 < js.size(); ++i) {
    const double dt = t[i + 1] - t[i];
    min_ratio = std::min(min_ratio, (js[i] - js[i + 1]) / (c_fit * dt));
    if (js[i + 1] > js[i] - c_fit * dt + 1e-12 * js[0]) linear = false;
  }
  r.set("C_fitted", c_fit);
  r.set("min_rate_ratio", min_ratio);
  r.status = linear ? CheckStatus::pass : CheckStatus::fail;
  r.message = "T_ext = " + fmt(t_ext) + ", rate ratio to first interval " + fmt(min_ratio);
  return r;
}

CheckRecord check_asymptotics(const std::vector<AsymptoticEntry>& family, const Field& profile,
                              double M, double m, double sigma, int N,
                              const AsymptoticOptions& o) {
  similarity_exponent(N, m, sigma);
  CheckRecord r = make_record("asymptotics", "barenblatt-asymptotics", o.l1_fraction);
  if (family.empty()) throw Error(ErrorCode::invalid_argument, "empty run family");
  const auto ball = ball_restriction(profile, {0.0, 0.0}, o.analysis_radius);
  Curve curve{"errors", {"k", "e1", "einf"}, {}};
  std::vector<double> e1, einf;
  for (const AsymptoticEntry& e : family) {
    if (e.u.grid != profile.grid) throw Error(ErrorCode::grid_mismatch, "u_k and profile grids differ");
    double l1 = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) l1 += std::abs(e.u[i] - profile[i]);
    l1 *= profile.grid.cell_volume();
    double li = 0.0;
    for (std::size_t i : ball) li = std::max(li, std::abs(e.u[i] - profile[i]));
    e1.push_back(l1);
    einf.push_back(li);
    curve.rows.push_back({e.k, l1, li});
    r.set("e1(k=" + fmt(e.k) + ")", l1);
    r.set("einf(k=" + fmt(e.k) + ")", li);
  }
  auto decreasing = [&](const std::vector<double>& v) {
    for (std::size_t i = o.decreasing_from; i + 1 < v.size(); ++i) {
      if (!(v[i + 1] < v[i])) return false;
    }
    return true;
  };
  const bool d1 = decreasing(e1), dinf = decreasing(einf);
  const double final_fraction = e1.back() / M;
  r.set("e1_final_fraction", final_fraction);
  r.set("e1_decreasing", d1 ? 1.0 : 0.0);
  r.set("einf_decreasing", dinf ? 1.0 : 0.0);
  r.curves.push_back(std::move(curve));
  r.status = d1 && dinf && final_fraction <= o.l1_fraction ? CheckStatus::pass : CheckStatus::fail;
  r.message = "e1(final)/M = " + fmt(final_fraction) + (d1 ? "" : ", e1 not decreasing") +
              (dinf ? "" : ", einf not decreasing");
  return r;
}

CheckRecord check_decay_rate(const Field& u, double M, const std::vector<double>& radii,
                             double sigma, const Point& center) {
  CheckRecord r = make_record("decay_rate", "decay-rate", 0.0);
  if (max_norm(u.view()) == 0.0) {
    r.status = CheckStatus::not_applicable;
    r.message = "zero field";
    return r;
  }
  std::vector<double> rs = radii;
  std::sort(rs.begin(), rs.end());
  Curve curve{"decay", {"R", "min", "X", "Y"}, {}};
  std::vector<double> X, Y, mins;
  bool positive = true;
  for (double R : rs) {
    double lo = kInf;
    for (std::size_t i : ball_restriction(u, center, R)) lo = std::min(lo, u[i]);
    positive = positive && lo > 0.0;
    const double x = std::pow(R, 0.5 * sigma) * std::log(R);
    const double y = lo > 0.0 ? std::log(lo / M) : -kInf;
    X.push_back(x);
    Y.push_back(y);
    mins.push_back(lo);
    curve.rows.push_back({R, lo, x, y});
  }
  bool above = true;
  if (positive && rs.size() >= 3 && X[1] != X[0]) {
    const double slope = (Y[1] - Y[0]) / (X[1] - X[0]);
    r.set("bound_slope", slope);
    for (std::size_t i = 2; i < rs.size(); ++i) {
      const double line = Y[0] + slope * (X[i] - X[0]);
      if (Y[i] < line - 1e-12 * std::abs(line)) above = false;
    }
  }
  if (positive && rs.size() >= 2) r.set("power_law_exponent", -loglog_slope(rs, mins));
  r.set("min_at_largest_R", mins.back());
  r.set("above_bound", above ? 1.0 : 0.0);
  r.curves.push_back(std::move(curve));
  r.status = positive && above ? CheckStatus::pass : CheckStatus::fail;
  r.message = positive ? (above ? "positive, above bound" : "below fitted bound") : "nonpositive minimum";
  return r;
}

CheckRecord check_elliptic_supersolution(const DiscreteOperator& op, const Field& u,
                                         const NonlinearitySpec& phi, double t, double tolerance) {
  CheckRecord r = make_record("elliptic_supersolution", "elliptic-supersolution", tolerance);
  if (u.grid != op.grid()) throw Error(ErrorCode::grid_mismatch, "field and operator grids differ");
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "supersolution check needs t > 0");
  Field w(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = phi.phi(std::max(u[i], 0.0));
  const Field lw = op.apply(w);
  const double umax = max_norm(u.view());
  const double varpi = umax > 0.0 ? phi.phi_prime(umax) : kInf;
  const double eta = std::isfinite(varpi) ? 1.0 / (phi.A() * varpi * t) : 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double res = eta * w[i] + lw[i];
    const double scale = eta * w[i] + std::abs(lw[i]);
    if (scale > 0.0) worst = std::min(worst, res / scale);
  }
  r.set("eta", eta);
  r.set("varpi", varpi);
  r.set("min_normalized_residual", worst);
  r.status = worst >= -tolerance ? CheckStatus::pass : CheckStatus::fail;
  r.message = "min residual " + fmt(worst);
  return r;
}

CheckRecord check_comparison(const Trajectory& lower, const Trajectory& upper, double tolerance) {
  CheckRecord r = make_record("comparison", "comparison-principle", tolerance);
  if (lower.snapshots.size() != upper.snapshots.size() || lower.snapshots.empty()) {
    throw Error(ErrorCode::invalid_argument, "trajectories have different snapshot counts");
  }
  const double scale = std::max(max_norm(upper.snapshots.front().field.view()),
                                std::numeric_limits<double>::min());
  double worst = 0.0;
  for (std::size_t k = 0; k < lower.snapshots.size(); ++k) {
    const Snapshot& a = lower.snapshots[k];
    const Snapshot& b = upper.snapshots[k];
    if (std::abs(a.time - b.time) > 1e-12 * std::max(1.0, b.time)) {
      throw Error(ErrorCode::invalid_argument, "snapshot times differ");
    }
    for (std::size_t i = 0; i < a.field.size(); ++i) {
      worst = std::max(worst, (a.field[i] - b.field[i]) / scale);
    }
  }
  r.set("max_violation", worst);
  r.status = worst <= tolerance ? CheckStatus::pass : CheckStatus::fail;
  r.message = "max violation " + fmt(worst);
  return r;
}

}  // namespace nlfd
