#include "nlfd/barenblatt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "nlfd/error.hpp"
#include "nlfd/kernel.hpp"

namespace nlfd {

double critical_exponent(int N, double sigma) { return std::max(N - sigma, 0.0) / N; }

double similarity_exponent(int N, double m, double sigma) {
  const double mc = critical_exponent(N, sigma);
  if (!(m > mc)) {
    throw Error(ErrorCode::no_barenblatt,
                "no self-similar profile exists for m <= m_c = (N - sigma)_+ / N (m = " +
                    std::to_string(m) + ", m_c = " + std::to_string(mc) + ")");
  }
  return N / (N * (m - 1.0) + sigma);
}

SelfSimilarParams make_self_similar_params(int N, double m, double sigma, double M, double c1,
                                           double c2) {
  if (!(M > 0.0)) throw Error(ErrorCode::invalid_argument, "mass must be positive");
  SelfSimilarParams p;
  p.N = N;
  p.m = m;
  p.sigma = sigma;
  p.M = M;
  p.alpha = similarity_exponent(N, m, sigma);
  const double mu = fractional_normalization(N, sigma);
  p.kappa = (c1 > 0.0 ? c1 : mu) * c2 / mu;
  return p;
}

double RadialProfile::value(double r) const {
  if (radii.empty()) return 0.0;
  if (r <= radii.front()) return values.front();
  if (r >= radii.back()) return tail_coefficient * std::pow(r, -tail_exponent);
  const auto it = std::upper_bound(radii.begin(), radii.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - radii.begin());
  const double t = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
  return (1.0 - t) * values[k - 1] + t * values[k];
}

double sample_linear(const Field& field, const Point& p) {
  const Grid& g = field.grid;
  const double L = g.half_width();
  const double h = g.spacing();
  const int n = g.points_per_axis();
  auto locate = [&](double x, int& i0, double& t) {
    if (std::abs(x) > L) return false;
    const double s = std::clamp((x + L) / h - 0.5, 0.0, static_cast<double>(n - 1));
    i0 = std::min(static_cast<int>(std::floor(s)), n - 2);
    t = s - i0;
    return true;
  };
  int i0 = 0, j0 = 0;
  double ti = 0.0, tj = 0.0;
  if (!locate(p[0], i0, ti)) return 0.0;
  const auto& v = field.values;
  if (g.dim() == 1) return (1.0 - ti) * v[i0] + ti * v[i0 + 1];
  if (!locate(p[1], j0, tj)) return 0.0;
  const std::size_t un = static_cast<std::size_t>(n);
  auto at = [&](int i, int j) { return v[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(j)]; };
  return (1.0 - ti) * ((1.0 - tj) * at(i0, j0) + tj * at(i0, j0 + 1)) +
         ti * ((1.0 - tj) * at(i0 + 1, j0) + tj * at(i0 + 1, j0 + 1));
}

namespace {

// Radial table of a field out to r_max, with a power-law tail fitted on [r_max / 2, r_max].
RadialProfile radial_table(const Field& v, const SelfSimilarParams& params, double r_max) {
  const Grid& g = v.grid;
  const double h = g.spacing();
  RadialProfile prof;
  prof.params = params;
  if (g.dim() == 1) {
    const int n = g.points_per_axis();
    for (int i = n / 2; i < n; ++i) {
      const double r = g.coordinate(i);
      if (r > r_max) break;
      prof.radii.push_back(r);
      prof.values.push_back(0.5 * (v[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(n - 1 - i)]));
    }
  } else {
    const std::size_t bins = static_cast<std::size_t>(r_max / h) + 1;
    std::vector<double> sum(bins, 0.0), rsum(bins, 0.0);
    std::vector<int> count(bins, 0);
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double r = distance(g.center(c), {0.0, 0.0});
      const std::size_t b = static_cast<std::size_t>(r / h);
      if (b >= bins || r > r_max) continue;
      sum[b] += v[c];
      rsum[b] += r;
      ++count[b];
    }
    for (std::size_t b = 0; b < bins; ++b) {
      if (count[b] == 0) continue;
      prof.radii.push_back(rsum[b] / count[b]);
      prof.values.push_back(sum[b] / count[b]);
    }
  }
  std::vector<double> rs, vs;
  for (std::size_t k = 0; k < prof.radii.size(); ++k) {
    if (prof.radii[k] >= 0.5 * r_max && prof.values[k] > 0.0) {
      rs.push_back(prof.radii[k]);
      vs.push_back(prof.values[k]);
    }
  }
  prof.tail_exponent = rs.size() >= 2 ? std::max(-loglog_slope(rs, vs), 0.0) : 0.0;
  const double r_last = prof.radii.empty() ? 1.0 : prof.radii.back();
  const double v_last = prof.values.empty() ? 0.0 : prof.values.back();
  prof.tail_coefficient = v_last * std::pow(r_last, prof.tail_exponent);
  return prof;
}

/// Mass of c r^{-q} outside the ball of radius L; zero when the tail is not integrable.
double power_tail_mass(double q, double c, int N, double L) {
  if (!(q > N + 0.05)) return 0.0;
  const double surface = N == 1 ? 2.0 : 2.0 * 3.14159265358979323846;
  return surface * c * std::pow(L, N - q) / (q - N);
}

}  // namespace

double tail_mass_beyond(const RadialProfile& profile, double L) {
  return power_tail_mass(profile.tail_exponent, profile.tail_coefficient, profile.params.N, L);
}

Field rescale_profile_mass(const Field& v, const SelfSimilarParams& params, double lambda) {
  const double A = std::pow(lambda, params.sigma * params.alpha / params.N);
  const double B = std::pow(A, (1.0 - params.m) / params.sigma);
  Field out(v.grid);
  for (std::size_t c = 0; c < v.size(); ++c) {
    const Point x = v.grid.center(c);
    out[c] = A * sample_linear(v, {B * x[0], B * x[1]});
  }
  return out;
}

ProfileResult compute_profile(const SelfSimilarParams& params, const Grid& grid,
                              const ProfileOptions& options) {
  if (grid.boundary_mode() != BoundaryMode::exterior_zero) {
    throw Error(ErrorCode::invalid_argument, "profile computation needs an exterior_zero grid");
  }
  if (grid.dim() != params.N) throw Error(ErrorCode::grid_mismatch, "grid dimension differs from N");
  similarity_exponent(params.N, params.m, params.sigma);

  const KernelSpec kernel = KernelSpec::fractional_power(params.N, params.sigma);
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(grid, kernel);
  const NonlinearitySpec phi = NonlinearitySpec::pure_power(params.m);
  const double h = grid.spacing();
  const double L = grid.half_width();
  const double r_max = 0.5 * L;

  // One cycle of the kappa-equation over [1, 2] is the unit-diffusivity flow over a duration kappa.
  SolverConfig cfg;
  cfg.t_end = params.kappa;
  cfg.dt_initial = 1e-4 * params.kappa;
  cfg.dt_min = 1e-14 * params.kappa;
  cfg.dt_max = options.dt_max * params.kappa;
  cfg.extinction_floor = 0.0;
  cfg.dense_limit = 256;

  Field v(grid);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (distance(grid.center(c), {0.0, 0.0}) < 4.0 * h) v[c] = 1.0;
  }
  {
    const double mass = integrate(v);
    for (double& x : v.values) x *= params.M / mass;
  }

  ProfileResult result{RadialProfile{}, v, 0, false, 0.0};
  const double grow = std::pow(2.0, params.alpha);
  const double stretch = std::pow(2.0, params.alpha / params.N);
  for (int cycle = 1; cycle <= options.max_cycles; ++cycle) {
    const Trajectory traj = run(op, phi, v, cfg);
    if (traj.partial) throw Error(ErrorCode::newton_failure, "profile flow stopped early");
    const Field& v2 = traj.snapshots.back().field;
    const RadialProfile table = radial_table(v2, params, r_max);
    Field next(grid);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      next[c] = grow * table.value(stretch * distance(grid.center(c), {0.0, 0.0}));
    }
    // Mass beyond the box, from the fitted tail, counts toward M.
    const double q = table.tail_exponent;
    const double outside =
        grow * std::pow(stretch, -q) * power_tail_mass(q, table.tail_coefficient, params.N, L);
    const double target = std::max(params.M - outside, 0.5 * params.M);
    next = rescale_profile_mass(next, params, target / integrate(next));
    double change = 0.0;
    for (std::size_t c = 0; c < grid.size(); ++c) change += std::abs(next[c] - v[c]);
    change *= grid.cell_volume() / params.M;
    v = std::move(next);
    result.cycles = cycle;
    result.last_change = change;
    if (change < options.tolerance) {
      result.converged = true;
      break;
    }
  }
  result.field = v;
  result.profile = radial_table(v, params, r_max);
  result.exterior_mass = tail_mass_beyond(result.profile, L);
  result.total_mass = integrate(v) + result.exterior_mass;
  return result;
}

Field reconstruct(const RadialProfile& profile, const Grid& grid, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_argument, "reconstruction needs t > 0");
  const auto& p = profile.params;
  const double amp = std::pow(t, -p.alpha);
  const double shrink = std::pow(t, -p.alpha / p.N);
  Field out(grid);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    out[c] = amp * profile.value(shrink * distance(grid.center(c), {0.0, 0.0}));
  }
  return out;
}

RescaledField rescale_solution(const Field& u, double k, double alpha, const Grid& analysis_grid) {
  if (!(k >= 1.0)) throw Error(ErrorCode::invalid_argument, "solution rescaling needs k >= 1");
  if (analysis_grid.dim() != u.grid.dim()) throw Error(ErrorCode::grid_mismatch, "dimension mismatch");
  const int N = u.grid.dim();
  const double amp = std::pow(k, alpha);
  const double stretch = std::pow(k, alpha / N);
  RescaledField out{Field(analysis_grid), false};
  const double L = u.grid.half_width();
  for (std::size_t c = 0; c < analysis_grid.size(); ++c) {
    const Point x = analysis_grid.center(c);
    const Point y{stretch * x[0], stretch * x[1]};
    if (std::abs(y[0]) > L || std::abs(y[1]) > L) out.extrapolated = true;
    out.field[c] = amp * sample_linear(u, y);
  }
  return out;
}

void write_profile_csv(const RadialProfile& profile, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot open " + path);
  const auto& p = profile.params;
  out << std::setprecision(17);
  out << "# N=" << p.N << " m=" << p.m << " sigma=" << p.sigma << " M=" << p.M
      << " alpha=" << p.alpha << " kappa=" << p.kappa << " tail_exponent=" << profile.tail_exponent
      << '\n';
  out << "r,value\n";
  for (std::size_t k = 0; k < profile.radii.size(); ++k) {
    out << profile.radii[k] << ',' << profile.values[k] << '\n';
  }
}

}  // namespace nlfd
