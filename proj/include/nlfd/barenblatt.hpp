#pragma once

#include <string>
#include <vector>

#include "nlfd/grid.hpp"
#include "nlfd/solver.hpp"

namespace nlfd {

struct SelfSimilarParams {
  int N = 1;
  double m = 0.75;
  double sigma = 1.0;
  double M = 1.0;
  double alpha = 0.0;
  double kappa = 1.0;
};

/// m_c = (N - sigma)_+ / N.
double critical_exponent(int N, double sigma);

/// alpha = N / (N (m - 1) + sigma); throws no_barenblatt when m <= m_c.
double similarity_exponent(int N, double m, double sigma);

/// kappa = c1 c2 / mu_{N,sigma}.  c1 defaults to mu (pure power limit kernel).
SelfSimilarParams make_self_similar_params(int N, double m, double sigma, double M,
                                           double c1 = -1.0, double c2 = 1.0);

/// Radially symmetric profile stored as a table with a power-law tail beyond the last radius.
struct RadialProfile {
  SelfSimilarParams params;
  std::vector<double> radii;
  std::vector<double> values;
  double tail_exponent = 0.0;     // v ~ tail_coefficient * r^{-tail_exponent}
  double tail_coefficient = 0.0;

  double value(double r) const;
};

struct ProfileOptions {
  double tolerance = 1e-3;  // relative L1 change between renormalized iterates
  int max_cycles = 20;
  double dt_max = 0.05;
};

struct ProfileResult {
  RadialProfile profile;
  Field field;  // fixed point on the computation grid
  int cycles = 0;
  bool converged = false;
  double last_change = 0.0;
  /// Fitted-tail mass outside the box, and grid mass plus that exterior part.
  double exterior_mass = 0.0;
  double total_mass = 0.0;
};

/// Fixed point of the rescaled flow v -> 2^alpha S(v)(2^{alpha/N} x), where S advances the
/// limit equation with diffusivity kappa from t = 1 to t = 2.  The result is not thrown on
/// non-convergence; check `converged`.
ProfileResult compute_profile(const SelfSimilarParams& params, const Grid& grid,
                              const ProfileOptions& options = {});

/// Mass of the power-law tail outside the ball of radius L (ball, not box, in 2D).
double tail_mass_beyond(const RadialProfile& profile, double L);

/// Exact mass change within the Barenblatt family: B_{lambda M}(x,1) = A B_M(Bx, 1).
Field rescale_profile_mass(const Field& v, const SelfSimilarParams& params, double lambda);

/// t^{-alpha} profile(|x| t^{-alpha/N}) on the grid.
Field reconstruct(const RadialProfile& profile, const Grid& grid, double t);

struct RescaledField {
  Field field;
  bool extrapolated = false;  // part of the window fell outside the source grid
};

/// u_k(x) = k^alpha u(k^{alpha/N} x) sampled on the analysis grid by linear interpolation.
RescaledField rescale_solution(const Field& u, double k, double alpha, const Grid& analysis_grid);

/// Linear (1D) or bilinear (2D) interpolation; zero outside the cell-centre hull.
double sample_linear(const Field& field, const Point& p);

/// CSV with a commented parameter header and columns r,value.
void write_profile_csv(const RadialProfile& profile, const std::string& path);

}  // namespace nlfd
