#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nlfd/grid.hpp"
#include "nlfd/kernel.hpp"

namespace nlfd {

struct AssemblyOptions {
  /// Lattice-zeta correction of the nearest-neighbour weights.  Without it the
  /// singular ring contributes an O(h^{2-sigma}) consistency error.
  bool near_field_correction = true;
  /// Image shells summed directly in periodic mode (remaining images use a tail formula).
  int periodic_images = 0;  // 0 selects 64 in 1D, 6 in 2D
  /// Run validate_hj before assembling.
  bool validate_kernel = true;
  std::uint64_t validation_seed = 20240601;
};

/// (Lf)_i = sum_j w_ij (f_i - f_j) + kappa_i f_i on a grid.
///
/// Every registered family has Toeplitz structure up to a rank-one diagonal
/// modulation: w_ij = t(x_i - x_j) (1 + e s_i s_j), so application is an FFT
/// convolution in O(n^N log n).
class DiscreteOperator {
 public:
  static DiscreteOperator assemble_quadrature(const Grid& grid, const KernelSpec& kernel,
                                              const AssemblyOptions& options = {});

  const Grid& grid() const noexcept { return grid_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  double sigma() const noexcept { return kernel_.sigma(); }
  /// Pairs within this many cells (in the max norm) carry corrected weights.
  int near_field_radius() const noexcept { return 1; }
  double nearest_weight_factor() const noexcept { return nearest_factor_; }

  std::span<const double> leak() const noexcept { return leak_; }
  std::span<const double> row_sums() const noexcept { return row_sums_; }

  /// w_ij; zero on the diagonal.
  double weight(std::size_t i, std::size_t j) const;

  /// out = W f (off-diagonal weights only).
  void apply_weights(std::span<const double> f, std::span<double> out) const;
  /// out = L f.
  void apply(std::span<const double> f, std::span<double> out) const;
  Field apply(const Field& field) const;

  /// Row-major dense copy of W, for small systems only.
  std::vector<double> dense_weights() const;

  /// Per-cell diagnostics: coordinates, row sum, leak.
  void write_diagnostics_csv(const std::string& path) const;

  struct Convolver;

 private:
  DiscreteOperator(const Grid& grid, const KernelSpec& kernel) : grid_(grid), kernel_(kernel) {}

  Grid grid_;
  KernelSpec kernel_;
  double nearest_factor_ = 1.0;
  std::vector<double> table_;       // t over offsets (|di|, |dj|) or circulant offsets (periodic)
  std::vector<double> modulation_;  // s_i of the rank-one term, empty if absent
  double modulation_amplitude_ = 0.0;
  std::vector<double> leak_;
  std::vector<double> row_sums_;
  std::shared_ptr<const Convolver> convolver_;
};

/// Fourier multiplier |xi|^sigma on a periodic grid.
Field apply_spectral(const Field& field, double sigma);

/// 1/2 sum_{i,j} w_ij (f_i - f_j)(g_i - g_j) + sum_i kappa_i f_i g_i, by direct pair summation.
double energy(const DiscreteOperator& op, std::span<const double> f, std::span<const double> g);
double energy(const DiscreteOperator& op, const Field& f, const Field& g);

/// sum_i (Lf)_i g_i.
double pairing(const DiscreteOperator& op, std::span<const double> f, std::span<const double> g);

/// Smooth cutoff: 1 on [0, 1], 0 on [2, inf), C-infinity in between.
double smooth_cutoff(double s) noexcept;

struct CutoffScalingRow {
  double R;
  double norm;
};

struct CutoffScalingTable {
  double q;
  std::vector<CutoffScalingRow> rows;
  double slope;
  double expected_slope;  // -sigma + N/q
};

/// ||L phi_R||_q for phi_R = psi(|x|/R) on grids with fixed spacing and half-width
/// box_factor * R.  Finite q includes the analytic far-field contribution from outside the box.
CutoffScalingTable cutoff_scaling_check(const KernelSpec& kernel, double q,
                                        const std::vector<double>& radii, double spacing = 0.25,
                                        double box_factor = 16.0);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace nlfd
