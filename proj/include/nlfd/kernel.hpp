#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "nlfd/grid.hpp"

namespace nlfd {

enum class KernelFamily { fractional_power, convolution_modulated, midpoint_general };

/// Modulation profile g(r) of the convolution_modulated family.
/// cosine: g(r) = cos r (no far-field limit); cosine_decay: g(r) = cos(r) / (1 + r^2).
enum class Modulation { cosine, cosine_decay };

const char* to_string(KernelFamily family) noexcept;
const char* to_string(Modulation modulation) noexcept;
KernelFamily kernel_family_from_string(const std::string& name);
Modulation modulation_from_string(const std::string& name);

/// mu_{N,sigma}: the constant making mu |z|^{-(N+sigma)} the kernel of (-Delta)^{sigma/2}.
double fractional_normalization(int dim, double sigma);

/// Stable-like kernel J(x, y) = mu |x - y|^{-(N+sigma)} a(x, y) with a bounded amplitude.
///
/// Families:
///   fractional_power       a = 1
///   convolution_modulated  a = 1 + eps g(s |x - y|)
///   midpoint_general       a = 1 + eps sin(s x_1) sin(s y_1)   (sigma < 1 only)
///
/// s is the spatial scale factor produced by rescale(); it is 1 for a fresh kernel.
/// Envelope constants are relative to mu: Lambda^{-1} <= a <= Lambda.
class KernelSpec {
 public:
  static KernelSpec fractional_power(int dim, double sigma);
  static KernelSpec convolution_modulated(int dim, double sigma, double epsilon,
                                          Modulation modulation = Modulation::cosine_decay);
  static KernelSpec midpoint_general(int dim, double sigma, double epsilon);

  KernelFamily family() const noexcept { return family_; }
  int dim() const noexcept { return dim_; }
  double sigma() const noexcept { return sigma_; }
  double epsilon() const noexcept { return epsilon_; }
  Modulation modulation() const noexcept { return modulation_; }
  double scale() const noexcept { return scale_; }
  double normalization() const noexcept { return mu_; }

  /// Ellipticity constant, derived from the family parameters.
  double lambda() const noexcept;

  /// c_1 = lim |x-y|^{N+sigma} J(x, y) when the family has a far-field limit.
  std::optional<double> far_field_constant() const noexcept;

  bool is_convolution() const noexcept { return family_ != KernelFamily::midpoint_general; }
  bool guarantees_z_evenness() const noexcept { return is_convolution(); }

  /// J(x, y); throws singular_point when x == y.
  double eval(const Point& x, const Point& y) const;

  /// a(x, y) = J(x, y) |x - y|^{N+sigma} / mu, defined for x != y.
  double amplitude(const Point& x, const Point& y) const noexcept;

  /// Convolution families only: J as a function of the offset z = y - x.
  double eval_offset(const Point& z) const;

  KernelSpec with_scale(double scale) const;

 private:
  KernelSpec(KernelFamily family, int dim, double sigma, double epsilon, Modulation modulation);

  KernelFamily family_;
  int dim_;
  double sigma_;
  double epsilon_;
  Modulation modulation_;
  double scale_ = 1.0;
  double mu_;
};

struct HjReport {
  bool swap_symmetry_ok = true;
  bool z_evenness_ok = true;
  bool envelope_ok = true;
  /// max over samples of max(a, 1/a), a = J |x-y|^{N+sigma} / mu.
  double worst_ratio = 1.0;
  double max_amplitude = 1.0;
  double min_amplitude = 1.0;
  std::size_t samples = 0;
};

/// Sampling-based check of the three kernel hypotheses with a fixed seed.
HjReport validate_hj(const KernelSpec& kernel, std::size_t sample_budget = 1000,
                     std::uint64_t seed = 20240601);

/// J_k(x, y) = k^{alpha (N+sigma)/N} J(k^{alpha/N} x, k^{alpha/N} y); requires k >= 1.
KernelSpec rescale(const KernelSpec& kernel, double k, double alpha);

}  // namespace nlfd
