#include "nlfd/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nlfd/error.hpp"

namespace nlfd {

const char* to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::fractional_power: return "fractional_power";
    case KernelFamily::convolution_modulated: return "convolution_modulated";
    case KernelFamily::midpoint_general: return "midpoint_general";
  }
  return "unknown";
}

const char* to_string(Modulation modulation) noexcept {
  return modulation == Modulation::cosine ? "cos" : "cos_decay";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "fractional_power") return KernelFamily::fractional_power;
  if (name == "convolution_modulated") return KernelFamily::convolution_modulated;
  if (name == "midpoint_general") return KernelFamily::midpoint_general;
  throw Error(ErrorCode::invalid_argument, "unknown kernel family '" + name + "'");
}

Modulation modulation_from_string(const std::string& name) {
  if (name == "cos") return Modulation::cosine;
  if (name == "cos_decay") return Modulation::cosine_decay;
  throw Error(ErrorCode::invalid_argument, "unknown modulation '" + name + "'");
}

double fractional_normalization(int dim, double sigma) {
  return std::pow(2.0, sigma - 1.0) * sigma * std::tgamma(0.5 * (dim + sigma)) /
         (std::pow(std::numbers::pi, 0.5 * dim) * std::tgamma(1.0 - 0.5 * sigma));
}

KernelSpec::KernelSpec(KernelFamily family, int dim, double sigma, double epsilon,
                       Modulation modulation)
    : family_(family), dim_(dim), sigma_(sigma), epsilon_(epsilon), modulation_(modulation) {
  if (dim != 1 && dim != 2) throw Error(ErrorCode::invalid_argument, "kernel dimension must be 1 or 2");
  if (!(sigma > 0.0 && sigma < 2.0)) {
    throw Error(ErrorCode::invalid_argument, "sigma must lie in the open interval (0, 2)");
  }
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "modulation amplitude must lie in [0, 1)");
  }
  if (family == KernelFamily::midpoint_general && sigma >= 1.0) {
    throw Error(ErrorCode::invalid_argument,
                "midpoint_general lacks z-evenness and is only admissible for sigma < 1");
  }
  mu_ = fractional_normalization(dim, sigma);
}

KernelSpec KernelSpec::fractional_power(int dim, double sigma) {
  return KernelSpec(KernelFamily::fractional_power, dim, sigma, 0.0, Modulation::cosine);
}

KernelSpec KernelSpec::convolution_modulated(int dim, double sigma, double epsilon,
                                             Modulation modulation) {
  return KernelSpec(KernelFamily::convolution_modulated, dim, sigma, epsilon, modulation);
}

KernelSpec KernelSpec::midpoint_general(int dim, double sigma, double epsilon) {
  return KernelSpec(KernelFamily::midpoint_general, dim, sigma, epsilon, Modulation::cosine);
}

double KernelSpec::lambda() const noexcept {
  return family_ == KernelFamily::fractional_power ? 1.0 : 1.0 / (1.0 - epsilon_);
}

std::optional<double> KernelSpec::far_field_constant() const noexcept {
  switch (family_) {
    case KernelFamily::fractional_power: return mu_;
    case KernelFamily::convolution_modulated:
      if (modulation_ == Modulation::cosine_decay || epsilon_ == 0.0) return mu_;
      return std::nullopt;
    case KernelFamily::midpoint_general:
      if (epsilon_ == 0.0) return mu_;
      return std::nullopt;
  }
  return std::nullopt;
}

double KernelSpec::amplitude(const Point& x, const Point& y) const noexcept {
  switch (family_) {
    case KernelFamily::fractional_power: return 1.0;
    case KernelFamily::convolution_modulated: {
      const double r = scale_ * distance(x, y);
      const double g = modulation_ == Modulation::cosine ? std::cos(r) : std::cos(r) / (1.0 + r * r);
      return 1.0 + epsilon_ * g;
    }
    case KernelFamily::midpoint_general:
      return 1.0 + epsilon_ * std::sin(scale_ * x[0]) * std::sin(scale_ * y[0]);
  }
  return 1.0;
}

double KernelSpec::eval(const Point& x, const Point& y) const {
  const double r = distance(x, y);
  if (r == 0.0) throw Error(ErrorCode::singular_point, "kernel evaluated at coincident points");
  return mu_ * std::pow(r, -(dim_ + sigma_)) * amplitude(x, y);
}

double KernelSpec::eval_offset(const Point& z) const {
  if (!is_convolution()) {
    throw Error(ErrorCode::invalid_argument, "eval_offset needs a convolution kernel");
  }
  return eval({0.0, 0.0}, z);
}

KernelSpec KernelSpec::with_scale(double scale) const {
  KernelSpec out = *this;
  out.scale_ = scale;
  return out;
}

HjReport validate_hj(const KernelSpec& kernel, std::size_t sample_budget, std::uint64_t seed) {
  constexpr double kRelTol = 1e-12;
  HjReport report;
  report.max_amplitude = 0.0;
  report.min_amplitude = std::numeric_limits<double>::infinity();
  report.worst_ratio = 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-20.0, 20.0);
  std::uniform_real_distribution<double> log_offset(-4.0, 2.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const int N = kernel.dim();
  const double exponent = N + kernel.sigma();
  const double mu = kernel.normalization();
  const double lambda = kernel.lambda();
  for (std::size_t s = 0; s < sample_budget; ++s) {
    Point x{coord(rng), N == 2 ? coord(rng) : 0.0};
    const double r = std::pow(10.0, log_offset(rng));
    Point dir{1.0, 0.0};
    if (N == 2) {
      const double th = angle(rng);
      dir = {std::cos(th), std::sin(th)};
    } else if (rng() & 1U) {
      dir = {-1.0, 0.0};
    }
    const Point y{x[0] + r * dir[0], x[1] + r * dir[1]};
    const Point y_reflected{x[0] - r * dir[0], x[1] - r * dir[1]};
    const double jxy = kernel.eval(x, y);
    const double jyx = kernel.eval(y, x);
    const double jref = kernel.eval(x, y_reflected);
    if (std::abs(jxy - jyx) > kRelTol * std::abs(jxy)) report.swap_symmetry_ok = false;
    // Forming x +- z loses about eps |x| / r of the offset, amplified by the power N + sigma.
    const double rounding = 4.0 * std::numeric_limits<double>::epsilon() * (exponent + 1.0) *
                            (std::hypot(x[0], x[1]) + r) / r;
    if (std::abs(jxy - jref) > (kRelTol + rounding) * std::abs(jxy)) report.z_evenness_ok = false;
    const double a = jxy * std::pow(distance(x, y), exponent) / mu;
    report.max_amplitude = std::max(report.max_amplitude, a);
    report.min_amplitude = std::min(report.min_amplitude, a);
    report.worst_ratio = std::max(report.worst_ratio, std::max(a, 1.0 / a));
    if (a > lambda * (1.0 + kRelTol) || a < (1.0 - kRelTol) / lambda) report.envelope_ok = false;
  }
  report.samples = sample_budget;
  return report;
}

KernelSpec rescale(const KernelSpec& kernel, double k, double alpha) {
  if (!(k >= 1.0)) throw Error(ErrorCode::invalid_argument, "kernel rescaling needs k >= 1");
  return kernel.with_scale(kernel.scale() * std::pow(k, alpha / kernel.dim()));
}

}  // namespace nlfd
