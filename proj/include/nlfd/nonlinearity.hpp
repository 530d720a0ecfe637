#pragma once

#include <optional>
#include <string>

namespace nlfd {

enum class NonlinearityFamily { pure_power, perturbed_power };

const char* to_string(NonlinearityFamily family) noexcept;
NonlinearityFamily nonlinearity_family_from_string(const std::string& name);

/// phi(s) = s^m                              (pure_power)
/// phi(s) = s^m (1 + eps s / (lambda + s))   (perturbed_power)
///
/// lambda is the scale produced by rescale_phi (1 for a fresh spec).  An optional cap
/// replaces phi above u_max by its tangent line at u_max.
class NonlinearitySpec {
 public:
  static NonlinearitySpec pure_power(double m, std::optional<double> A = std::nullopt);
  static NonlinearitySpec perturbed_power(double m, double epsilon,
                                          std::optional<double> A = std::nullopt);

  NonlinearityFamily family() const noexcept { return family_; }
  double m() const noexcept { return m_; }
  double epsilon() const noexcept { return epsilon_; }
  double A() const noexcept { return A_; }
  double scale() const noexcept { return scale_; }
  std::optional<double> cap() const noexcept { return cap_; }

  /// Envelope c s^{m-1} <= phi'(s) <= C s^{m-1}.
  double envelope_lower() const noexcept;
  double envelope_upper() const noexcept;
  /// c_2 = lim_{s -> 0} phi(s) / s^m.
  double c2() const noexcept { return 1.0; }

  bool is_pure_power() const noexcept { return family_ == NonlinearityFamily::pure_power; }

  double phi(double s) const;
  double phi_prime(double s) const;
  double beta(double w) const;
  double beta_prime(double w) const;

  // Unchecked variants for hot loops; arguments must be nonnegative.
  double phi_unchecked(double s) const noexcept;
  double phi_prime_unchecked(double s) const noexcept;
  double beta_unchecked(double w) const noexcept;

  NonlinearitySpec with_scale(double scale) const;
  NonlinearitySpec with_cap(double u_max) const;
  NonlinearitySpec with_A(double A) const;

 private:
  NonlinearitySpec(NonlinearityFamily family, double m, double epsilon);
  double raw_phi(double s) const noexcept;
  double raw_phi_prime(double s) const noexcept;
  double raw_beta(double w) const noexcept;

  NonlinearityFamily family_;
  double m_;
  double epsilon_;
  double A_ = 1.0;
  double scale_ = 1.0;
  std::optional<double> cap_;
};

struct HphiReport {
  bool increasing_ok = true;
  bool concavity_ok = true;
  bool envelope_ok = true;
  double A = 0.0;
  double envelope_min = 0.0;  // min of s^{1-m} phi'(s) over the samples
  double envelope_max = 0.0;
};

/// Scan on a log-spaced grid of s in [1e-8, 1e8].
HphiReport validate_hphi(const NonlinearitySpec& spec, std::size_t sample_budget = 2000);

/// Largest A (to relative 1e-6) for which phi^{1+A} passes the concavity scan.
double max_concavity_parameter(const NonlinearitySpec& spec, std::size_t sample_budget = 2000);

/// phi_k(s) = k^{m alpha} phi(s / k^alpha); requires k >= 1.
NonlinearitySpec rescale_phi(const NonlinearitySpec& spec, double k, double alpha);

/// Agrees with phi on [0, u_max]; C^1 linear continuation above.
NonlinearitySpec modify_for_boundedness(const NonlinearitySpec& spec, double u_max);

}  // namespace nlfd
