#include "nlfd/nonlinearity.hpp"

#include <cmath>
#include <limits>

#include "nlfd/error.hpp"

namespace nlfd {

const char* to_string(NonlinearityFamily family) noexcept {
  return family == NonlinearityFamily::pure_power ? "pure_power" : "perturbed_power";
}

NonlinearityFamily nonlinearity_family_from_string(const std::string& name) {
  if (name == "pure_power") return NonlinearityFamily::pure_power;
  if (name == "perturbed_power") return NonlinearityFamily::perturbed_power;
  throw Error(ErrorCode::invalid_argument, "unknown nonlinearity family '" + name + "'");
}

NonlinearitySpec::NonlinearitySpec(NonlinearityFamily family, double m, double epsilon)
    : family_(family), m_(m), epsilon_(epsilon) {
  if (!(m > 0.0 && m < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "exponent m must lie in (0, 1) for fast diffusion");
  }
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::invalid_argument, "perturbation amplitude must be nonnegative");
  }
}

NonlinearitySpec NonlinearitySpec::pure_power(double m, std::optional<double> A) {
  NonlinearitySpec spec(NonlinearityFamily::pure_power, m, 0.0);
  spec.A_ = A.value_or((1.0 - m) / m);
  if (!(spec.A_ > 0.0)) throw Error(ErrorCode::invalid_argument, "A must be positive");
  return spec;
}

NonlinearitySpec NonlinearitySpec::perturbed_power(double m, double epsilon,
                                                   std::optional<double> A) {
  NonlinearitySpec spec(NonlinearityFamily::perturbed_power, m, epsilon);
  spec.A_ = A ? *A : max_concavity_parameter(spec);
  if (!(spec.A_ > 0.0)) throw Error(ErrorCode::invalid_argument, "A must be positive");
  return spec;
}

double NonlinearitySpec::envelope_lower() const noexcept { return m_; }

double NonlinearitySpec::envelope_upper() const noexcept {
  return family_ == NonlinearityFamily::pure_power ? m_ : m_ * (1.0 + epsilon_) + 0.25 * epsilon_;
}

double NonlinearitySpec::raw_phi(double s) const noexcept {
  const double p = std::pow(s, m_);
  if (family_ == NonlinearityFamily::pure_power) return p;
  return p * (1.0 + epsilon_ * s / (scale_ + s));
}

double NonlinearitySpec::raw_phi_prime(double s) const noexcept {
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  const double p = std::pow(s, m_ - 1.0);
  if (family_ == NonlinearityFamily::pure_power) return m_ * p;
  const double d = scale_ + s;
  return p * (m_ * (1.0 + epsilon_ * s / d) + epsilon_ * s * scale_ / (d * d));
}

double NonlinearitySpec::raw_beta(double w) const noexcept {
  if (w <= 0.0) return 0.0;
  const double root = std::pow(w, 1.0 / m_);
  if (family_ == NonlinearityFamily::pure_power || epsilon_ == 0.0) return root;
  // s^m <= phi(s) <= (1 + eps) s^m brackets the root.
  double lo = std::pow(w / (1.0 + epsilon_), 1.0 / m_);
  double hi = root;
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = raw_phi(s) - w;
    if (f == 0.0) return s;
    if (f > 0.0) hi = s; else lo = s;
    double next = s - f / raw_phi_prime(s);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-15 * s || hi - lo <= 1e-15 * hi) return next;
    s = next;
  }
  return s;
}

double NonlinearitySpec::phi_unchecked(double s) const noexcept {
  if (cap_ && s > *cap_) return raw_phi(*cap_) + raw_phi_prime(*cap_) * (s - *cap_);
  return raw_phi(s);
}

double NonlinearitySpec::phi_prime_unchecked(double s) const noexcept {
  if (cap_ && s > *cap_) return raw_phi_prime(*cap_);
  return raw_phi_prime(s);
}

double NonlinearitySpec::beta_unchecked(double w) const noexcept {
  if (cap_) {
    const double wc = raw_phi(*cap_);
    if (w > wc) return *cap_ + (w - wc) / raw_phi_prime(*cap_);
  }
  return raw_beta(w);
}

namespace {
void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " needs a nonnegative argument");
  }
}
}  // namespace

double NonlinearitySpec::phi(double s) const {
  require_nonnegative(s, "phi");
  return phi_unchecked(s);
}

double NonlinearitySpec::phi_prime(double s) const {
  require_nonnegative(s, "phi_prime");
  return phi_prime_unchecked(s);
}

double NonlinearitySpec::beta(double w) const {
  require_nonnegative(w, "beta");
  return beta_unchecked(w);
}

double NonlinearitySpec::beta_prime(double w) const {
  require_nonnegative(w, "beta_prime");
  return 1.0 / phi_prime_unchecked(beta_unchecked(w));
}

NonlinearitySpec NonlinearitySpec::with_scale(double scale) const {
  NonlinearitySpec out = *this;
  out.scale_ = scale;
  return out;
}

NonlinearitySpec NonlinearitySpec::with_cap(double u_max) const {
  NonlinearitySpec out = *this;
  out.cap_ = u_max;
  return out;
}

NonlinearitySpec NonlinearitySpec::with_A(double A) const {
  if (!(A > 0.0)) throw Error(ErrorCode::invalid_argument, "A must be positive");
  NonlinearitySpec out = *this;
  out.A_ = A;
  return out;
}

namespace {

bool concave_scan(const NonlinearitySpec& spec, double A, std::size_t n) {
  // (phi^{1+A})' = (1+A) phi^A phi' must be nonincreasing.
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::pow(10.0, -8.0 + 16.0 * static_cast<double>(i) / static_cast<double>(n - 1));
    const double d = (1.0 + A) * std::pow(spec.phi_unchecked(s), A) * spec.phi_prime_unchecked(s);
    if (d > prev * (1.0 + 1e-10)) return false;
    prev = d;
  }
  return true;
}

}  // namespace

HphiReport validate_hphi(const NonlinearitySpec& spec, std::size_t sample_budget) {
  const std::size_t n = std::max<std::size_t>(sample_budget, 16);
  HphiReport report;
  report.A = spec.A();
  report.envelope_min = std::numeric_limits<double>::infinity();
  report.envelope_max = 0.0;
  double prev_phi = -1.0;
  const double upper_s = spec.cap().value_or(std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::pow(10.0, -8.0 + 16.0 * static_cast<double>(i) / static_cast<double>(n - 1));
    const double f = spec.phi_unchecked(s);
    if (!(f > prev_phi) || !(spec.phi_prime_unchecked(s) > 0.0)) report.increasing_ok = false;
    prev_phi = f;
    if (s <= upper_s) {
      const double e = std::pow(s, 1.0 - spec.m()) * spec.phi_prime_unchecked(s);
      report.envelope_min = std::min(report.envelope_min, e);
      report.envelope_max = std::max(report.envelope_max, e);
    }
  }
  constexpr double tol = 1e-12;
  report.envelope_ok = report.envelope_min >= spec.envelope_lower() * (1.0 - tol) &&
                       report.envelope_max <= spec.envelope_upper() * (1.0 + tol);
  report.concavity_ok = concave_scan(spec, spec.A(), n);
  return report;
}

double max_concavity_parameter(const NonlinearitySpec& spec, std::size_t sample_budget) {
  const std::size_t n = std::max<std::size_t>(sample_budget, 16);
  double lo = 0.0;
  double hi = (1.0 - spec.m()) / spec.m() * 1.01;
  if (concave_scan(spec, hi, n)) return hi;
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (concave_scan(spec, mid, n)) lo = mid; else hi = mid;
  }
  return lo;
}

NonlinearitySpec rescale_phi(const NonlinearitySpec& spec, double k, double alpha) {
  if (!(k >= 1.0)) throw Error(ErrorCode::invalid_argument, "nonlinearity rescaling needs k >= 1");
  const double factor = std::pow(k, alpha);
  NonlinearitySpec out = spec.with_scale(spec.scale() * factor);
  if (spec.cap()) out = out.with_cap(*spec.cap() * factor);
  return out;
}

NonlinearitySpec modify_for_boundedness(const NonlinearitySpec& spec, double u_max) {
  if (!(u_max > 0.0)) throw Error(ErrorCode::invalid_argument, "u_max must be positive");
  return spec.with_cap(u_max);
}

}  // namespace nlfd
