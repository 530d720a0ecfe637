#include <doctest.h>

#include <cmath>
#include <random>

#include "nlfd/error.hpp"
#include "nlfd/kernel.hpp"

using namespace nlfd;

TEST_CASE("fractional normalization against the Gamma-function formula") {
  CHECK(fractional_normalization(1, 1.0) == doctest::Approx(1.0 / M_PI).epsilon(1e-14));
  for (int N : {1, 2}) {
    for (double s : {0.3, 0.5, 1.0, 1.5, 1.9}) {
      const double mu = std::pow(2.0, s - 1.0) * s * std::tgamma(0.5 * (N + s)) /
                        (std::pow(M_PI, 0.5 * N) * std::tgamma(1.0 - 0.5 * s));
      CHECK(fractional_normalization(N, s) == doctest::Approx(mu).epsilon(1e-13));
    }
  }
}

TEST_CASE("eval") {
  const KernelSpec k = KernelSpec::fractional_power(1, 1.0);
  CHECK(k.eval({0.0, 0.0}, {1.0, 0.0}) == doctest::Approx(0.3183099).epsilon(1e-7));
  const KernelSpec flat = KernelSpec::convolution_modulated(1, 1.0, 0.0);
  for (double d : {0.1, 1.0, 7.3}) {
    CHECK(flat.eval({0.5, 0.0}, {0.5 + d, 0.0}) == doctest::Approx(k.eval({0.5, 0.0}, {0.5 + d, 0.0})));
  }
  bool singular = false;
  try {
    k.eval({0.2, 0.0}, {0.2, 0.0});
  } catch (const Error& e) {
    singular = e.code() == ErrorCode::singular_point;
  }
  CHECK(singular);
}

TEST_CASE("validate_hj") {
  const HjReport pure = validate_hj(KernelSpec::fractional_power(1, 1.0));
  CHECK(pure.swap_symmetry_ok);
  CHECK(pure.z_evenness_ok);
  CHECK(pure.envelope_ok);
  CHECK(pure.worst_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pure.samples >= 1000);

  const KernelSpec mod = KernelSpec::convolution_modulated(1, 1.0, 0.5, Modulation::cosine);
  const HjReport r = validate_hj(mod);
  CHECK(r.swap_symmetry_ok);
  CHECK(r.z_evenness_ok);
  CHECK(r.envelope_ok);
  CHECK(r.worst_ratio <= 2.0 + 1e-12);  // amplitude in [1 - eps, 1 + eps], so max(a, 1/a) <= 2

  const KernelSpec mid = KernelSpec::midpoint_general(1, 0.5, 0.5);
  const HjReport m = validate_hj(mid);
  CHECK(m.swap_symmetry_ok);
  CHECK_FALSE(m.z_evenness_ok);
  CHECK(m.envelope_ok);
  CHECK(m.worst_ratio <= mid.lambda());

  for (int N : {1, 2}) {
    for (double s : {0.4, 1.2}) {
      const KernelSpec k = KernelSpec::convolution_modulated(N, s, 0.3);
      const HjReport rep = validate_hj(k, 1000, 99);
      CHECK(rep.envelope_ok);
      CHECK(rep.swap_symmetry_ok);
      CHECK(rep.min_amplitude >= 1.0 / k.lambda());
      CHECK(rep.max_amplitude <= k.lambda());
    }
  }
}

TEST_CASE("midpoint family is rejected for sigma >= 1") {
  CHECK_THROWS_AS(KernelSpec::midpoint_general(1, 1.2, 0.3), Error);
  CHECK_THROWS_AS(KernelSpec::fractional_power(1, 2.0), Error);
  CHECK_THROWS_AS(KernelSpec::convolution_modulated(1, 1.0, 1.0), Error);
}

TEST_CASE("rescale") {
  const double alpha = 4.0 / 3.0;
  const KernelSpec pure = KernelSpec::fractional_power(1, 1.0);
  const KernelSpec mod = KernelSpec::convolution_modulated(1, 1.0, 0.5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Point x{U(rng), 0.0}, y{U(rng), 0.0};
    if (x == y) continue;
    CHECK(rescale(mod, 1.0, alpha).eval(x, y) == doctest::Approx(mod.eval(x, y)).epsilon(1e-14));
    CHECK(rescale(pure, 37.0, alpha).eval(x, y) == doctest::Approx(pure.eval(x, y)).epsilon(1e-12));
    // Composition.
    const double lhs = rescale(rescale(mod, 3.0, alpha), 5.0, alpha).eval(x, y);
    const double rhs = rescale(mod, 15.0, alpha).eval(x, y);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    // Envelope survives rescaling.
    const KernelSpec big = rescale(mod, 1e3, alpha);
    const double a = big.amplitude(x, y);
    CHECK(a <= mod.lambda());
    CHECK(a >= 1.0 / mod.lambda());
  }
  // Far-field limit at |x - y| = 1.
  const double mu = fractional_normalization(1, 1.0);
  const double v = rescale(mod, 1e6, alpha).eval({0.0, 0.0}, {1.0, 0.0});
  REQUIRE(mod.far_field_constant().has_value());
  CHECK(*mod.far_field_constant() == doctest::Approx(mu));
  CHECK(std::abs(v / mu - 1.0) < 1e-3);
  CHECK_FALSE(KernelSpec::convolution_modulated(1, 1.0, 0.5, Modulation::cosine)
                  .far_field_constant()
                  .has_value());
  CHECK_THROWS_AS(rescale(mod, 0.5, alpha), Error);
}

TEST_CASE("far-field convergence improves with k") {
  const double alpha = 4.0 / 3.0;
  const KernelSpec mod = KernelSpec::convolution_modulated(1, 1.0, 0.5);
  const double c1 = *mod.far_field_constant();
  double previous = HUGE_VAL;
  for (double k : {1.0, 10.0, 100.0, 1e4}) {
    const KernelSpec kk = rescale(mod, k, alpha);
    double sup = 0.0;
    for (double z = 1.0; z < 50.0; z += 0.37) {
      sup = std::max(sup, std::abs(kk.eval({0.0, 0.0}, {z, 0.0}) * std::pow(z, 2.0) - c1));
    }
    CHECK(sup < previous);
    previous = sup;
  }
}
