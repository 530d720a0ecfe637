#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/special_functions/hypergeometric_1F1.hpp>

#include "nlfd/error.hpp"
#include "nlfd/operator.hpp"

using namespace nlfd;

namespace {

// (-Delta)^{s/2} exp(-|x|^2/2) = 2^{s/2} Gamma((N+s)/2)/Gamma(N/2) 1F1((N+s)/2; N/2; -|x|^2/2).
double gaussian_oracle(int N, double s, double r) {
  const double a = 0.5 * (N + s), b = 0.5 * N;
  return std::pow(2.0, 0.5 * s) * std::tgamma(a) / std::tgamma(b) *
         boost::math::hypergeometric_1F1(a, b, -0.5 * r * r);
}

Field gaussian(const Grid& g) {
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = distance(g.center(i), {0.0, 0.0});
    f[i] = std::exp(-0.5 * r * r);
  }
  return f;
}

double central_error(const Grid& g, double sigma) {
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, KernelSpec::fractional_power(1, sigma));
  const Field Lf = op.apply(gaussian(g));
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.center(i)[0];
    if (std::abs(x) > 0.5 * g.half_width()) continue;
    const double exact = gaussian_oracle(1, sigma, std::abs(x));
    err = std::max(err, std::abs(Lf[i] - exact));
    scale = std::max(scale, std::abs(exact));
  }
  return err / scale;
}

Field random_field(const Grid& g, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  Field f(g);
  for (double& v : f.values) v = U(rng);
  return f;
}

double dot(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("oracle sanity: sigma -> 2 recovers the Laplacian") {
  for (double x : {0.0, 0.7, 2.0}) {
    const double lap = (1.0 - x * x) * std::exp(-0.5 * x * x);
    CHECK(gaussian_oracle(1, 2.0, x) == doctest::Approx(lap).epsilon(1e-12));
  }
}

TEST_CASE("quadrature matches the closed form on the central half-box and converges") {
  for (double sigma : {0.5, 1.0, 1.5}) {
    const double coarse = central_error(make_grid(1, 50.0, 512), sigma);
    const double fine = central_error(make_grid(1, 50.0, 2048), sigma);
    CAPTURE(sigma);
    CHECK(fine < 1e-3);
    CHECK(fine < coarse);
  }
}

TEST_CASE("constants, zero field and interior maxima") {
  const Grid ext = make_grid(1, 5.0, 128);
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(ext, KernelSpec::fractional_power(1, 1.0));
  const Field one = op.apply(Field(ext, 1.0));
  for (std::size_t i = 0; i < ext.size(); ++i) {
    CHECK(op.leak()[i] > 0.0);
    CHECK(one[i] == doctest::Approx(op.leak()[i]).epsilon(1e-10));
  }
  const Field zero = op.apply(Field(ext, 0.0));
  CHECK(max_norm(zero.values) == 0.0);

  const Grid per = make_grid(1, 5.0, 128, BoundaryMode::periodic);
  const DiscreteOperator pop = DiscreteOperator::assemble_quadrature(per, KernelSpec::fractional_power(1, 1.0));
  CHECK(max_norm(pop.apply(Field(per, 3.0)).values) < 1e-10);

  std::mt19937_64 rng(11);
  Field f = random_field(ext, rng);
  f[60] = 2.0;
  CHECK(op.apply(f)[60] >= 0.0);
}

TEST_CASE("symmetry, linearity, energy and mass flux") {
  std::mt19937_64 rng(5);
  for (const Grid& g : {make_grid(1, 4.0, 64), make_grid(2, 2.0, 16),
                        make_grid(1, 4.0, 64, BoundaryMode::periodic)}) {
    std::vector<KernelSpec> kernels{KernelSpec::fractional_power(g.dim(), 0.8),
                                    KernelSpec::convolution_modulated(g.dim(), 1.3, 0.5)};
    if (g.boundary_mode() == BoundaryMode::exterior_zero) {
      kernels.push_back(KernelSpec::midpoint_general(g.dim(), 0.6, 0.4));
    }
    for (const KernelSpec& k : kernels) {
      const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, k);
      const std::size_t n = g.size();
      const auto W = op.dense_weights();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          REQUIRE(W[i * n + j] == W[j * n + i]);
          if (i != j) REQUIRE(W[i * n + j] >= 0.0);
        }
      }
      const Field f = random_field(g, rng, -1.0, 1.0);
      const Field h = random_field(g, rng, -1.0, 1.0);
      const Field Lf = op.apply(f), Lh = op.apply(h);
      const double scale = std::sqrt(energy(op, f, f) * energy(op, h, h));
      CHECK(std::abs(dot(Lf, h) - dot(f, Lh)) <= 1e-12 * scale);
      CHECK(std::abs(pairing(op, f.values, h.values) - energy(op, f, h)) <= 1e-12 * scale);
      CHECK(energy(op, f, f) >= 0.0);

      Field comb(g);
      for (std::size_t i = 0; i < n; ++i) comb[i] = 2.0 * f[i] - 0.5 * h[i];
      const Field Lc = op.apply(comb);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(Lc[i] == doctest::Approx(2.0 * Lf[i] - 0.5 * Lh[i]).epsilon(1e-10).scale(max_norm(Lf.values)));
      }

      double flux = 0.0, total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        flux += op.leak()[i] * f[i];
        total += Lf[i];
      }
      CHECK(total == doctest::Approx(flux).scale(max_norm(Lf.values) * n).epsilon(1e-12));

      const double c = 1.7;
      CHECK(energy(op, f, Field(g, c)) == doctest::Approx(c * flux).scale(scale).epsilon(1e-12));
    }
  }
}

TEST_CASE("discrete Stroock-Varopoulos for F = u, G = u^m, H = 2 sqrt(m)/(m+1) u^{(m+1)/2}") {
  std::mt19937_64 rng(9);
  const Grid g = make_grid(1, 4.0, 64);
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(g, KernelSpec::fractional_power(1, 1.0));
  for (double m : {0.3, 0.75}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Field u = random_field(g, rng, 0.0, 3.0);
      Field F(g), G(g), H(g);
      for (std::size_t i = 0; i < u.size(); ++i) {
        F[i] = u[i];
        G[i] = std::pow(u[i], m);
        H[i] = 2.0 * std::sqrt(m) / (m + 1.0) * std::pow(u[i], 0.5 * (m + 1.0));
      }
      CHECK(energy(op, F, G) >= energy(op, H, H) * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("apply_spectral") {
  const Grid g = make_grid(1, M_PI, 64, BoundaryMode::periodic);
  Field c3(g), c4(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    c3[i] = std::cos(3.0 * g.center(i)[0]);
    c4[i] = std::cos(4.0 * g.center(i)[0]);
  }
  const Field a = apply_spectral(c3, 1.0), b = apply_spectral(c4, 0.5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(a[i] == doctest::Approx(3.0 * c3[i]).scale(1.0).epsilon(1e-12));
    CHECK(b[i] == doctest::Approx(2.0 * c4[i]).scale(1.0).epsilon(1e-12));
  }
  CHECK(max_norm(apply_spectral(Field(g, 2.0), 1.3).values) < 1e-13);
  CHECK_THROWS_AS(apply_spectral(Field(make_grid(1, 1.0, 16)), 1.0), Error);
}

TEST_CASE("grid mismatch is rejected") {
  const DiscreteOperator op = DiscreteOperator::assemble_quadrature(make_grid(1, 4.0, 64), KernelSpec::fractional_power(1, 1.0));
  bool mismatch = false;
  try {
    op.apply(Field(make_grid(1, 4.0, 32)));
  } catch (const Error& e) {
    mismatch = e.code() == ErrorCode::grid_mismatch;
  }
  CHECK(mismatch);
}

TEST_CASE("cutoff scaling slopes") {
  struct Case {
    double sigma, q, expected;
  };
  for (const Case c : {Case{1.0, HUGE_VAL, -1.0}, Case{0.5, 1.0, 0.5}, Case{1.0, 1.0, 0.0}}) {
    const CutoffScalingTable t = cutoff_scaling_check(KernelSpec::fractional_power(1, c.sigma), c.q, {4, 8, 16, 32});
    CHECK(t.expected_slope == doctest::Approx(c.expected));
    CHECK(std::abs(t.slope - c.expected) <= 0.05 * std::max(std::abs(c.expected), 1.0));
  }
  CHECK(smooth_cutoff(0.5) == 1.0);
  CHECK(smooth_cutoff(2.5) == 0.0);
  CHECK(smooth_cutoff(1.5) > 0.0);
  CHECK(smooth_cutoff(1.5) < 1.0);
}
