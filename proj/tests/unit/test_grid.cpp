#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "nlfd/error.hpp"
#include "nlfd/grid.hpp"

using namespace nlfd;

namespace {

bool throws_code(ErrorCode code, auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

}  // namespace

TEST_CASE("make_grid derives spacing and validates") {
  const Grid g = make_grid(1, 50.0, 1024);
  CHECK(g.spacing() == 0.09765625);
  CHECK(g.spacing() * g.points_per_axis() == 100.0);
  CHECK(make_grid(2, 10.0, 64, BoundaryMode::periodic).size() == 4096);
  CHECK(throws_code(ErrorCode::invalid_argument, [] { make_grid(1, 1.0, 15); }));
  CHECK(throws_code(ErrorCode::invalid_argument, [] { make_grid(1, 1.0, 14); }));
  CHECK(throws_code(ErrorCode::invalid_argument, [] { make_grid(1, 0.0, 16); }));
  CHECK(throws_code(ErrorCode::invalid_argument, [] { make_grid(3, 1.0, 16); }));
}

TEST_CASE("nodes are cell centred and never touch the boundary") {
  const Grid g = make_grid(1, 1.0, 16);
  CHECK(g.coordinate(0) == doctest::Approx(-1.0 + 0.0625));
  CHECK(g.coordinate(15) == doctest::Approx(1.0 - 0.0625));
  const Grid g2 = make_grid(2, 1.0, 16);
  const Point c = g2.center(3 * 16 + 5);
  CHECK(c[0] == doctest::Approx(g2.coordinate(3)));
  CHECK(c[1] == doctest::Approx(g2.coordinate(5)));
  CHECK(g2.axis_indices(3 * 16 + 5) == std::array<int, 2>{3, 5});
}

TEST_CASE("integrate is the midpoint rule") {
  const Grid g = make_grid(1, 1.0, 16);
  CHECK(integrate(Field(g, 0.0)) == 0.0);
  CHECK(integrate(Field(g, 1.0)) == doctest::Approx(2.0));

  // Gaussian density on a wide box: midpoint rule is spectrally accurate, oracle via erf.
  const Grid wide = make_grid(1, 50.0, 4096);
  Field f(wide);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = wide.center(i)[0];
    f[i] = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  }
  const double oracle = std::erf(50.0 / std::sqrt(2.0));
  CHECK(std::abs(integrate(f) - oracle) < 1e-10);
}

TEST_CASE("integrate is linear") {
  const Grid g = make_grid(2, 3.0, 32);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Field f(g), h(g), comb(g);
  const double a = 1.7, b = -0.3;
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] = U(rng);
    h[i] = U(rng);
    comb[i] = a * f[i] + b * h[i];
  }
  CHECK(integrate(comb) == doctest::Approx(a * integrate(f) + b * integrate(h)).epsilon(1e-12));
}

TEST_CASE("ball_restriction") {
  const Grid g = make_grid(1, 1.0, 16);
  const Field f(g);
  CHECK(ball_restriction(f, {0.0, 0.0}, 2.0).size() == 16);
  const auto central = ball_restriction(f, {0.0, 0.0}, 0.5);
  REQUIRE(central.size() == 8);
  CHECK(central.front() == 4);
  CHECK(central.back() == 11);
  CHECK(throws_code(ErrorCode::degenerate_ball,
                    [&] { ball_restriction(f, {0.0, 0.0}, 0.5 * g.spacing() * 0.99); }));

  // Monotone in the radius.
  const Grid g2 = make_grid(2, 4.0, 32);
  const Field f2(g2);
  std::vector<std::size_t> previous;
  for (double r : {0.5, 1.0, 1.7, 3.0, 6.0}) {
    const auto s = ball_restriction(f2, {0.3, -0.2}, r);
    CHECK(std::includes(s.begin(), s.end(), previous.begin(), previous.end()));
    previous = s;
  }
}

TEST_CASE("binary round trip") {
  const Grid g = make_grid(2, 2.5, 16);
  Field f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 0.25 * i;
  const auto path = std::filesystem::temp_directory_path() / "nlfd_grid_roundtrip.bin";
  write_field_binary(f, 3.5, path.string());
  const FieldFile back = read_field_binary(path.string());
  CHECK(back.time == 3.5);
  CHECK(back.field.grid == g);
  CHECK(back.field.values == f.values);
  std::filesystem::remove(path);
  CHECK(throws_code(ErrorCode::io_error, [] { read_field_binary("/nonexistent/nlfd.bin"); }));
}
