#include "nlfd/special.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "nlfd/error.hpp"

namespace nlfd::special {

namespace {

// B_{2j} / (2j)! for j = 1..10
constexpr double kBernoulliOverFactorial[] = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
    -174611.0 / 330.0 / 2432902008176640000.0,
};

}  // namespace

double hurwitz_zeta(double s, double a) {
  if (!(a > 0.0)) throw Error(ErrorCode::invalid_argument, "hurwitz_zeta needs a > 0");
  if (s == 1.0) throw Error(ErrorCode::invalid_argument, "hurwitz_zeta pole at s = 1");
  // Euler-Maclaurin with a shifted tail start.
  constexpr int kTerms = 24;
  double sum = 0.0;
  for (int k = 0; k < kTerms; ++k) sum += std::pow(k + a, -s);
  const double x = kTerms + a;
  sum += std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
  double rising = s;  // s (s+1) ... (s + 2j - 2)
  double xpow = std::pow(x, -s - 1.0);
  for (int j = 0; j < 10; ++j) {
    sum += kBernoulliOverFactorial[j] * rising * xpow;
    rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
    xpow /= x * x;
  }
  return sum;
}

double riemann_zeta(double s) { return hurwitz_zeta(s, 1.0); }

double dirichlet_beta(double s) {
  return std::pow(4.0, -s) * (hurwitz_zeta(s, 0.25) - hurwitz_zeta(s, 0.75));
}

double lattice_zeta(int dim, double s) {
  if (dim == 1) return 2.0 * riemann_zeta(s);
  if (dim == 2) {
    // Square lattice: sum' (a^2 + b^2)^{-t} = 4 zeta(t) beta(t), with t = s / 2.
    const double t = 0.5 * s;
    return 4.0 * riemann_zeta(t) * dirichlet_beta(t);
  }
  throw Error(ErrorCode::invalid_argument, "lattice_zeta supports dimensions 1 and 2");
}

const GaussRule& gauss_legendre(int points) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(points);
  if (it != cache.end()) return it->second;
  GaussRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  for (int i = 0; i < points; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= points; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = points * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(points, std::move(rule)).first->second;
}

}  // namespace nlfd::special
